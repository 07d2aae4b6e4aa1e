/*
 * Copyright 2026 The kbmf Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <optional>

#include "kbmf/engine.hpp"

namespace kbmf {

/// Gaussian summary of the composite components of a set of objects.
/// Variances are per component (diagonal approximation).
struct PredictiveComponents {
  Matrix h_mean;  ///< R x N
  Matrix h_var;   ///< R x N
};

/// Scores for every (row object, column object) pair. `p_positive` is
/// set for binary variants only.
struct ScorePrediction {
  Matrix f_mean;
  Matrix f_std;
  std::optional<Matrix> p_positive;
};

/// Pushes out-of-matrix objects through q(A) and q(e).
///
/// For kernel m and test column k: g = mu(A)^T k with per-component
/// variance sigma_g^2 + k^T Sigma(a_s) k; the composite is the e-weighted
/// sum with variance sigma_h^2 + gbar^T Sigma(e) gbar + sum_m E[e_m^2] var(g_m).
/// Kernel-specific predictions of different kernels are treated as independent.
PredictiveComponents project_test(const DomainPosteriors& d, const CrossKernelBundle& cross,
                                  const HyperParams& hp);

/// Components of training objects taken directly from q(H).
PredictiveComponents in_matrix_components(const DomainPosteriors& d);

/// Moment-matched product of independent Gaussian components:
/// mean hx^T hz and variance noise_var + sum_s (vx mz^2 + vz mx^2 + vx vz).
ScorePrediction predict_scores(const PredictiveComponents& hx, const PredictiveComponents& hz,
                               double noise_var = 1.0);

/// Normalized probability of the positive class,
/// Phi((mu - nu)/sd) / (Phi((mu - nu)/sd) + Phi((-mu - nu)/sd)), evaluated in log space.
double class_probability(double mean, double sd, double margin);

/// Scores for all test pairs. A null cross bundle means "use the training
/// objects of that domain" (in-matrix components).
ScorePrediction predict_matrix(const Model& model, const CrossKernelBundle* cross_x,
                               const CrossKernelBundle* cross_z);

}  // namespace kbmf
