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

// Synthetic data generators: the two-domain toy problem with per-feature
// linear kernels, planted low-rank binary interactions, and planted
// multilabel data.

#pragma once

#include <cstdint>
#include <vector>

#include "kbmf/kernel_ops.hpp"

namespace kbmf {

struct ToySpec {
  Index n_x = 40;
  Index n_z = 60;
  Index d_x = 15;
  Index d_z = 10;
  std::vector<Index> active_x{1, 4, 7};  ///< 1-based feature indices
  std::vector<Index> active_z{3, 8, 10};
  double noise_sd = 1.0;
  std::uint64_t seed = 0;

  /// Throws ParameterError when an active index is out of range or the
  /// two active lists differ in length.
  void validate() const;
};

struct ToyData {
  Matrix x;  ///< d_x x n_x
  Matrix z;  ///< d_z x n_z
  Matrix y;  ///< n_x x n_z
  Matrix y_clean;
};

/// Features are i.i.d. standard normal; y(i,j) = sum_k x(a_k,i) z(b_k,j) + noise.
ToyData toy_generate(const ToySpec& spec);

/// Noiseless target for given features.
Matrix toy_signal(const Matrix& x, const Matrix& z, const ToySpec& spec);

struct PlantedInteractionSpec {
  Index n_x = 60;
  Index n_z = 60;
  Index informative = 6;  ///< features carrying the signal, per domain
  Index noise = 6;        ///< pure-noise features, per domain
  int rank = 3;
  double positive_rate = 0.1;
  std::uint64_t seed = 0;
};

struct PlantedInteractions {
  Matrix x;  ///< (informative + noise) x n_x
  Matrix z;
  Matrix y;  ///< n_x x n_z, +-1
  KernelBundle kx;  ///< Gaussian kernels on the informative and on the noise features
  KernelBundle kz;
};

/// Scores u_i^T v_j with u = W_x^T x_info, v = W_z^T z_info; the top
/// positive_rate fraction of pairs is labelled +1.
PlantedInteractions planted_interactions(const PlantedInteractionSpec& spec);

struct PlantedMultilabelSpec {
  Index n_train = 200;
  Index n_test = 200;
  Index features = 20;
  Index labels = 6;
  int latent = 3;
  double flip_rate = 0.05;
  std::uint64_t seed = 0;
};

struct PlantedMultilabel {
  Matrix x_train;  ///< D x N
  Matrix x_test;
  Matrix labels_train;  ///< L x N, +-1
  Matrix labels_test;
};

/// Labels are thresholded linear functions of a shared low-dimensional
/// projection of the features, so labels are correlated; a fraction of
/// entries is flipped.
PlantedMultilabel planted_multilabel(const PlantedMultilabelSpec& spec);

}  // namespace kbmf
