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

namespace kbmf {

struct NormalValues {
  double pdf;
  double cdf;
};

/// phi(x) and Phi(x). Phi goes through erfc, so it stays positive down to
/// x ~ -38 before underflowing.
NormalValues std_normal(double x);

double std_normal_pdf(double x);
double std_normal_cdf(double x);

/// log Phi(x), finite for every finite x (asymptotic series below -30).
double std_normal_log_cdf(double x);

/// phi(x) / Phi(x), the inverse Mills ratio of the lower tail, computed
/// without forming Phi(x) when x < -30.
double inverse_mills_ratio(double x);

/// Summary of N(mu, sigma^2) restricted to {f : label * f > margin}.
struct TruncatedMoments {
  double mean;
  double variance;
  double log_z;    ///< log of the retained probability mass
  double entropy;  ///< differential entropy of the truncated density

  [[nodiscard]] double second_moment() const { return variance + mean * mean; }
};

/// Moments of a one-sided truncated normal. Throws ParameterError when
/// sigma <= 0 or label is not +-1.
TruncatedMoments truncated_moments(double mu, double sigma, int label, double margin);

/// Gamma(shape, scale) with mean shape * scale.
struct GammaPosterior {
  double shape = 1.0;
  double scale = 1.0;

  [[nodiscard]] double mean() const { return shape * scale; }
  /// E[log x] = digamma(shape) + log(scale).
  [[nodiscard]] double mean_log() const;
  [[nodiscard]] double entropy() const;
  /// E_q[log Gamma(x; prior_shape, prior_scale)] under this posterior.
  [[nodiscard]] double expected_log_prior(double prior_shape, double prior_scale) const;
};

/// Conjugate update of a Gamma precision after observing one zero-mean
/// Gaussian coordinate with expected square second_moment.
GammaPosterior gamma_update(double prior_shape, double prior_scale, double second_moment);

}  // namespace kbmf
