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

#include "kbmf/distributions.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/digamma.hpp>

#include "kbmf/errors.hpp"

namespace kbmf {
namespace {

constexpr double kTailSwitch = -30.0;
const double kLogSqrt2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

// Asymptotic factor s(t) with Phi(-t) = phi(t)/t * s(t), t >= 30.
double tail_series(double t) {
  const double inv = 1.0 / (t * t);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k <= 8; ++k) {
    term *= -static_cast<double>(2 * k - 1) * inv;
    sum += term;
  }
  return sum;
}

}  // namespace

double std_normal_pdf(double x) {
  return std::exp(-0.5 * x * x - kLogSqrt2Pi);
}

double std_normal_cdf(double x) {
  return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0);
}

NormalValues std_normal(double x) {
  return {std_normal_pdf(x), std_normal_cdf(x)};
}

double std_normal_log_cdf(double x) {
  if (x >= kTailSwitch) return std::log(std_normal_cdf(x));
  const double t = -x;
  return -0.5 * t * t - kLogSqrt2Pi - std::log(t) + std::log(tail_series(t));
}

double inverse_mills_ratio(double x) {
  if (x >= kTailSwitch) return std_normal_pdf(x) / std_normal_cdf(x);
  const double t = -x;
  return t / tail_series(t);
}

TruncatedMoments truncated_moments(double mu, double sigma, int label, double margin) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ParameterError("truncated_moments: sigma must be positive");
  }
  if (label != 1 && label != -1) {
    throw ParameterError("truncated_moments: label must be -1 or +1");
  }
  const double y = static_cast<double>(label);
  const double z = (y * mu - margin) / sigma;
  const double ratio = inverse_mills_ratio(z);
  TruncatedMoments out{};
  out.mean = mu + y * sigma * ratio;
  out.variance = sigma * sigma * (1.0 - z * ratio - ratio * ratio);
  out.log_z = std_normal_log_cdf(z);
  out.entropy = 0.5 + kLogSqrt2Pi + std::log(sigma) + out.log_z - 0.5 * z * ratio;
  return out;
}

double GammaPosterior::mean_log() const {
  return boost::math::digamma(shape) + std::log(scale);
}

double GammaPosterior::entropy() const {
  return shape + std::log(scale) + std::lgamma(shape) + (1.0 - shape) * boost::math::digamma(shape);
}

double GammaPosterior::expected_log_prior(double prior_shape, double prior_scale) const {
  return (prior_shape - 1.0) * mean_log() - mean() / prior_scale - std::lgamma(prior_shape) -
         prior_shape * std::log(prior_scale);
}

GammaPosterior gamma_update(double prior_shape, double prior_scale, double second_moment) {
  if (!(prior_shape > 0.0) || !(prior_scale > 0.0)) {
    throw ParameterError("gamma_update: prior shape and scale must be positive");
  }
  if (second_moment < 0.0) throw ParameterError("gamma_update: negative second moment");
  return {prior_shape + 0.5, 1.0 / (1.0 / prior_scale + 0.5 * second_moment)};
}

}  // namespace kbmf
