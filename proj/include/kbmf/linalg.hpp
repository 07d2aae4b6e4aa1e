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

#include <string_view>

#include <Eigen/Dense>

namespace kbmf {

/// Covariance obtained by inverting a symmetric positive-definite precision.
struct SpdInverse {
  Eigen::MatrixXd covariance;
  Eigen::LLT<Eigen::MatrixXd> factor;  ///< Cholesky of the (possibly jittered) precision
  double log_det_covariance = 0.0;
  double jitter = 0.0;                 ///< diagonal increment that was needed, 0 if none
};

/// Inverts `precision` through its Cholesky factor.
///
/// If the factorization fails, adds jitter = 1e-10 * mean(diag) to the
/// diagonal and retries, growing jitter by 10x up to 1e-4 * mean(diag).
/// Throws NumericalError naming `what` when that is not enough.
SpdInverse spd_inverse(const Eigen::MatrixXd& precision, std::string_view what);

}  // namespace kbmf
