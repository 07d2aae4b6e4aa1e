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

#include "kbmf/linalg.hpp"

#include <cmath>
#include <string>

#include "kbmf/errors.hpp"

namespace kbmf {

SpdInverse spd_inverse(const Eigen::MatrixXd& precision, std::string_view what) {
  if (precision.rows() != precision.cols()) {
    throw ShapeError(std::string(what) + ": precision is not square");
  }
  if (!precision.allFinite()) {
    throw NumericalError(std::string(what) + ": precision has non-finite entries");
  }
  const Eigen::Index n = precision.rows();
  const double diag_mean = n > 0 ? precision.diagonal().mean() : 1.0;

  SpdInverse out;
  double relative = 0.0;
  for (;;) {
    Eigen::MatrixXd shifted = precision;
    if (relative > 0.0) shifted.diagonal().array() += relative * diag_mean;
    out.factor.compute(shifted);
    const bool ok = out.factor.info() == Eigen::Success &&
                    (out.factor.matrixLLT().diagonal().array() > 0.0).all() &&
                    out.factor.matrixLLT().allFinite();
    if (ok) break;
    relative = relative == 0.0 ? 1e-10 : relative * 10.0;
    if (relative > 1e-4 * (1.0 + 1e-9)) {
      throw NumericalError(std::string(what) + ": precision is not positive definite");
    }
  }
  out.jitter = relative * diag_mean;
  out.covariance = out.factor.solve(Eigen::MatrixXd::Identity(n, n));
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  const auto diag = out.factor.matrixLLT().diagonal();
  out.log_det_covariance = -2.0 * diag.array().log().sum();
  return out;
}

}  // namespace kbmf
