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

#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace kbmf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Absolute tolerance under which a kernel matrix counts as symmetric.
inline constexpr double kSymmetryTolerance = 1e-9;

/// A stack of P symmetric N x N kernel matrices for one domain.
///
/// Matrices are symmetrized as (K + K^T)/2 on construction; inputs whose
/// asymmetry exceeds kSymmetryTolerance are rejected. The Gram-product sum
/// sum_m K_m K_m^T is computed on first use and shared between copies.
class KernelBundle {
 public:
  KernelBundle() = default;
  KernelBundle(std::vector<Matrix> matrices, std::vector<std::string> names = {});

  /// Appends a kernel; invalidates the cached Gram sum.
  void add(Matrix kernel, std::string name = {});

  [[nodiscard]] std::size_t size() const { return matrices_.size(); }
  [[nodiscard]] Index dimension() const;
  [[nodiscard]] const Matrix& operator[](std::size_t m) const { return matrices_[m]; }
  [[nodiscard]] const std::vector<Matrix>& matrices() const { return matrices_; }
  [[nodiscard]] const std::vector<std::string>& names() const { return names_; }

  /// sum_m K_m K_m^T, computed lazily. Thread-safe.
  [[nodiscard]] const Matrix& gram_sum() const;

  /// Restricts every kernel to the given objects (rows and columns).
  [[nodiscard]] KernelBundle subset(std::span<const Index> objects) const;

 private:
  struct GramCache {
    std::once_flag once;
    Matrix value;
  };

  std::vector<Matrix> matrices_;
  std::vector<std::string> names_;
  mutable std::shared_ptr<GramCache> cache_ = std::make_shared<GramCache>();
};

/// P kernel matrices between N_train training objects (rows) and N_test
/// test objects (columns).
class CrossKernelBundle {
 public:
  CrossKernelBundle() = default;
  explicit CrossKernelBundle(std::vector<Matrix> matrices);

  [[nodiscard]] std::size_t size() const { return matrices_.size(); }
  [[nodiscard]] Index train_count() const;
  [[nodiscard]] Index test_count() const;
  [[nodiscard]] const Matrix& operator[](std::size_t m) const { return matrices_[m]; }
  [[nodiscard]] const std::vector<Matrix>& matrices() const { return matrices_; }

  /// Extracts K_m[train, test] from square kernels.
  static CrossKernelBundle slice(const KernelBundle& full, std::span<const Index> train,
                                 std::span<const Index> test);

 private:
  std::vector<Matrix> matrices_;
};

/// exp(-||x_i - x_j||^2 / (2 width^2)) between the columns of x1 and x2.
Matrix gaussian_kernel(const Matrix& x1, const Matrix& x2, double width);

/// One linear kernel per feature: K_m = x^m (x^m)^T with x^m the m-th row of x.
KernelBundle per_feature_linear_kernels(const Matrix& x);

/// Jaccard index between the supports of the columns of a 0/1 matrix.
/// Two empty supports have similarity 1.
Matrix jaccard_kernel(const Matrix& profiles);

struct MatrixValidation {
  double symmetry_defect = 0.0;  ///< max |K_ij - K_ji|
  double min_eigenvalue = 0.0;   ///< power-iteration estimate; NaN if not finite
  double max_eigenvalue = 0.0;
  std::size_t nan_count = 0;
};

struct ValidationReport {
  std::vector<MatrixValidation> matrices;
  [[nodiscard]] bool all_finite() const;
  [[nodiscard]] bool all_symmetric(double tolerance = kSymmetryTolerance) const;
};

/// Inspects raw matrices without modifying them.
ValidationReport validate_matrices(std::span<const Matrix> matrices);
ValidationReport validate_bundle(const KernelBundle& bundle);

}  // namespace kbmf
