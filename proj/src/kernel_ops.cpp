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

#include "kbmf/kernel_ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "kbmf/errors.hpp"

namespace kbmf {
namespace {

std::string dims(const Matrix& m) {
  std::ostringstream out;
  out << m.rows() << "x" << m.cols();
  return out.str();
}

void require_finite(const Matrix& m, const std::string& what) {
  if (!m.allFinite()) throw DataError(what + " contains non-finite values");
}

Matrix checked_symmetric(Matrix k, const std::string& what) {
  if (k.rows() != k.cols()) throw ShapeError(what + " is not square (" + dims(k) + ")");
  require_finite(k, what);
  const double defect = (k - k.transpose()).cwiseAbs().maxCoeff();
  if (defect > kSymmetryTolerance) {
    std::ostringstream msg;
    msg << what << " is not symmetric (max defect " << defect << ")";
    throw DataError(msg.str());
  }
  Matrix sym = 0.5 * (k + k.transpose());
  return sym;
}

double rayleigh_power(const Matrix& m, int iterations) {
  const Index n = m.rows();
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = 1.0 + 0.01 * static_cast<double>(i % 7);
  v.normalize();
  double estimate = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Vector w = m * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    estimate = v.dot(w);
    v = w / norm;
  }
  return estimate;
}

}  // namespace

KernelBundle::KernelBundle(std::vector<Matrix> matrices, std::vector<std::string> names) {
  if (!names.empty() && names.size() != matrices.size()) {
    throw ShapeError("kernel bundle: " + std::to_string(names.size()) + " names for " +
                     std::to_string(matrices.size()) + " matrices");
  }
  for (std::size_t m = 0; m < matrices.size(); ++m) {
    add(std::move(matrices[m]), names.empty() ? std::string{} : std::move(names[m]));
  }
}

void KernelBundle::add(Matrix kernel, std::string name) {
  if (name.empty()) name = "k" + std::to_string(matrices_.size() + 1);
  Matrix sym = checked_symmetric(std::move(kernel), "kernel '" + name + "'");
  if (!matrices_.empty() && sym.rows() != matrices_.front().rows()) {
    throw ShapeError("kernel '" + name + "' is " + dims(sym) + ", bundle is " +
                     dims(matrices_.front()));
  }
  matrices_.push_back(std::move(sym));
  names_.push_back(std::move(name));
  cache_ = std::make_shared<GramCache>();
}

Index KernelBundle::dimension() const {
  return matrices_.empty() ? 0 : matrices_.front().rows();
}

const Matrix& KernelBundle::gram_sum() const {
  auto& cache = *cache_;
  std::call_once(cache.once, [&] {
    const Index n = dimension();
    cache.value = Matrix::Zero(n, n);
    for (const auto& k : matrices_) cache.value.noalias() += k * k.transpose();
  });
  return cache.value;
}

KernelBundle KernelBundle::subset(std::span<const Index> objects) const {
  KernelBundle out;
  const auto idx = std::vector<Index>(objects.begin(), objects.end());
  for (std::size_t m = 0; m < matrices_.size(); ++m) {
    out.add(matrices_[m](idx, idx), names_[m]);
  }
  return out;
}

CrossKernelBundle::CrossKernelBundle(std::vector<Matrix> matrices)
    : matrices_(std::move(matrices)) {
  for (std::size_t m = 0; m < matrices_.size(); ++m) {
    const auto what = "cross kernel " + std::to_string(m + 1);
    require_finite(matrices_[m], what);
    if (matrices_[m].rows() != matrices_.front().rows() ||
        matrices_[m].cols() != matrices_.front().cols()) {
      throw ShapeError(what + " is " + dims(matrices_[m]) + ", expected " +
                       dims(matrices_.front()));
    }
  }
}

Index CrossKernelBundle::train_count() const {
  return matrices_.empty() ? 0 : matrices_.front().rows();
}

Index CrossKernelBundle::test_count() const {
  return matrices_.empty() ? 0 : matrices_.front().cols();
}

CrossKernelBundle CrossKernelBundle::slice(const KernelBundle& full,
                                           std::span<const Index> train,
                                           std::span<const Index> test) {
  const auto rows = std::vector<Index>(train.begin(), train.end());
  const auto cols = std::vector<Index>(test.begin(), test.end());
  std::vector<Matrix> out;
  out.reserve(full.size());
  for (const auto& k : full.matrices()) out.emplace_back(k(rows, cols));
  return CrossKernelBundle(std::move(out));
}

Matrix gaussian_kernel(const Matrix& x1, const Matrix& x2, double width) {
  if (x1.rows() != x2.rows()) {
    throw ShapeError("gaussian_kernel: feature dimensions differ (" + std::to_string(x1.rows()) +
                     " vs " + std::to_string(x2.rows()) + ")");
  }
  if (!(width > 0.0) || !std::isfinite(width)) {
    throw ParameterError("gaussian_kernel: width must be positive");
  }
  require_finite(x1, "gaussian_kernel input");
  require_finite(x2, "gaussian_kernel input");
  const double scale = -1.0 / (2.0 * width * width);
  Matrix k(x1.cols(), x2.cols());
  for (Index j = 0; j < x2.cols(); ++j) {
    for (Index i = 0; i < x1.cols(); ++i) {
      k(i, j) = std::exp((x1.col(i) - x2.col(j)).squaredNorm() * scale);
    }
  }
  return k;
}

KernelBundle per_feature_linear_kernels(const Matrix& x) {
  if (x.rows() < 1 || x.cols() < 1) throw ShapeError("per_feature_linear_kernels: empty features");
  require_finite(x, "feature matrix");
  KernelBundle bundle;
  for (Index m = 0; m < x.rows(); ++m) {
    const Vector row = x.row(m).transpose();
    bundle.add(row * row.transpose(), "feature" + std::to_string(m + 1));
  }
  return bundle;
}

Matrix jaccard_kernel(const Matrix& profiles) {
  require_finite(profiles, "jaccard_kernel profiles");
  const Index n = profiles.cols();
  const Matrix support = (profiles.array() != 0.0).cast<double>().matrix();
  const Matrix both = support.transpose() * support;
  const Vector counts = support.colwise().sum().transpose();
  Matrix out(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index k = 0; k < n; ++k) {
      const double uni = counts(j) + counts(k) - both(j, k);
      out(j, k) = uni == 0.0 ? 1.0 : both(j, k) / uni;
    }
  }
  return out;
}

bool ValidationReport::all_finite() const {
  return std::all_of(matrices.begin(), matrices.end(),
                     [](const MatrixValidation& v) { return v.nan_count == 0; });
}

bool ValidationReport::all_symmetric(double tolerance) const {
  return std::all_of(matrices.begin(), matrices.end(), [tolerance](const MatrixValidation& v) {
    return v.symmetry_defect <= tolerance;
  });
}

ValidationReport validate_matrices(std::span<const Matrix> matrices) {
  constexpr int kIterations = 500;
  ValidationReport report;
  for (const auto& k : matrices) {
    MatrixValidation v;
    v.nan_count = static_cast<std::size_t>((!k.array().isFinite()).count());
    if (k.rows() != k.cols()) {
      v.symmetry_defect = std::numeric_limits<double>::infinity();
      v.min_eigenvalue = v.max_eigenvalue = std::numeric_limits<double>::quiet_NaN();
      report.matrices.push_back(v);
      continue;
    }
    if (v.nan_count > 0 || k.size() == 0) {
      v.symmetry_defect = k.size() == 0 ? 0.0 : std::numeric_limits<double>::quiet_NaN();
      v.min_eigenvalue = v.max_eigenvalue = std::numeric_limits<double>::quiet_NaN();
      report.matrices.push_back(v);
      continue;
    }
    v.symmetry_defect = (k - k.transpose()).cwiseAbs().maxCoeff();
    const Matrix sym = 0.5 * (k + k.transpose());
    const Index n = sym.rows();
    // Shift by the spectral radius bound so both ends of the spectrum become
    // dominant eigenvalues of a PSD matrix.
    const double radius = sym.cwiseAbs().rowwise().sum().maxCoeff();
    const Matrix identity = Matrix::Identity(n, n);
    v.max_eigenvalue = rayleigh_power(sym + radius * identity, kIterations) - radius;
    v.min_eigenvalue =
        v.max_eigenvalue - rayleigh_power(v.max_eigenvalue * identity - sym, kIterations);
    report.matrices.push_back(v);
  }
  return report;
}

ValidationReport validate_bundle(const KernelBundle& bundle) {
  return validate_matrices(bundle.matrices());
}

}  // namespace kbmf
