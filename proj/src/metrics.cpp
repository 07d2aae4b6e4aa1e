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

#include "kbmf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "kbmf/errors.hpp"

namespace kbmf {
namespace {

std::span<const double> flat(const Matrix& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}

}  // namespace

double auc(std::span<const double> scores, std::span<const double> labels) {
  if (scores.size() != labels.size()) throw ShapeError("auc: scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum of midranks of the positives.
  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t start = 0; start < order.size();) {
    std::size_t end = start;
    while (end < order.size() && scores[order[end]] == scores[order[start]]) ++end;
    const double midrank = 0.5 * static_cast<double>(start + end + 1);
    for (std::size_t i = start; i < end; ++i) {
      if (labels[order[i]] > 0.0) {
        positive_rank_sum += midrank;
        ++positives;
      }
    }
    start = end;
  }
  const std::size_t negatives = scores.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw EvaluationError("auc: both classes must be present");
  }
  const auto np = static_cast<double>(positives);
  const auto nn = static_cast<double>(negatives);
  return (positive_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

double auc(const Matrix& scores, const Matrix& labels) {
  if (scores.rows() != labels.rows() || scores.cols() != labels.cols()) {
    throw ShapeError("auc: score and label matrices differ in shape");
  }
  return auc(flat(scores), flat(labels));
}

double rmse(std::span<const double> predicted, std::span<const double> target) {
  if (predicted.size() != target.size() || predicted.empty()) {
    throw ShapeError("rmse: inputs must be non-empty and of equal length");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double d = predicted[i] - target[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(predicted.size()));
}

double rmse(const Matrix& predicted, const Matrix& target) {
  if (predicted.rows() != target.rows() || predicted.cols() != target.cols()) {
    throw ShapeError("rmse: matrices differ in shape");
  }
  return rmse(flat(predicted), flat(target));
}

double hamming_loss(const Matrix& predicted, const Matrix& truth) {
  if (predicted.rows() != truth.rows() || predicted.cols() != truth.cols() || truth.size() == 0) {
    throw ShapeError("hamming_loss: matrices must be non-empty and equal in shape");
  }
  const auto mismatches = ((predicted.array() > 0.0) != (truth.array() > 0.0)).count();
  return static_cast<double>(mismatches) / static_cast<double>(truth.size());
}

double precision_at_k(const Matrix& similarity, std::span<const std::int64_t> classes, int k) {
  const Index n = similarity.rows();
  if (similarity.cols() != n || static_cast<Index>(classes.size()) != n) {
    throw ShapeError("precision_at_k: similarity must be N x N with N class ids");
  }
  if (k < 1 || k >= n) throw ParameterError("precision_at_k: k must satisfy 1 <= k < N");

  double total = 0.0;
  std::vector<Index> others;
  others.reserve(static_cast<std::size_t>(n));
  for (Index q = 0; q < n; ++q) {
    others.clear();
    for (Index j = 0; j < n; ++j) {
      if (j != q) others.push_back(j);
    }
    std::partial_sort(others.begin(), others.begin() + k, others.end(), [&](Index a, Index b) {
      if (similarity(q, a) != similarity(q, b)) return similarity(q, a) > similarity(q, b);
      return a < b;
    });
    int hits = 0;
    for (int t = 0; t < k; ++t) {
      if (classes[static_cast<std::size_t>(others[static_cast<std::size_t>(t)])] ==
          classes[static_cast<std::size_t>(q)]) {
        ++hits;
      }
    }
    total += static_cast<double>(hits) / k;
  }
  return total / static_cast<double>(n);
}

}  // namespace kbmf
