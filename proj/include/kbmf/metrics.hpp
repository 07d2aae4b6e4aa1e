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

#include <cstdint>
#include <span>

#include "kbmf/kernel_ops.hpp"

namespace kbmf {

/// Area under the ROC curve as the Mann-Whitney statistic; tied scores
/// count one half. Labels are +-1 (any positive value is positive).
/// Throws EvaluationError when only one class is present.
double auc(std::span<const double> scores, std::span<const double> labels);
double auc(const Matrix& scores, const Matrix& labels);

double rmse(std::span<const double> predicted, std::span<const double> target);
double rmse(const Matrix& predicted, const Matrix& target);

/// Fraction of (sample, label) cells where the signs of the two matrices
/// disagree (values > 0 are positive).
double hamming_loss(const Matrix& predicted, const Matrix& truth);

/// Mean precision at k when every object queries all others, ranked by
/// descending similarity with ties broken by ascending index.
double precision_at_k(const Matrix& similarity, std::span<const std::int64_t> classes, int k);

}  // namespace kbmf
