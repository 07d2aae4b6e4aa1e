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
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kbmf/engine.hpp"

namespace kbmf {

enum class SplitAxis { Rows, Columns };

/// Fold assignments for repeated k-fold cross-validation.
struct SplitPlan {
  int replications = 5;
  int folds = 5;
  SplitAxis axis = SplitAxis::Rows;
  std::uint64_t seed = 0;
  std::vector<std::vector<int>> assignments;  ///< [replication][object] -> fold

  [[nodiscard]] std::vector<Index> test_indices(int replication, int fold) const;
  [[nodiscard]] std::vector<Index> train_indices(int replication, int fold) const;
};

/// Shuffles 0..n-1 once per replication and deals the permutation into
/// folds round-robin, so fold sizes differ by at most one.
SplitPlan make_splits(Index n, int folds, int replications, std::uint64_t seed,
                      SplitAxis axis = SplitAxis::Rows);

/// Averages the observed training targets along the held-out axis: with
/// rows held out, every held-out row gets the column means of y_train.
Matrix baseline_predict(const Matrix& y_train, Index heldout_count,
                        SplitAxis axis = SplitAxis::Rows);

struct EvalCell {
  int replication = 0;
  int fold = 0;
  int rank = 0;
  bool ok = true;
  std::string error;
  std::map<std::string, double> values;
};

struct MetricAggregate {
  int rank = 0;
  std::string metric;
  double mean = 0.0;
  double std = 0.0;  ///< sample standard deviation, 0 for a single value
  int count = 0;
  int failed = 0;
};

struct EvalReport {
  std::vector<std::string> metric_names;
  std::vector<EvalCell> cells;

  /// One entry per (rank, metric), ranks ascending, metrics in metric_names order.
  [[nodiscard]] std::vector<MetricAggregate> aggregate() const;
};

/// Data handed to a cell predictor: training block plus held-out objects.
struct CvCell {
  int replication = 0;
  int fold = 0;
  int rank = 0;
  std::vector<Index> train;
  std::vector<Index> test;
  KernelBundle kx_train;
  CrossKernelBundle cross_x;  ///< train x test slices of the x kernels
  KernelBundle kz;
  Matrix y_train;
  Matrix y_test;
  HyperParams hp;
  Variant variant = Variant::MklBinary;
};

/// Returns scores for the held-out block (|test| x N_z). Larger means
/// more likely positive for binary targets.
using CellPredictor = std::function<Matrix(const CvCell&)>;

struct CvOptions {
  Variant variant = Variant::MklBinary;
  HyperParams hp;
  std::vector<int> ranks{5};
  SplitPlan plan;
  int threads = 0;                ///< 0 = hardware concurrency
  bool network_kernel_z = false;  ///< add a Jaccard kernel over training interactions to z
};

/// Default predictor: fit on the training rows, project the held-out rows,
/// and return p(+1) (binary) or the predicted mean (regression).
Matrix kbmf_cell_predictor(const CvCell& cell);

/// Repeated cross-validation over the plan's axis for every rank.
/// Failed cells are recorded with their error, never imputed.
EvalReport run_cv_experiment(const KernelBundle& kx, const KernelBundle& kz, const Matrix& y,
                             const CvOptions& options, const CellPredictor& predictor = {});

struct MultilabelOptions {
  HyperParams hp;
  int max_rank = 15;
  int threads = 0;
};

struct MultilabelResult {
  EvalReport report;
  int selected_rank = 0;
  std::vector<double> train_hamming;  ///< indexed by rank - 1
  Matrix predicted;                   ///< L x N_test, +-1
  double test_hamming = 0.0;
  double baseline_hamming = 0.0;      ///< per-label majority class
  std::vector<std::string> warnings;
};

/// Multilabel learning as matrix factorization with samples as rows and
/// labels as columns. Samples use five Gaussian kernels with widths
/// sqrt(D/4), sqrt(D/2), sqrt(D), sqrt(2D), sqrt(4D); labels use a Jaccard
/// kernel over training memberships. R runs over 1..min(L, max_rank) and
/// is chosen by training Hamming loss (ties to the smaller R).
///
/// Features are D x N; labels are L x N in {-1,+1}. labels_test may be
/// empty, in which case only predictions are produced.
MultilabelResult run_multilabel(const Matrix& x_train, const Matrix& x_test,
                                const Matrix& labels_train, const Matrix& labels_test,
                                const MultilabelOptions& options);

/// The five sample kernels used by run_multilabel.
std::vector<double> multilabel_widths(Index feature_dimension);

enum class RetrievalMetric {
  LatentInnerProduct,  ///< mu(h_i)^T mu(h_j) from the fitted model
  CombinedKernel,      ///< sum_m mu(e)_m K_m
};

/// Similarity between the training objects of domain x for retrieval.
Matrix retrieval_similarity(const Model& model, const KernelBundle& kx, RetrievalMetric metric);

// --- report persistence ---------------------------------------------------

/// One row per cell: replication,fold,rank,status,<metrics...>,message.
std::string report_to_csv(const EvalReport& report);
EvalReport report_from_csv(const std::string& text);
/// Per-configuration mean/std as a JSON document.
std::string report_summary_json(const EvalReport& report);
/// Line chart of the mean of each metric against R.
std::string report_chart_svg(const EvalReport& report);

}  // namespace kbmf
