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

#include "kbmf/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "kbmf/errors.hpp"
#include "kbmf/matrix_io.hpp"
#include "kbmf/metrics.hpp"
#include "kbmf/predict.hpp"
#include "kbmf/rng.hpp"

namespace kbmf {
namespace {

// Runs job(0..count-1) on a bounded pool. Each job writes only its own slot.
template <typename Job>
void run_jobs(std::size_t count, int threads, Job&& job) {
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                    : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) job(i);
    });
  }
}

bool all_plus_minus_one(const Matrix& y) {
  return (y.array().abs() == 1.0).all();
}

EvalReport run_rows(const KernelBundle& kx, const KernelBundle& kz, const Matrix& y,
                    const CvOptions& options, const CellPredictor& predictor) {
  const SplitPlan& plan = options.plan;
  if (static_cast<Index>(plan.assignments.empty() ? 0 : plan.assignments.front().size()) !=
      kx.dimension()) {
    throw ShapeError("split plan does not cover the held-out axis");
  }
  const bool binary_targets = all_plus_minus_one(y);
  const bool binary_model = is_binary(options.variant);

  EvalReport report;
  if (binary_model || binary_targets) report.metric_names = {"auc", "baseline_auc"};
  if (!binary_model) {
    report.metric_names.insert(report.metric_names.begin(), {"rmse", "baseline_rmse"});
  }

  struct Job {
    int replication;
    int fold;
    int rank;
  };
  std::vector<Job> jobs;
  for (const int rank : options.ranks) {
    for (int rep = 0; rep < plan.replications; ++rep) {
      for (int fold = 0; fold < plan.folds; ++fold) jobs.push_back({rep, fold, rank});
    }
  }
  report.cells.resize(jobs.size());

  const CellPredictor predict = predictor ? predictor : CellPredictor(kbmf_cell_predictor);
  run_jobs(jobs.size(), options.threads, [&](std::size_t index) {
    const Job& job = jobs[index];
    EvalCell& out = report.cells[index];
    out.replication = job.replication;
    out.fold = job.fold;
    out.rank = job.rank;
    try {
      CvCell cell;
      cell.replication = job.replication;
      cell.fold = job.fold;
      cell.rank = job.rank;
      cell.train = plan.train_indices(job.replication, job.fold);
      cell.test = plan.test_indices(job.replication, job.fold);
      cell.kx_train = kx.subset(cell.train);
      cell.cross_x = CrossKernelBundle::slice(kx, cell.train, cell.test);
      cell.y_train = y(cell.train, Eigen::all);
      cell.y_test = y(cell.test, Eigen::all);
      cell.kz = kz;
      if (options.network_kernel_z) {
        const Matrix profiles = (cell.y_train.array() > 0.0).cast<double>().matrix();
        cell.kz.add(jaccard_kernel(profiles), "network");
      }
      cell.hp = options.hp;
      cell.hp.rank = job.rank;
      cell.variant = options.variant;

      const Matrix scores = predict(cell);
      if (scores.rows() != cell.y_test.rows() || scores.cols() != cell.y_test.cols()) {
        throw ShapeError("cell predictor returned a matrix of the wrong shape");
      }
      const Matrix base = baseline_predict(cell.y_train, static_cast<Index>(cell.test.size()));
      if (!binary_model) {
        out.values["rmse"] = rmse(scores, cell.y_test);
        out.values["baseline_rmse"] = rmse(base, cell.y_test);
      }
      if (binary_model || binary_targets) {
        out.values["auc"] = auc(scores, cell.y_test);
        out.values["baseline_auc"] = auc(base, cell.y_test);
      }
    } catch (const std::exception& err) {
      out.ok = false;
      out.error = err.what();
      out.values.clear();
    }
  });
  return report;
}

}  // namespace

std::vector<Index> SplitPlan::test_indices(int replication, int fold) const {
  std::vector<Index> out;
  const auto& a = assignments.at(static_cast<std::size_t>(replication));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == fold) out.push_back(static_cast<Index>(i));
  }
  return out;
}

std::vector<Index> SplitPlan::train_indices(int replication, int fold) const {
  std::vector<Index> out;
  const auto& a = assignments.at(static_cast<std::size_t>(replication));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != fold) out.push_back(static_cast<Index>(i));
  }
  return out;
}

SplitPlan make_splits(Index n, int folds, int replications, std::uint64_t seed, SplitAxis axis) {
  if (folds < 2) throw ParameterError("make_splits: need at least 2 folds");
  if (replications < 1) throw ParameterError("make_splits: need at least 1 replication");
  if (n < folds) {
    throw ParameterError("make_splits: " + std::to_string(n) + " objects cannot fill " +
                         std::to_string(folds) + " folds");
  }
  SplitPlan plan;
  plan.replications = replications;
  plan.folds = folds;
  plan.axis = axis;
  plan.seed = seed;
  const CounterRng root(seed);
  for (int rep = 0; rep < replications; ++rep) {
    auto rng = root.split(static_cast<std::uint64_t>(rep));
    std::vector<std::int64_t> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), std::int64_t{0});
    shuffle(order, rng);
    std::vector<int> assignment(static_cast<std::size_t>(n));
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      assignment[static_cast<std::size_t>(order[pos])] = static_cast<int>(pos % static_cast<std::size_t>(folds));
    }
    plan.assignments.push_back(std::move(assignment));
  }
  return plan;
}

Matrix baseline_predict(const Matrix& y_train, Index heldout_count, SplitAxis axis) {
  if (axis == SplitAxis::Rows) {
    if (y_train.rows() == 0) throw ParameterError("baseline_predict: no training rows");
    const Eigen::RowVectorXd means = y_train.colwise().mean();
    return means.replicate(heldout_count, 1);
  }
  if (y_train.cols() == 0) throw ParameterError("baseline_predict: no training columns");
  const Vector means = y_train.rowwise().mean();
  return means.replicate(1, heldout_count);
}

std::vector<MetricAggregate> EvalReport::aggregate() const {
  std::set<int> ranks;
  for (const auto& c : cells) ranks.insert(c.rank);
  std::vector<MetricAggregate> out;
  for (const int rank : ranks) {
    for (const auto& metric : metric_names) {
      MetricAggregate agg;
      agg.rank = rank;
      agg.metric = metric;
      std::vector<double> values;
      for (const auto& c : cells) {
        if (c.rank != rank) continue;
        const auto it = c.values.find(metric);
        if (!c.ok || it == c.values.end()) {
          ++agg.failed;
          continue;
        }
        values.push_back(it->second);
      }
      agg.count = static_cast<int>(values.size());
      if (!values.empty()) {
        double sum = 0.0;
        for (const double v : values) sum += v;
        agg.mean = sum / static_cast<double>(values.size());
        if (values.size() > 1) {
          double ss = 0.0;
          for (const double v : values) ss += (v - agg.mean) * (v - agg.mean);
          agg.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
        }
      } else {
        agg.mean = std::numeric_limits<double>::quiet_NaN();
      }
      out.push_back(std::move(agg));
    }
  }
  return out;
}

Matrix kbmf_cell_predictor(const CvCell& cell) {
  const Model model = train(cell.kx_train, cell.kz, cell.y_train, cell.hp, cell.variant);
  const auto pred = predict_matrix(model, &cell.cross_x, nullptr);
  return pred.p_positive ? *pred.p_positive : pred.f_mean;
}

EvalReport run_cv_experiment(const KernelBundle& kx, const KernelBundle& kz, const Matrix& y,
                             const CvOptions& options, const CellPredictor& predictor) {
  if (options.ranks.empty()) throw ParameterError("run_cv_experiment: empty rank grid");
  if (y.rows() != kx.dimension() || y.cols() != kz.dimension()) {
    throw ShapeError("run_cv_experiment: targets do not match the kernel dimensions");
  }
  if (options.plan.axis == SplitAxis::Rows) {
    return run_rows(kx, kz, y, options, predictor);
  }
  // Holding out columns is holding out rows of the transposed problem.
  return run_rows(kz, kx, y.transpose(), options, predictor);
}

std::vector<double> multilabel_widths(Index feature_dimension) {
  const auto d = static_cast<double>(feature_dimension);
  return {std::sqrt(d / 4.0), std::sqrt(d / 2.0), std::sqrt(d), std::sqrt(2.0 * d),
          std::sqrt(4.0 * d)};
}

MultilabelResult run_multilabel(const Matrix& x_train, const Matrix& x_test,
                                const Matrix& labels_train, const Matrix& labels_test,
                                const MultilabelOptions& options) {
  if (x_train.rows() != x_test.rows()) {
    throw ShapeError("run_multilabel: train and test features differ in dimension");
  }
  if (labels_train.cols() != x_train.cols()) {
    throw ShapeError("run_multilabel: training labels do not match training samples");
  }
  if (labels_test.size() != 0 &&
      (labels_test.cols() != x_test.cols() || labels_test.rows() != labels_train.rows())) {
    throw ShapeError("run_multilabel: test labels do not match test samples");
  }
  if (!all_plus_minus_one(labels_train)) {
    throw DataError("run_multilabel: labels must be -1/+1");
  }
  const Index label_count = labels_train.rows();
  const int max_rank = static_cast<int>(std::min<Index>(label_count, options.max_rank));
  if (max_rank < 1) throw ParameterError("run_multilabel: no labels");

  MultilabelResult result;
  KernelBundle samples;
  std::vector<Matrix> cross;
  const auto widths = multilabel_widths(x_train.rows());
  for (std::size_t w = 0; w < widths.size(); ++w) {
    samples.add(gaussian_kernel(x_train, x_train, widths[w]), "gaussian" + std::to_string(w + 1));
    cross.push_back(gaussian_kernel(x_train, x_test, widths[w]));
  }
  const CrossKernelBundle cross_test(std::move(cross));
  const CrossKernelBundle cross_train(samples.matrices());

  const Matrix y = labels_train.transpose();  // samples x labels
  const Matrix memberships = (y.array() > 0.0).cast<double>().matrix();
  for (Index l = 0; l < label_count; ++l) {
    if (memberships.col(l).sum() == 0.0) {
      result.warnings.push_back("label " + std::to_string(l + 1) +
                                " has no positive training samples");
    }
  }
  const KernelBundle labels(std::vector<Matrix>{jaccard_kernel(memberships)}, {"jaccard"});

  auto threshold = [](const ScorePrediction& p) {
    return Matrix((p.p_positive->array() >= 0.5).select(Matrix::Ones(p.f_mean.rows(), p.f_mean.cols()),
                                                        -Matrix::Ones(p.f_mean.rows(), p.f_mean.cols())));
  };

  std::vector<Model> models(static_cast<std::size_t>(max_rank));
  run_jobs(models.size(), options.threads, [&](std::size_t i) {
    HyperParams hp = options.hp;
    hp.rank = static_cast<int>(i) + 1;
    models[i] = train(samples, labels, y, hp, Variant::MklBinary);
  });

  result.report.metric_names = {"train_hamming", "test_hamming", "baseline_hamming"};
  double best = std::numeric_limits<double>::infinity();
  for (int rank = 1; rank <= max_rank; ++rank) {
    const Model& model = models[static_cast<std::size_t>(rank - 1)];
    const auto fitted = predict_matrix(model, &cross_train, nullptr);
    const double loss = hamming_loss(threshold(fitted), y);
    result.train_hamming.push_back(loss);
    EvalCell cell;
    cell.rank = rank;
    cell.values["train_hamming"] = loss;
    result.report.cells.push_back(std::move(cell));
    if (loss < best) {
      best = loss;
      result.selected_rank = rank;
    }
  }

  const Model& chosen = models[static_cast<std::size_t>(result.selected_rank - 1)];
  result.predicted = threshold(predict_matrix(chosen, &cross_test, nullptr)).transpose();

  if (labels_test.size() != 0) {
    // Majority class per label on the training samples, ties to negative.
    Matrix majority(labels_test.rows(), labels_test.cols());
    for (Index l = 0; l < label_count; ++l) {
      const double positives = memberships.col(l).sum();
      const double sign = positives > 0.5 * static_cast<double>(y.rows()) ? 1.0 : -1.0;
      majority.row(l).setConstant(sign);
    }
    result.test_hamming = hamming_loss(result.predicted, labels_test);
    result.baseline_hamming = hamming_loss(majority, labels_test);
    auto& selected = result.report.cells[static_cast<std::size_t>(result.selected_rank - 1)];
    selected.values["test_hamming"] = result.test_hamming;
    selected.values["baseline_hamming"] = result.baseline_hamming;
  }
  return result;
}

Matrix retrieval_similarity(const Model& model, const KernelBundle& kx, RetrievalMetric metric) {
  const auto& d = model.state.x;
  if (metric == RetrievalMetric::LatentInnerProduct) return d.h_mean.transpose() * d.h_mean;
  if (kx.dimension() != d.objects()) {
    throw ShapeError("retrieval_similarity: kernels do not match the model");
  }
  if (!d.multi_kernel) return kx[0];
  if (kx.size() != d.kernels()) throw ShapeError("retrieval_similarity: kernel count mismatch");
  Matrix out = Matrix::Zero(d.objects(), d.objects());
  for (std::size_t m = 0; m < kx.size(); ++m) out += d.e_mean(static_cast<Index>(m)) * kx[m];
  return out;
}

std::string report_to_csv(const EvalReport& report) {
  std::string out = "replication,fold,rank,status";
  for (const auto& name : report.metric_names) out += "," + name;
  out += ",message\n";
  for (const auto& c : report.cells) {
    out += std::to_string(c.replication) + "," + std::to_string(c.fold) + "," +
           std::to_string(c.rank) + "," + (c.ok ? "ok" : "failed");
    for (const auto& name : report.metric_names) {
      out += ",";
      const auto it = c.values.find(name);
      if (it != c.values.end()) out += format_double(it->second);
    }
    std::string message = c.error;
    std::replace(message.begin(), message.end(), ',', ';');
    std::replace(message.begin(), message.end(), '\n', ' ');
    out += "," + message + "\n";
  }
  return out;
}

EvalReport report_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw DataError("report: empty file");
  auto split = [](const std::string& s) {
    std::vector<std::string> parts;
    std::string cur;
    for (const char ch : s) {
      if (ch == ',') {
        parts.push_back(cur);
        cur.clear();
      } else if (ch != '\r') {
        cur += ch;
      }
    }
    parts.push_back(cur);
    return parts;
  };
  const auto header = split(line);
  if (header.size() < 5 || header[0] != "replication" || header[1] != "fold" ||
      header[2] != "rank" || header[3] != "status" || header.back() != "message") {
    throw DataError("report: unexpected header");
  }
  EvalReport report;
  report.metric_names.assign(header.begin() + 4, header.end() - 1);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto parts = split(line);
    if (parts.size() != header.size()) throw DataError("report: ragged row");
    EvalCell c;
    c.replication = std::stoi(parts[0]);
    c.fold = std::stoi(parts[1]);
    c.rank = std::stoi(parts[2]);
    c.ok = parts[3] == "ok";
    for (std::size_t m = 0; m < report.metric_names.size(); ++m) {
      if (!parts[4 + m].empty()) c.values[report.metric_names[m]] = parse_double(parts[4 + m]);
    }
    c.error = parts.back();
    report.cells.push_back(std::move(c));
  }
  return report;
}

std::string report_summary_json(const EvalReport& report) {
  nlohmann::ordered_json doc;
  doc["cells"] = report.cells.size();
  doc["failed_cells"] = std::count_if(report.cells.begin(), report.cells.end(),
                                      [](const EvalCell& c) { return !c.ok; });
  auto configs = nlohmann::ordered_json::array();
  for (const auto& agg : report.aggregate()) {
    nlohmann::ordered_json entry;
    entry["rank"] = agg.rank;
    entry["metric"] = agg.metric;
    if (agg.count > 0) {
      entry["mean"] = agg.mean;
      entry["std"] = agg.std;
    } else {
      entry["mean"] = nullptr;
      entry["std"] = nullptr;
    }
    entry["count"] = agg.count;
    entry["failed"] = agg.failed;
    configs.push_back(std::move(entry));
  }
  doc["configurations"] = std::move(configs);
  return doc.dump(2) + "\n";
}

std::string report_chart_svg(const EvalReport& report) {
  constexpr double kWidth = 640.0;
  constexpr double kHeight = 400.0;
  constexpr double kMargin = 50.0;
  const auto aggs = report.aggregate();
  std::set<int> rank_set;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& a : aggs) {
    if (a.count == 0) continue;
    rank_set.insert(a.rank);
    lo = std::min(lo, a.mean);
    hi = std::max(hi, a.mean);
  }
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (rank_set.empty()) {
    svg << "</svg>\n";
    return svg.str();
  }
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const std::vector<int> ranks(rank_set.begin(), rank_set.end());
  const auto x_of = [&](int rank) {
    if (ranks.size() == 1) return kWidth / 2.0;
    const double t = static_cast<double>(rank - ranks.front()) / (ranks.back() - ranks.front());
    return kMargin + t * (kWidth - 2.0 * kMargin);
  };
  const auto y_of = [&](double v) {
    return kHeight - kMargin - (v - lo) / (hi - lo) * (kHeight - 2.0 * kMargin);
  };
  svg << "<line x1=\"" << kMargin << "\" y1=\"" << kHeight - kMargin << "\" x2=\""
      << kWidth - kMargin << "\" y2=\"" << kHeight - kMargin << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << kMargin << "\" y1=\"" << kMargin << "\" x2=\"" << kMargin
      << "\" y2=\"" << kHeight - kMargin << "\" stroke=\"black\"/>\n";
  for (const int r : ranks) {
    svg << "<text x=\"" << x_of(r) << "\" y=\"" << kHeight - kMargin + 18
        << "\" font-size=\"11\" text-anchor=\"middle\">" << r << "</text>\n";
  }
  svg << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 8
      << "\" font-size=\"12\" text-anchor=\"middle\">R</text>\n";
  svg << "<text x=\"8\" y=\"" << y_of(hi) << "\" font-size=\"11\">" << format_double(hi)
      << "</text>\n";
  svg << "<text x=\"8\" y=\"" << y_of(lo) << "\" font-size=\"11\">" << format_double(lo)
      << "</text>\n";
  const char* colors[] = {"#1f77b4", "#7f7f7f", "#d62728", "#2ca02c", "#9467bd"};
  std::size_t series = 0;
  for (const auto& metric : report.metric_names) {
    std::ostringstream points;
    for (const auto& a : aggs) {
      if (a.metric == metric && a.count > 0) points << x_of(a.rank) << "," << y_of(a.mean) << " ";
    }
    const char* color = colors[series % std::size(colors)];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\""
        << points.str() << "\"/>\n";
    svg << "<text x=\"" << kWidth - kMargin - 120 << "\" y=\"" << kMargin + 14.0 * series
        << "\" font-size=\"11\" fill=\"" << color << "\">" << metric << "</text>\n";
    ++series;
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace kbmf
