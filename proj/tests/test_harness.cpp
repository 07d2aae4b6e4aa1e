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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "doctest.h"
#include "fixtures.hpp"
#include "json.hpp"
#include "kbmf/errors.hpp"
#include "kbmf/harness.hpp"
#include "kbmf/metrics.hpp"
#include "kbmf/toy.hpp"

using kbmf::EvalReport;
using kbmf::Index;
using kbmf::Matrix;
using kbmf::Variant;

namespace {

/// Counts, over all pairs, how often a positive outranks a negative.
double pairwise_auc(const std::vector<double>& s, const std::vector<double>& y) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[i] > 0 && y[j] < 0) {
        pairs += 1.0;
        wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
      }
    }
  }
  return wins / pairs;
}

/// Ranks all candidates for every query by full sort.
double brute_precision(const Matrix& sim, const std::vector<std::int64_t>& cls, int k) {
  const Index n = sim.rows();
  double total = 0.0;
  for (Index q = 0; q < n; ++q) {
    std::vector<std::pair<double, Index>> cand;
    for (Index j = 0; j < n; ++j) {
      if (j != q) cand.emplace_back(-sim(q, j), j);
    }
    std::sort(cand.begin(), cand.end());
    int hits = 0;
    for (int t = 0; t < k; ++t) hits += cls[static_cast<std::size_t>(cand[static_cast<std::size_t>(t)].second)] == cls[static_cast<std::size_t>(q)];
    total += static_cast<double>(hits) / k;
  }
  return total / static_cast<double>(n);
}

kbmf::CvOptions cv_options(Index n, int folds, int reps, std::uint64_t seed) {
  kbmf::CvOptions opt;
  opt.plan = kbmf::make_splits(n, folds, reps, seed);
  opt.hp.max_iter = 20;
  opt.ranks = {2};
  opt.threads = 2;
  return opt;
}

}  // namespace

TEST_SUITE("eval-harness") {

TEST_CASE("splits: five folds of two") {
  const auto plan = kbmf::make_splits(10, 5, 1, 3);
  for (int f = 0; f < 5; ++f) CHECK(plan.test_indices(0, f).size() == 2);
}

TEST_CASE("splits: cell count and determinism") {
  const auto plan = kbmf::make_splits(445, 5, 5, 7);
  int cells = 0;
  for (int r = 0; r < plan.replications; ++r) {
    for (int f = 0; f < plan.folds; ++f) ++cells;
  }
  CHECK(cells == 25);
  CHECK(plan.assignments.size() == 5);
  CHECK(kbmf::make_splits(445, 5, 5, 7).assignments == plan.assignments);
  CHECK(kbmf::make_splits(445, 5, 5, 8).assignments != plan.assignments);
}

TEST_CASE("splits: every object once, folds balanced") {
  kbmf::CounterRng rng(71);
  for (int t = 0; t < 30; ++t) {
    const int folds = fixtures::uniform_int(rng, 2, 9);
    const Index n = fixtures::uniform_int(rng, folds, 80);
    const auto plan = kbmf::make_splits(n, folds, 3, rng.next_u64());
    for (int r = 0; r < 3; ++r) {
      std::vector<int> seen(static_cast<std::size_t>(n), 0);
      std::size_t lo = SIZE_MAX, hi = 0;
      for (int f = 0; f < folds; ++f) {
        const auto test = plan.test_indices(r, f);
        const auto train = plan.train_indices(r, f);
        CHECK(test.size() + train.size() == static_cast<std::size_t>(n));
        lo = std::min(lo, test.size());
        hi = std::max(hi, test.size());
        for (Index i : test) ++seen[static_cast<std::size_t>(i)];
      }
      CHECK(hi - lo <= 1);
      CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
    }
  }
}

TEST_CASE("splits: errors") {
  CHECK_THROWS_AS(kbmf::make_splits(4, 5, 1, 0), kbmf::ParameterError);
  CHECK_THROWS_AS(kbmf::make_splits(10, 1, 1, 0), kbmf::ParameterError);
  CHECK_THROWS_AS(kbmf::make_splits(10, 2, 0, 0), kbmf::ParameterError);
}

TEST_CASE("baseline: column averages") {
  Matrix y(3, 3);
  y << 1, 1, 1,
       1, -1, 1,
       1, 1, -1;
  Matrix y4(4, 1);
  y4 << 1, -1, 1, -1;
  const Matrix b = kbmf::baseline_predict(y, 2);
  CHECK(b.rows() == 2);
  CHECK(b(0, 0) == 1.0);
  CHECK(b(1, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(b(0, 2) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(kbmf::baseline_predict(y4, 1)(0, 0) == 0.0);
  const Matrix c = kbmf::baseline_predict(y, 2, kbmf::SplitAxis::Columns);
  CHECK(c.cols() == 2);
  CHECK(c(1, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("baseline: constant-label columns score at chance on random held-out labels") {
  kbmf::CounterRng rng(72);
  std::vector<double> aucs;
  for (int shuffle = 0; shuffle < 200; ++shuffle) {
    Matrix y_train(30, 40);
    for (Index j = 0; j < 40; ++j) y_train.col(j).setConstant(rng.next_uniform() < 0.5 ? 1.0 : -1.0);
    const Matrix scores = kbmf::baseline_predict(y_train, 5);
    Matrix held(5, 40);
    for (Index i = 0; i < held.size(); ++i) held(i) = rng.next_uniform() < 0.5 ? 1.0 : -1.0;
    aucs.push_back(kbmf::auc(scores, held));
  }
  const double mean = std::accumulate(aucs.begin(), aucs.end(), 0.0) / 200.0;
  double ss = 0.0;
  for (double a : aucs) ss += (a - mean) * (a - mean);
  const double se = std::sqrt(ss / 199.0) / std::sqrt(200.0);
  MESSAGE("mean AUC " << mean << " +- " << 1.96 * se);
  CHECK(std::abs(mean - 0.5) <= 1.96 * se);
}

TEST_CASE("auc: examples and errors") {
  const std::vector<double> up{0.1, 0.4, 0.6, 0.9}, lab{-1, -1, 1, 1};
  CHECK(kbmf::auc(up, lab) == 1.0);
  const std::vector<double> down{0.9, 0.6, 0.4, 0.1};
  CHECK(kbmf::auc(down, lab) == 0.0);
  CHECK(kbmf::auc(std::vector<double>{0.9, 0.5, 0.5, 0.1}, std::vector<double>{1, -1, 1, -1}) == 0.875);
  CHECK_THROWS_AS(kbmf::auc(up, std::vector<double>{1, 1, 1, 1}), kbmf::EvaluationError);
  CHECK_THROWS_AS(kbmf::auc(up, std::vector<double>{1, -1}), kbmf::ShapeError);
}

TEST_CASE("auc: pairwise oracle and monotone invariance") {
  kbmf::CounterRng rng(73);
  for (int t = 0; t < 50; ++t) {
    const int n = fixtures::uniform_int(rng, 2, 60);
    std::vector<double> s(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      s[static_cast<std::size_t>(i)] = std::round(rng.next_normal() * 4.0) / 4.0;
      y[static_cast<std::size_t>(i)] = i == 0 ? 1.0 : (i == 1 ? -1.0 : (rng.next_uniform() < 0.4 ? 1.0 : -1.0));
    }
    const double a = kbmf::auc(s, y);
    CHECK(a == doctest::Approx(pairwise_auc(s, y)).epsilon(1e-14));
    std::vector<double> t2(s.size());
    std::transform(s.begin(), s.end(), t2.begin(), [](double v) { return std::exp(3.0 * v) - 7.0; });
    CHECK(kbmf::auc(t2, y) == a);
  }
}

TEST_CASE("rmse and hamming: examples") {
  const std::vector<double> a{1.0, -2.0, 3.5};
  CHECK(kbmf::rmse(a, a) == 0.0);
  CHECK(kbmf::rmse(std::vector<double>{2.0, -1.0, 4.5}, a) == 1.0);
  CHECK(kbmf::rmse(std::vector<double>{0, 0}, std::vector<double>{3, 4}) == doctest::Approx(std::sqrt(12.5)).epsilon(1e-15));
  CHECK(std::sqrt(12.5) == doctest::Approx(3.5355).epsilon(1e-4));
  Matrix p(2, 2), q(2, 2);
  p << 1, -1, 1, 1;
  q = p;
  CHECK(kbmf::hamming_loss(p, q) == 0.0);
  CHECK(kbmf::hamming_loss(p, -q) == 1.0);
  q(1, 0) = -1;
  CHECK(kbmf::hamming_loss(p, q) == 0.25);
}

TEST_CASE("precision at k: examples, oracle and errors") {
  Matrix sim(4, 4);
  sim << 0, 0.9, 0.1, 0.5,
         0.9, 0, 0.2, 0.3,
         0.1, 0.2, 0, 0.8,
         0.5, 0.3, 0.8, 0;
  const std::vector<std::int64_t> same{1, 1, 1, 1};
  CHECK(kbmf::precision_at_k(sim, same, 2) == 1.0);
  const std::vector<std::int64_t> cls{0, 0, 1, 1};
  for (int k = 1; k <= 3; ++k) CHECK(kbmf::precision_at_k(sim, cls, k) == doctest::Approx(brute_precision(sim, cls, k)).epsilon(1e-15));
  CHECK(kbmf::precision_at_k(sim, cls, 1) == 1.0);
  const std::vector<std::int64_t> unique{0, 1, 2, 2};
  CHECK(kbmf::precision_at_k(sim, unique, 1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(kbmf::precision_at_k(sim, cls, 4), kbmf::ParameterError);

  kbmf::CounterRng rng(74);
  for (int t = 0; t < 20; ++t) {
    const Index n = fixtures::uniform_int(rng, 3, 20);
    Matrix s = fixtures::random_normal(rng, n, n);
    std::vector<std::int64_t> c(static_cast<std::size_t>(n));
    for (auto& v : c) v = static_cast<std::int64_t>(rng.next_below(3));
    const int k = fixtures::uniform_int(rng, 1, static_cast<int>(n) - 1);
    CHECK(kbmf::precision_at_k(s, c, k) == doctest::Approx(brute_precision(s, c, k)).epsilon(1e-14));
  }
}

TEST_CASE("cv: a predictor that returns the truth scores perfectly") {
  kbmf::CounterRng rng(75);
  const auto pr = fixtures::random_problem(rng, Variant::MklBinary, 25, 25, 2, 2);
  auto opt = cv_options(pr.kx.dimension(), 5, 5, 1);
  opt.hp = pr.hp;
  const auto report = kbmf::run_cv_experiment(pr.kx, pr.kz, pr.y, opt,
                                              [](const kbmf::CvCell& c) { return c.y_test; });
  CHECK(report.cells.size() == 25);
  for (const auto& c : report.cells) {
    REQUIRE(c.ok);
    CHECK(c.values.at("auc") == 1.0);
  }
}

TEST_CASE("cv: leave-one-out gives n cells per replication") {
  kbmf::CounterRng rng(76);
  const auto pr = fixtures::random_problem(rng, Variant::MklRegression, 6, 6, 2, 2);
  auto opt = cv_options(6, 6, 2, 2);
  opt.variant = Variant::MklRegression;
  const auto report = kbmf::run_cv_experiment(pr.kx, pr.kz, pr.y, opt);
  CHECK(report.cells.size() == 12);
  CHECK(report.metric_names == std::vector<std::string>{"rmse", "baseline_rmse"});
  for (const auto& c : report.cells) CHECK(c.ok);
}

TEST_CASE("cv: identical seeds give identical reports, threads do not matter") {
  kbmf::CounterRng rng(77);
  const auto pr = fixtures::random_problem(rng, Variant::MklBinary, 15, 15, 2, 2);
  auto opt = cv_options(15, 3, 2, 5);
  opt.ranks = {1, 2};
  const auto a = kbmf::report_to_csv(kbmf::run_cv_experiment(pr.kx, pr.kz, pr.y, opt));
  opt.threads = 1;
  const auto b = kbmf::report_to_csv(kbmf::run_cv_experiment(pr.kx, pr.kz, pr.y, opt));
  CHECK(a == b);
}

TEST_CASE("cv: failed cells are recorded, not imputed") {
  kbmf::CounterRng rng(78);
  const auto pr = fixtures::random_problem(rng, Variant::MklBinary, 10, 10, 2, 2);
  auto opt = cv_options(10, 2, 1, 3);
  const auto report = kbmf::run_cv_experiment(pr.kx, pr.kz, pr.y, opt, [](const kbmf::CvCell& c) -> Matrix {
    if (c.fold == 1) throw std::runtime_error("boom, at fold 1");
    return c.y_test;
  });
  REQUIRE(report.cells.size() == 2);
  CHECK(report.cells[0].ok);
  CHECK_FALSE(report.cells[1].ok);
  CHECK(report.cells[1].values.empty());
  CHECK(report.cells[1].error == "boom, at fold 1");
  const auto agg = report.aggregate();
  CHECK(agg[0].count == 1);
  CHECK(agg[0].failed == 1);
  const auto back = kbmf::report_from_csv(kbmf::report_to_csv(report));
  CHECK(back.cells[1].error == "boom; at fold 1");
  CHECK_FALSE(back.cells[1].ok);
}

TEST_CASE("cv: columns axis holds out columns") {
  kbmf::CounterRng rng(79);
  const auto pr = fixtures::random_problem(rng, Variant::MklBinary, 8, 12, 2, 2);
  kbmf::CvOptions opt;
  opt.plan = kbmf::make_splits(pr.kz.dimension(), 4, 1, 1, kbmf::SplitAxis::Columns);
  const auto report = kbmf::run_cv_experiment(pr.kx, pr.kz, pr.y, opt, [&](const kbmf::CvCell& c) {
    CHECK(c.y_train.cols() == pr.kx.dimension());
    CHECK(c.kx_train.dimension() == static_cast<Index>(c.train.size()));
    return c.y_test;
  });
  CHECK(report.cells.size() == 4);
}

TEST_CASE("cv: network kernel adds one Jaccard kernel on the column side") {
  kbmf::CounterRng rng(80);
  const auto pr = fixtures::random_problem(rng, Variant::MklBinary, 10, 10, 2, 2);
  auto opt = cv_options(10, 2, 1, 3);
  opt.network_kernel_z = true;
  kbmf::run_cv_experiment(pr.kx, pr.kz, pr.y, opt, [&](const kbmf::CvCell& c) {
    CHECK(c.kz.size() == pr.kz.size() + 1);
    CHECK(c.kz.names().back() == "network");
    return c.y_test;
  });
}

TEST_CASE("report: aggregation equals a flat recomputation") {
  kbmf::CounterRng rng(81);
  EvalReport r;
  r.metric_names = {"auc"};
  std::vector<double> vals;
  for (int rep = 0; rep < 5; ++rep) {
    for (int f = 0; f < 5; ++f) {
      kbmf::EvalCell c;
      c.replication = rep;
      c.fold = f;
      c.rank = 5;
      c.values["auc"] = rng.next_uniform();
      vals.push_back(c.values["auc"]);
      r.cells.push_back(c);
    }
  }
  const auto agg = r.aggregate();
  REQUIRE(agg.size() == 1);
  double flat = 0.0;
  for (double v : vals) flat += v;
  flat /= 25.0;
  CHECK(std::abs(agg[0].mean - flat) <= 1e-12);
  CHECK(agg[0].count == 25);

  const auto back = kbmf::report_from_csv(kbmf::report_to_csv(r));
  CHECK(kbmf::report_summary_json(back) == kbmf::report_summary_json(r));
  const auto doc = nlohmann::json::parse(kbmf::report_summary_json(r));
  CHECK(doc["cells"] == 25);
  CHECK(doc["configurations"][0]["mean"].get<double>() == agg[0].mean);
  CHECK(kbmf::report_chart_svg(r).find("<polyline") != std::string::npos);
}

TEST_CASE("multilabel: widths and rank grid") {
  const auto w = kbmf::multilabel_widths(16);
  CHECK(w == std::vector<double>{2.0, std::sqrt(8.0), 4.0, std::sqrt(32.0), 8.0});

  kbmf::PlantedMultilabelSpec spec;
  spec.n_train = 30;
  spec.n_test = 10;
  spec.features = 6;
  spec.labels = 6;
  spec.seed = 82;
  const auto data = kbmf::planted_multilabel(spec);
  kbmf::MultilabelOptions opt;
  opt.hp.max_iter = 5;
  opt.threads = 2;
  const auto res = kbmf::run_multilabel(data.x_train, data.x_test, data.labels_train, data.labels_test, opt);
  CHECK(res.train_hamming.size() == 6);
  CHECK(res.report.cells.size() == 6);
  CHECK(res.selected_rank >= 1);
  CHECK(res.selected_rank <= 6);
  CHECK(res.train_hamming[static_cast<std::size_t>(res.selected_rank - 1)] ==
        *std::min_element(res.train_hamming.begin(), res.train_hamming.end()));
  CHECK(res.predicted.rows() == 6);
  CHECK(res.predicted.cols() == 10);
}

TEST_CASE("multilabel: separable training data is fitted almost perfectly") {
  kbmf::PlantedMultilabelSpec spec;
  spec.n_train = 60;
  spec.n_test = 20;
  spec.features = 8;
  spec.labels = 3;
  spec.flip_rate = 0.0;
  spec.seed = 83;
  const auto data = kbmf::planted_multilabel(spec);
  kbmf::MultilabelOptions opt;
  opt.hp.max_iter = 400;
  opt.threads = 2;
  const auto res = kbmf::run_multilabel(data.x_train, data.x_test, data.labels_train, data.labels_test, opt);
  const double best = *std::min_element(res.train_hamming.begin(), res.train_hamming.end());
  MESSAGE("training Hamming loss " << best);
  CHECK(best < 0.05);
}

TEST_CASE("multilabel: constant labels keep Hamming loss defined") {
  kbmf::CounterRng rng(84);
  const Matrix xtr = fixtures::random_normal(rng, 4, 12);
  const Matrix xte = fixtures::random_normal(rng, 4, 5);
  const Matrix ltr = -Matrix::Ones(2, 12);
  const Matrix lte = -Matrix::Ones(2, 5);
  kbmf::MultilabelOptions opt;
  opt.hp.max_iter = 10;
  const auto res = kbmf::run_multilabel(xtr, xte, ltr, lte, opt);
  CHECK(res.warnings.size() == 2);
  CHECK(std::isfinite(res.test_hamming));
  CHECK(res.baseline_hamming == 0.0);
  CHECK_THROWS_AS(kbmf::auc(res.predicted, lte), kbmf::EvaluationError);
  CHECK_THROWS_AS(kbmf::run_multilabel(xtr, xte, Matrix::Zero(2, 12), lte, opt), kbmf::DataError);
}

TEST_CASE("retrieval: latent and kernel similarities") {
  kbmf::CounterRng rng(85);
  auto pr = fixtures::random_problem(rng, Variant::MklBinary, 8, 8, 3, 2);
  pr.hp.max_iter = 5;
  const auto model = kbmf::train(pr.kx, pr.kz, pr.y, pr.hp, pr.variant);
  const Matrix latent = kbmf::retrieval_similarity(model, pr.kx, kbmf::RetrievalMetric::LatentInnerProduct);
  CHECK(latent.isApprox(model.state.x.h_mean.transpose() * model.state.x.h_mean));
  const Matrix combined = kbmf::retrieval_similarity(model, pr.kx, kbmf::RetrievalMetric::CombinedKernel);
  Matrix expected = Matrix::Zero(8, 8);
  for (std::size_t m = 0; m < pr.kx.size(); ++m) expected += model.state.x.e_mean(static_cast<Index>(m)) * pr.kx[m];
  CHECK(combined.isApprox(expected, 1e-14));
}

}  // TEST_SUITE
