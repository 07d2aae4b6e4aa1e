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

#include "kbmf/commands.hpp"

#include <cmath>
#include <iomanip>
#include <string>

#include "json.hpp"

#include "kbmf/errors.hpp"
#include "kbmf/matrix_io.hpp"
#include "kbmf/metrics.hpp"
#include "kbmf/model_json.hpp"
#include "kbmf/predict.hpp"
#include "kbmf/toy.hpp"

namespace kbmf {
namespace {

using Json = nlohmann::ordered_json;

template <typename T>
const T& require(const std::optional<T>& value, const char* what) {
  if (!value) throw ConfigError(std::string("missing setting ") + what);
  return *value;
}

Json hyper_summary(const HyperParams& hp, Variant variant) {
  Json j;
  j["alpha_eta"] = hp.alpha_eta;
  j["beta_eta"] = hp.beta_eta;
  j["alpha_lambda"] = hp.alpha_lambda;
  j["beta_lambda"] = hp.beta_lambda;
  j["sigma_g"] = hp.sigma_g;
  j["sigma_h"] = hp.sigma_h;
  if (is_binary(variant)) {
    j["margin_nu"] = hp.margin_nu;
  } else {
    j["sigma_y"] = hp.sigma_y;
  }
  return j;
}

std::string trace_csv(const FitTrace& trace) {
  std::string out = "iteration,elbo\n0," + format_double(trace.initial_elbo) + "\n";
  for (std::size_t i = 0; i < trace.elbo_per_iter.size(); ++i) {
    out += std::to_string(i + 1) + "," + format_double(trace.elbo_per_iter[i]) + "\n";
  }
  return out;
}

Json run_summary(const Model& model) {
  Json j;
  j["variant"] = std::string(to_string(model.variant));
  j["hyperparameters"] = hyper_summary(model.hp, model.variant);
  j["rank"] = model.hp.rank;
  j["iterations"] = model.trace.iterations_run;
  j["converged"] = model.trace.converged;
  j["final_elbo"] = model.trace.elbo_per_iter.empty() ? model.trace.initial_elbo
                                                      : model.trace.elbo_per_iter.back();
  j["wall_time_seconds"] = model.trace.wall_time.count();
  j["warnings"] = model.trace.warnings;
  return j;
}

std::string predictions_csv(const ScorePrediction& p) {
  std::string out = p.p_positive ? "row,col,f_mean,f_std,p_positive\n" : "row,col,f_mean,f_std\n";
  for (Index i = 0; i < p.f_mean.rows(); ++i) {
    for (Index j = 0; j < p.f_mean.cols(); ++j) {
      out += std::to_string(i) + "," + std::to_string(j) + "," + format_double(p.f_mean(i, j)) +
             "," + format_double(p.f_std(i, j));
      if (p.p_positive) out += "," + format_double((*p.p_positive)(i, j));
      out += "\n";
    }
  }
  return out;
}

struct Problem {
  KernelBundle kx;
  KernelBundle kz;
  Matrix y;
};

Problem load_problem(const RunConfig& cfg) {
  Problem p;
  p.kx = load_bundle(require(cfg.data.kernels_x, "[data] kernels_x"));
  p.kz = load_bundle(require(cfg.data.kernels_z, "[data] kernels_z"));
  p.y = load_targets(require(cfg.data.targets, "[data] targets"), cfg.data.labels_01);
  return p;
}

std::filesystem::path matrix_name(const RunConfig& cfg, const std::string& stem) {
  return cfg.out_dir / (stem + (cfg.binary_matrices ? ".bin" : ".csv"));
}

void check_cross(const CrossKernelBundle& cross, const std::vector<std::string>& names,
                 Index train_objects, bool multi_kernel, const char* domain) {
  const std::size_t expected = multi_kernel ? names.size() : 1;
  if (cross.size() != expected) {
    throw ConfigError(std::string("cross kernels for domain ") + domain + ": model expects " +
                      std::to_string(expected) + " kernels, manifest lists " +
                      std::to_string(cross.size()));
  }
  if (cross.train_count() != train_objects) {
    throw ConfigError(std::string("cross kernels for domain ") + domain + ": expected " +
                      std::to_string(train_objects) + " training rows, found " +
                      std::to_string(cross.train_count()));
  }
}

}  // namespace

int exit_code_for(const std::exception& err) {
  if (dynamic_cast<const ConfigError*>(&err) || dynamic_cast<const ParameterError*>(&err)) {
    return kExitConfig;
  }
  if (dynamic_cast<const DataError*>(&err) || dynamic_cast<const ShapeError*>(&err) ||
      dynamic_cast<const EvaluationError*>(&err)) {
    return kExitData;
  }
  if (dynamic_cast<const NumericalError*>(&err)) return kExitNumerical;
  return kExitFailure;
}

Matrix load_targets(const std::filesystem::path& path, bool labels_01) {
  Matrix y = read_matrix(path);
  if (!labels_01) return y;
  for (Index i = 0; i < y.size(); ++i) {
    double& v = y.data()[i];
    if (v == 0.0 || v == -1.0) {
      v = -1.0;
    } else if (v != 1.0) {
      throw DataError(path.string() + ": label entries must be 0 or 1");
    }
  }
  return y;
}

void cmd_toy(const RunConfig& cfg, std::ostream& out) {
  const Variant variant = cfg.resolve_variant(Variant::MklRegression);
  if (variant != Variant::MklRegression) {
    throw ConfigError("toy: the toy problem uses the mkl-regression variant");
  }
  ToySpec spec = cfg.toy;
  spec.seed = cfg.hp.seed;
  HyperParams hp = cfg.hp;
  if (!cfg.max_iter_set) hp.max_iter = kToyMaxIter;
  const ToyData data = toy_generate(spec);
  const KernelBundle kx = per_feature_linear_kernels(data.x);
  const KernelBundle kz = per_feature_linear_kernels(data.z);
  const Model model = train(kx, kz, data.y, hp, variant);
  const Matrix fitted = predict_matrix(model, nullptr, nullptr).f_mean;
  const double error = rmse(fitted, data.y);

  std::string weights = "domain,feature,weight\n";
  out << "domain feature weight\n";
  const auto table = [&](const char* domain, const Vector& e) {
    for (Index m = 0; m < e.size(); ++m) {
      weights += std::string(domain) + "," + std::to_string(m + 1) + "," + format_double(e(m)) + "\n";
      out << domain << " " << std::setw(7) << m + 1 << " " << std::fixed << std::setprecision(4)
          << std::setw(8) << e(m) << std::defaultfloat << "\n";
    }
  };
  table("x", model.state.x.e_mean);
  table("z", model.state.z.e_mean);
  out << "rmse " << format_double(error) << "\n";

  Json summary = run_summary(model);
  summary["rmse"] = error;
  write_matrix(matrix_name(cfg, "toy_x"), data.x, cfg.binary_matrices);
  write_matrix(matrix_name(cfg, "toy_z"), data.z, cfg.binary_matrices);
  write_matrix(matrix_name(cfg, "toy_y"), data.y, cfg.binary_matrices);
  write_file_atomic(cfg.out_dir / "toy_weights.csv", weights);
  write_file_atomic(cfg.out_dir / "elbo_trace.csv", trace_csv(model.trace));
  save_model(cfg.out_dir / "model.json", model);
  write_file_atomic(cfg.out_dir / "summary.json", summary.dump(2) + "\n");
}

void cmd_fit(const RunConfig& cfg, std::ostream& out) {
  const Variant variant = cfg.resolve_variant(Variant::MklBinary);
  const Problem p = load_problem(cfg);
  const Model model = train(p.kx, p.kz, p.y, cfg.hp, variant);
  const Json summary = run_summary(model);
  save_model(cfg.out_dir / "model.json", model);
  write_file_atomic(cfg.out_dir / "elbo_trace.csv", trace_csv(model.trace));
  write_file_atomic(cfg.out_dir / "summary.json", summary.dump(2) + "\n");
  for (const auto& w : model.trace.warnings) out << "warning: " << w << "\n";
  out << summary.dump(2) << "\n";
}

void cmd_predict(const RunConfig& cfg, std::ostream& out) {
  const Model model = load_model(require(cfg.predict.model, "[predict] model"));
  std::optional<CrossKernelBundle> cross_x;
  std::optional<CrossKernelBundle> cross_z;
  if (cfg.predict.cross_x) {
    cross_x = load_cross_bundle(*cfg.predict.cross_x);
    check_cross(*cross_x, model.kernel_names_x, model.state.x.objects(), model.state.x.multi_kernel, "x");
  }
  if (cfg.predict.cross_z) {
    cross_z = load_cross_bundle(*cfg.predict.cross_z);
    check_cross(*cross_z, model.kernel_names_z, model.state.z.objects(), model.state.z.multi_kernel, "z");
  }
  const ScorePrediction p =
      predict_matrix(model, cross_x ? &*cross_x : nullptr, cross_z ? &*cross_z : nullptr);
  write_file_atomic(cfg.out_dir / "predictions.csv", predictions_csv(p));
  out << "predicted " << p.f_mean.rows() << " x " << p.f_mean.cols() << " pairs\n";
}

void cmd_cv(const RunConfig& cfg, std::ostream& out) {
  const Variant variant = cfg.resolve_variant(Variant::MklBinary);
  const Problem p = load_problem(cfg);
  CvOptions options;
  options.variant = variant;
  options.hp = cfg.hp;
  options.ranks = cfg.cv.ranks;
  options.threads = cfg.cv.threads;
  options.network_kernel_z = cfg.cv.network_kernel_z;
  const Index n = cfg.cv.axis == SplitAxis::Rows ? p.y.rows() : p.y.cols();
  options.plan = make_splits(n, cfg.cv.folds, cfg.cv.replications, cfg.hp.seed, cfg.cv.axis);
  const EvalReport report = run_cv_experiment(p.kx, p.kz, p.y, options);

  const std::string summary = report_summary_json(report);
  write_file_atomic(cfg.out_dir / "cv_report.csv", report_to_csv(report));
  write_file_atomic(cfg.out_dir / "cv_summary.json", summary);
  if (cfg.chart) write_file_atomic(cfg.out_dir / "cv_chart.svg", report_chart_svg(report));
  for (const auto& c : report.cells) {
    if (!c.ok) {
      out << "cell rep=" << c.replication << " fold=" << c.fold << " R=" << c.rank
          << " failed: " << c.error << "\n";
    }
  }
  out << summary;
}

void cmd_eval(const RunConfig& cfg, std::ostream& out) {
  switch (cfg.eval.mode) {
    case EvalMode::Report: {
      const EvalReport report = report_from_csv(read_file(require(cfg.eval.report, "[eval] report")));
      const std::string summary = report_summary_json(report);
      write_file_atomic(cfg.out_dir / "eval_summary.json", summary);
      if (cfg.chart) write_file_atomic(cfg.out_dir / "eval_chart.svg", report_chart_svg(report));
      out << summary;
      return;
    }
    case EvalMode::Multilabel: {
      if (cfg.resolve_variant(Variant::MklBinary) != Variant::MklBinary) {
        throw ConfigError("multilabel evaluation uses the mkl-binary variant");
      }
      const Matrix x_train = read_matrix(require(cfg.eval.features_train, "[eval] features_train"));
      const Matrix x_test = read_matrix(require(cfg.eval.features_test, "[eval] features_test"));
      const Matrix l_train = load_targets(require(cfg.eval.labels_train, "[eval] labels_train"), true);
      const Matrix l_test = cfg.eval.labels_test ? load_targets(*cfg.eval.labels_test, true) : Matrix();
      MultilabelOptions options;
      options.hp = cfg.hp;
      options.max_rank = cfg.eval.max_rank;
      options.threads = cfg.eval.threads;
      const MultilabelResult result = run_multilabel(x_train, x_test, l_train, l_test, options);

      Json summary;
      summary["selected_rank"] = result.selected_rank;
      summary["train_hamming"] = result.train_hamming;
      if (l_test.size() != 0) {
        summary["test_hamming"] = result.test_hamming;
        summary["baseline_hamming"] = result.baseline_hamming;
      }
      summary["warnings"] = result.warnings;
      const Matrix labels01 = (result.predicted.array() + 1.0) / 2.0;
      write_matrix(matrix_name(cfg, "multilabel_predictions"), labels01, cfg.binary_matrices);
      write_file_atomic(cfg.out_dir / "multilabel_report.csv", report_to_csv(result.report));
      write_file_atomic(cfg.out_dir / "multilabel_summary.json", summary.dump(2) + "\n");
      for (const auto& w : result.warnings) out << "warning: " << w << "\n";
      out << summary.dump(2) << "\n";
      return;
    }
    case EvalMode::Retrieval: {
      const Model model = load_model(require(cfg.eval.model, "[eval] model"));
      const KernelBundle kx = load_bundle(require(cfg.data.kernels_x, "[data] kernels_x"));
      const Matrix classes_raw = read_matrix(require(cfg.eval.classes, "[eval] classes"));
      if (classes_raw.cols() != 1) throw DataError("classes: expected one column");
      std::vector<std::int64_t> classes(static_cast<std::size_t>(classes_raw.rows()));
      for (Index i = 0; i < classes_raw.rows(); ++i) {
        classes[static_cast<std::size_t>(i)] = std::llround(classes_raw(i, 0));
      }
      const Matrix similarity = retrieval_similarity(model, kx, cfg.eval.similarity);
      const double precision = precision_at_k(similarity, classes, cfg.eval.k);
      Json summary;
      summary["similarity"] =
          cfg.eval.similarity == RetrievalMetric::LatentInnerProduct ? "latent" : "kernel";
      summary["k"] = cfg.eval.k;
      summary["precision_at_k"] = precision;
      write_file_atomic(cfg.out_dir / "retrieval_summary.json", summary.dump(2) + "\n");
      out << summary.dump(2) << "\n";
      return;
    }
  }
}

int run_command(const CommandRequest& request, std::ostream& out, std::ostream& err) {
  try {
    RunConfig cfg = load_config(request.config);
    if (request.seed) cfg.hp.seed = *request.seed;
    if (request.out_dir) cfg.out_dir = *request.out_dir;
    if (request.command == "toy") {
      cmd_toy(cfg, out);
    } else if (request.command == "fit") {
      cmd_fit(cfg, out);
    } else if (request.command == "predict") {
      cmd_predict(cfg, out);
    } else if (request.command == "cv") {
      cmd_cv(cfg, out);
    } else if (request.command == "eval") {
      cmd_eval(cfg, out);
    } else {
      throw ConfigError("unknown command '" + request.command + "'");
    }
    return kExitOk;
  } catch (const std::exception& e) {
    const int code = exit_code_for(e);
    const char* kind = code == kExitConfig ? "config" : code == kExitData ? "data"
                       : code == kExitNumerical ? "numerical" : "internal";
    Json j;
    j["error"] = kind;
    j["command"] = request.command;
    j["message"] = e.what();
    err << j.dump() << "\n";
    return code;
  }
}

}  // namespace kbmf
