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

#include "kbmf/config.hpp"

#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "kbmf/errors.hpp"
#include "kbmf/matrix_io.hpp"

namespace kbmf {
namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"model",
       {"variant", "rank", "alpha_eta", "beta_eta", "alpha_lambda", "beta_lambda", "sigma_g",
        "sigma_h", "margin_nu", "sigma_y", "max_iter", "rel_tol", "seed"}},
      {"data", {"kernels_x", "kernels_z", "targets", "labels_01"}},
      {"predict", {"model", "cross_x", "cross_z"}},
      {"cv", {"folds", "replications", "axis", "ranks", "threads", "network_kernel_z"}},
      {"toy", {"n_x", "n_z", "d_x", "d_z", "active_x", "active_z", "noise_sd"}},
      {"eval",
       {"mode", "report", "features_train", "features_test", "labels_train", "labels_test",
        "max_rank", "threads", "model", "classes", "k", "similarity"}},
      {"output", {"dir", "binary", "chart"}},
  };
  return keys;
}

class Section {
 public:
  Section(const pt::ptree* tree, std::string name, std::filesystem::path base)
      : tree_(tree), name_(std::move(name)), base_(std::move(base)) {}

  [[nodiscard]] std::optional<std::string> raw(const std::string& key) const {
    if (tree_ == nullptr) return std::nullopt;
    const auto v = tree_->get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return *v;
  }

  void read(const std::string& key, double& out) const {
    if (const auto v = raw(key)) {
      try {
        out = parse_double(*v);
      } catch (const DataError&) {
        fail(key, "expected a number, got '" + *v + "'");
      }
    }
  }

  template <typename Int>
  void read_int(const std::string& key, Int& out) const {
    if (const auto v = raw(key)) out = static_cast<Int>(parse_integer(key, *v));
  }

  void read(const std::string& key, bool& out) const {
    if (const auto v = raw(key)) {
      if (*v == "true" || *v == "1" || *v == "yes") {
        out = true;
      } else if (*v == "false" || *v == "0" || *v == "no") {
        out = false;
      } else {
        fail(key, "expected true or false, got '" + *v + "'");
      }
    }
  }

  void read_path(const std::string& key, std::optional<std::filesystem::path>& out) const {
    if (const auto v = raw(key)) out = existing(key, *v);
  }

  [[nodiscard]] std::filesystem::path resolve(const std::string& value) const {
    std::filesystem::path p(value);
    return p.is_relative() ? base_ / p : p;
  }

  template <typename Int>
  void read_list(const std::string& key, std::vector<Int>& out) const {
    const auto v = raw(key);
    if (!v) return;
    out.clear();
    std::stringstream in(*v);
    std::string item;
    while (std::getline(in, item, ',')) {
      out.push_back(static_cast<Int>(parse_integer(key, item)));
    }
    if (out.empty()) fail(key, "empty list");
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ConfigError("[" + name_ + "] " + key + ": " + what);
  }

 private:
  [[nodiscard]] long long parse_integer(const std::string& key, std::string text) const {
    const auto b = text.find_first_not_of(" \t");
    const auto e = text.find_last_not_of(" \t");
    text = b == std::string::npos ? std::string{} : text.substr(b, e - b + 1);
    try {
      std::size_t used = 0;
      const long long value = std::stoll(text, &used);
      if (used != text.size()) throw std::invalid_argument("trailing characters");
      return value;
    } catch (const std::exception&) {
      fail(key, "expected an integer, got '" + text + "'");
    }
  }

  [[nodiscard]] std::filesystem::path existing(const std::string& key, const std::string& value) const {
    const auto p = resolve(value);
    if (!std::filesystem::exists(p)) fail(key, "file not found: '" + p.string() + "'");
    return p;
  }

  const pt::ptree* tree_;
  std::string name_;
  std::filesystem::path base_;
};

void check_variant_fields(Variant variant, bool margin_nu_set, bool sigma_y_set) {
  if (is_binary(variant) && sigma_y_set) {
    throw ConfigError("[model] sigma_y is not used by the " + std::string(to_string(variant)) +
                      " variant");
  }
  if (!is_binary(variant) && margin_nu_set) {
    throw ConfigError("[model] margin_nu is not used by the " + std::string(to_string(variant)) +
                      " variant");
  }
}

}  // namespace

Variant RunConfig::resolve_variant(Variant fallback) const {
  const Variant v = variant.value_or(fallback);
  check_variant_fields(v, margin_nu_set, sigma_y_set);
  return v;
}

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& err) {
    throw ConfigError(std::string("config: ") + err.what());
  }
  for (const auto& [section, body] : tree) {
    const auto it = known_keys().find(section);
    if (it == known_keys().end() || body.empty()) {
      throw ConfigError("config: unknown section or top-level key '" + section + "'");
    }
    for (const auto& [key, value] : body) {
      if (!it->second.contains(key)) throw ConfigError("[" + section + "] unknown key '" + key + "'");
    }
  }
  const auto section = [&](const std::string& name) {
    const auto child = tree.get_child_optional(name);
    return Section(child ? &*child : nullptr, name, base_dir);
  };

  RunConfig cfg;
  const Section model = section("model");
  if (const auto v = model.raw("variant")) {
    try {
      cfg.variant = parse_variant(*v);
    } catch (const Error&) {
      model.fail("variant", "unknown variant '" + *v + "'");
    }
  }
  model.read("alpha_eta", cfg.hp.alpha_eta);
  model.read("beta_eta", cfg.hp.beta_eta);
  model.read("alpha_lambda", cfg.hp.alpha_lambda);
  model.read("beta_lambda", cfg.hp.beta_lambda);
  model.read("sigma_g", cfg.hp.sigma_g);
  model.read("sigma_h", cfg.hp.sigma_h);
  model.read("margin_nu", cfg.hp.margin_nu);
  model.read("sigma_y", cfg.hp.sigma_y);
  model.read_int("rank", cfg.hp.rank);
  model.read_int("max_iter", cfg.hp.max_iter);
  model.read("rel_tol", cfg.hp.rel_tol);
  model.read_int("seed", cfg.hp.seed);
  cfg.margin_nu_set = model.raw("margin_nu").has_value();
  cfg.sigma_y_set = model.raw("sigma_y").has_value();
  cfg.max_iter_set = model.raw("max_iter").has_value();
  if (cfg.variant) check_variant_fields(*cfg.variant, cfg.margin_nu_set, cfg.sigma_y_set);
  try {
    cfg.hp.validate();
  } catch (const ParameterError& err) {
    throw ConfigError(std::string("[model] ") + err.what());
  }

  const Section data = section("data");
  data.read_path("kernels_x", cfg.data.kernels_x);
  data.read_path("kernels_z", cfg.data.kernels_z);
  data.read_path("targets", cfg.data.targets);
  data.read("labels_01", cfg.data.labels_01);

  const Section predict = section("predict");
  predict.read_path("model", cfg.predict.model);
  predict.read_path("cross_x", cfg.predict.cross_x);
  predict.read_path("cross_z", cfg.predict.cross_z);

  const Section cv = section("cv");
  cv.read_int("folds", cfg.cv.folds);
  cv.read_int("replications", cfg.cv.replications);
  cv.read_list("ranks", cfg.cv.ranks);
  cv.read_int("threads", cfg.cv.threads);
  cv.read("network_kernel_z", cfg.cv.network_kernel_z);
  if (const auto v = cv.raw("axis")) {
    if (*v == "rows") {
      cfg.cv.axis = SplitAxis::Rows;
    } else if (*v == "columns") {
      cfg.cv.axis = SplitAxis::Columns;
    } else {
      cv.fail("axis", "expected rows or columns, got '" + *v + "'");
    }
  }
  if (cfg.cv.folds < 2) cv.fail("folds", "must be at least 2");
  if (cfg.cv.replications < 1) cv.fail("replications", "must be at least 1");
  for (const int r : cfg.cv.ranks) {
    if (r < 1) cv.fail("ranks", "every rank must be positive");
  }

  const Section toy = section("toy");
  toy.read_int("n_x", cfg.toy.n_x);
  toy.read_int("n_z", cfg.toy.n_z);
  toy.read_int("d_x", cfg.toy.d_x);
  toy.read_int("d_z", cfg.toy.d_z);
  toy.read_list("active_x", cfg.toy.active_x);
  toy.read_list("active_z", cfg.toy.active_z);
  toy.read("noise_sd", cfg.toy.noise_sd);
  try {
    cfg.toy.validate();
  } catch (const ParameterError& err) {
    throw ConfigError(std::string("[toy] ") + err.what());
  }

  const Section eval = section("eval");
  if (const auto v = eval.raw("mode")) {
    if (*v == "report") {
      cfg.eval.mode = EvalMode::Report;
    } else if (*v == "multilabel") {
      cfg.eval.mode = EvalMode::Multilabel;
    } else if (*v == "retrieval") {
      cfg.eval.mode = EvalMode::Retrieval;
    } else {
      eval.fail("mode", "expected report, multilabel or retrieval, got '" + *v + "'");
    }
  }
  eval.read_path("report", cfg.eval.report);
  eval.read_path("features_train", cfg.eval.features_train);
  eval.read_path("features_test", cfg.eval.features_test);
  eval.read_path("labels_train", cfg.eval.labels_train);
  eval.read_path("labels_test", cfg.eval.labels_test);
  eval.read_int("max_rank", cfg.eval.max_rank);
  eval.read_int("threads", cfg.eval.threads);
  eval.read_path("model", cfg.eval.model);
  eval.read_path("classes", cfg.eval.classes);
  eval.read_int("k", cfg.eval.k);
  if (const auto v = eval.raw("similarity")) {
    if (*v == "latent") {
      cfg.eval.similarity = RetrievalMetric::LatentInnerProduct;
    } else if (*v == "kernel") {
      cfg.eval.similarity = RetrievalMetric::CombinedKernel;
    } else {
      eval.fail("similarity", "expected latent or kernel, got '" + *v + "'");
    }
  }
  if (cfg.eval.max_rank < 1) eval.fail("max_rank", "must be positive");

  const Section output = section("output");
  const auto dir = output.raw("dir");
  cfg.out_dir = dir ? output.resolve(*dir) : base_dir / "out";
  output.read("binary", cfg.binary_matrices);
  output.read("chart", cfg.chart);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  const auto parent = path.parent_path();
  return parse_config(read_file(path), parent.empty() ? std::filesystem::path(".") : parent);
}

}  // namespace kbmf
