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

#include "kbmf/model_json.hpp"

#include "json.hpp"

#include "kbmf/errors.hpp"
#include "kbmf/matrix_io.hpp"

namespace kbmf {
namespace {

using Json = nlohmann::ordered_json;

Json matrix_json(const Matrix& m) {
  Json data = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  }
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Json vector_json(const Vector& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Matrix read_matrix_json(const Json& j) {
  const auto rows = j.at("rows").get<Index>();
  const auto cols = j.at("cols").get<Index>();
  const auto& data = j.at("data");
  if (rows < 0 || cols < 0 || static_cast<Index>(data.size()) != rows * cols) {
    throw DataError("model: matrix data does not match its shape");
  }
  Matrix m(rows, cols);
  std::size_t k = 0;
  for (Index i = 0; i < rows; ++i) {
    for (Index jj = 0; jj < cols; ++jj) m(i, jj) = data[k++].get<double>();
  }
  return m;
}

Vector read_vector_json(const Json& j) {
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = j[i].get<double>();
  return v;
}

Json domain_json(const DomainPosteriors& d) {
  Json out;
  out["multi_kernel"] = d.multi_kernel;
  out["lambda_shape"] = matrix_json(d.lambda_shape);
  out["lambda_scale"] = matrix_json(d.lambda_scale);
  out["a_mean"] = matrix_json(d.a_mean);
  Json covs = Json::array();
  for (const auto& c : d.a_cov) covs.push_back(matrix_json(c));
  out["a_cov"] = std::move(covs);
  out["a_cov_logdet"] = vector_json(d.a_cov_logdet);
  if (d.multi_kernel) {
    Json g = Json::array();
    for (const auto& m : d.g_mean) g.push_back(matrix_json(m));
    out["g_mean"] = std::move(g);
    out["g_var"] = vector_json(d.g_var);
    out["eta_shape"] = vector_json(d.eta_shape);
    out["eta_scale"] = vector_json(d.eta_scale);
    out["e_mean"] = vector_json(d.e_mean);
    out["e_cov"] = matrix_json(d.e_cov);
    out["e_cov_logdet"] = d.e_cov_logdet;
  }
  out["h_mean"] = matrix_json(d.h_mean);
  out["h_cov"] = matrix_json(d.h_cov);
  out["h_cov_logdet"] = d.h_cov_logdet;
  return out;
}

DomainPosteriors read_domain(const Json& j) {
  DomainPosteriors d;
  d.multi_kernel = j.at("multi_kernel").get<bool>();
  d.lambda_shape = read_matrix_json(j.at("lambda_shape"));
  d.lambda_scale = read_matrix_json(j.at("lambda_scale"));
  d.a_mean = read_matrix_json(j.at("a_mean"));
  for (const auto& c : j.at("a_cov")) d.a_cov.push_back(read_matrix_json(c));
  d.a_cov_logdet = read_vector_json(j.at("a_cov_logdet"));
  if (d.multi_kernel) {
    for (const auto& m : j.at("g_mean")) d.g_mean.push_back(read_matrix_json(m));
    d.g_var = read_vector_json(j.at("g_var"));
    d.eta_shape = read_vector_json(j.at("eta_shape"));
    d.eta_scale = read_vector_json(j.at("eta_scale"));
    d.e_mean = read_vector_json(j.at("e_mean"));
    d.e_cov = read_matrix_json(j.at("e_cov"));
    d.e_cov_logdet = j.at("e_cov_logdet").get<double>();
  }
  d.h_mean = read_matrix_json(j.at("h_mean"));
  d.h_cov = read_matrix_json(j.at("h_cov"));
  d.h_cov_logdet = j.at("h_cov_logdet").get<double>();

  const Index n = d.a_mean.rows();
  const Index r = d.a_mean.cols();
  bool ok = d.lambda_shape.rows() == n && d.lambda_shape.cols() == r &&
            d.lambda_scale.rows() == n && d.lambda_scale.cols() == r &&
            static_cast<Index>(d.a_cov.size()) == r && d.a_cov_logdet.size() == r &&
            d.h_mean.rows() == r && d.h_mean.cols() == n && d.h_cov.rows() == r &&
            d.h_cov.cols() == r;
  for (const auto& c : d.a_cov) ok = ok && c.rows() == n && c.cols() == n;
  if (d.multi_kernel) {
    const auto p = static_cast<Index>(d.g_mean.size());
    ok = ok && p > 0 && d.g_var.size() == p && d.eta_shape.size() == p &&
         d.eta_scale.size() == p && d.e_mean.size() == p && d.e_cov.rows() == p &&
         d.e_cov.cols() == p;
    for (const auto& g : d.g_mean) ok = ok && g.rows() == r && g.cols() == n;
  }
  if (!ok) throw DataError("model: inconsistent posterior shapes");
  return d;
}

Json hyper_json(const HyperParams& hp) {
  Json out;
  out["alpha_eta"] = hp.alpha_eta;
  out["beta_eta"] = hp.beta_eta;
  out["alpha_lambda"] = hp.alpha_lambda;
  out["beta_lambda"] = hp.beta_lambda;
  out["sigma_g"] = hp.sigma_g;
  out["sigma_h"] = hp.sigma_h;
  out["margin_nu"] = hp.margin_nu;
  out["sigma_y"] = hp.sigma_y;
  out["rank"] = hp.rank;
  out["max_iter"] = hp.max_iter;
  out["rel_tol"] = hp.rel_tol;
  out["seed"] = hp.seed;
  return out;
}

HyperParams read_hyper(const Json& j) {
  HyperParams hp;
  hp.alpha_eta = j.at("alpha_eta").get<double>();
  hp.beta_eta = j.at("beta_eta").get<double>();
  hp.alpha_lambda = j.at("alpha_lambda").get<double>();
  hp.beta_lambda = j.at("beta_lambda").get<double>();
  hp.sigma_g = j.at("sigma_g").get<double>();
  hp.sigma_h = j.at("sigma_h").get<double>();
  hp.margin_nu = j.at("margin_nu").get<double>();
  hp.sigma_y = j.at("sigma_y").get<double>();
  hp.rank = j.at("rank").get<int>();
  hp.max_iter = j.at("max_iter").get<int>();
  hp.rel_tol = j.at("rel_tol").get<double>();
  hp.seed = j.at("seed").get<std::uint64_t>();
  hp.validate();
  return hp;
}

}  // namespace

std::string model_to_json(const Model& model) {
  Json doc;
  doc["format_version"] = kModelFormatVersion;
  doc["variant"] = std::string(to_string(model.variant));
  doc["hyperparameters"] = hyper_json(model.hp);
  doc["kernel_names_x"] = model.kernel_names_x;
  doc["kernel_names_z"] = model.kernel_names_z;
  doc["x"] = domain_json(model.state.x);
  doc["z"] = domain_json(model.state.z);
  Json f;
  f["mode"] = model.state.f.mode == OutputMode::Binary ? "binary" : "regression";
  if (model.state.f.mode == OutputMode::Binary) {
    f["mean"] = matrix_json(model.state.f.mean);
    f["variance"] = matrix_json(model.state.f.variance);
    f["entropy"] = matrix_json(model.state.f.entropy);
  }
  doc["outputs"] = std::move(f);
  Json trace;
  trace["elbo"] = model.trace.elbo_per_iter;
  trace["initial_elbo"] = model.trace.initial_elbo;
  trace["iterations"] = model.trace.iterations_run;
  trace["converged"] = model.trace.converged;
  trace["warnings"] = model.trace.warnings;
  doc["trace"] = std::move(trace);
  return doc.dump(1) + "\n";
}

Model model_from_json(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::exception& err) {
    throw DataError(std::string("model: ") + err.what());
  }
  try {
    const int version = doc.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw DataError("model: unsupported format version " + std::to_string(version));
    }
    Model model;
    model.variant = parse_variant(doc.at("variant").get<std::string>());
    model.hp = read_hyper(doc.at("hyperparameters"));
    model.kernel_names_x = doc.at("kernel_names_x").get<std::vector<std::string>>();
    model.kernel_names_z = doc.at("kernel_names_z").get<std::vector<std::string>>();
    model.state.x = read_domain(doc.at("x"));
    model.state.z = read_domain(doc.at("z"));
    if (model.state.x.multi_kernel != is_multi_kernel(model.variant) ||
        model.state.z.multi_kernel != is_multi_kernel(model.variant) ||
        model.state.x.rank() != model.state.z.rank()) {
      throw DataError("model: posteriors do not match the variant");
    }
    const auto& f = doc.at("outputs");
    const std::string mode = f.at("mode").get<std::string>();
    if (mode == "binary") {
      model.state.f.mode = OutputMode::Binary;
      model.state.f.mean = read_matrix_json(f.at("mean"));
      model.state.f.variance = read_matrix_json(f.at("variance"));
      model.state.f.entropy = read_matrix_json(f.at("entropy"));
    } else if (mode == "regression") {
      model.state.f.mode = OutputMode::Regression;
    } else {
      throw DataError("model: unknown output mode '" + mode + "'");
    }
    if ((model.state.f.mode == OutputMode::Binary) != is_binary(model.variant)) {
      throw DataError("model: output mode does not match the variant");
    }
    const auto& trace = doc.at("trace");
    model.trace.elbo_per_iter = trace.at("elbo").get<std::vector<double>>();
    model.trace.initial_elbo = trace.at("initial_elbo").get<double>();
    model.trace.iterations_run = trace.at("iterations").get<int>();
    model.trace.converged = trace.at("converged").get<bool>();
    model.trace.warnings = trace.at("warnings").get<std::vector<std::string>>();
    return model;
  } catch (const nlohmann::json::exception& err) {
    throw DataError(std::string("model: ") + err.what());
  } catch (const ParameterError& err) {
    throw DataError(std::string("model: ") + err.what());
  }
}

void save_model(const std::filesystem::path& path, const Model& model) {
  write_file_atomic(path, model_to_json(model));
}

Model load_model(const std::filesystem::path& path) { return model_from_json(read_file(path)); }

}  // namespace kbmf
