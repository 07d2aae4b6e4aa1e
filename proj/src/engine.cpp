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

#include "kbmf/engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kbmf/distributions.hpp"
#include "kbmf/errors.hpp"
#include "kbmf/linalg.hpp"
#include "kbmf/rng.hpp"

namespace kbmf {
namespace {

std::string label_of(std::string_view what, Index s) {
  std::ostringstream out;
  out << what << " component " << s + 1;
  return out.str();
}

// Offset u with u + phi(u)/Phi(u) = 1: a unit-variance normal centred at
// nu + u and truncated below nu has mean exactly nu + 1.
double initial_output_offset() {
  static const double offset = [] {
    double lo = 0.0;
    double hi = 1.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid + inverse_mills_ratio(mid) < 1.0) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
  }();
  return offset;
}

void fill_outputs(OutputPosterior& f, const Matrix& location, const Matrix& y, double margin) {
  f.mode = OutputMode::Binary;
  f.mean.resize(y.rows(), y.cols());
  f.variance.resize(y.rows(), y.cols());
  f.entropy.resize(y.rows(), y.cols());
  for (Index j = 0; j < y.cols(); ++j) {
    for (Index i = 0; i < y.rows(); ++i) {
      const auto t = truncated_moments(location(i, j), 1.0, y(i, j) > 0.0 ? 1 : -1, margin);
      f.mean(i, j) = t.mean;
      f.variance(i, j) = t.variance;
      f.entropy(i, j) = t.entropy;
    }
  }
}

DomainPosteriors init_domain(const KernelBundle& k, const HyperParams& hp, bool multi_kernel,
                             CounterRng rng) {
  const Index n = k.dimension();
  const Index r = hp.rank;
  const auto p = static_cast<Index>(k.size());
  DomainPosteriors d;
  d.multi_kernel = multi_kernel;
  d.lambda_shape = Matrix::Constant(n, r, hp.alpha_lambda);
  d.lambda_scale = Matrix::Constant(n, r, hp.beta_lambda);
  d.a_mean.resize(n, r);
  for (Index i = 0; i < n; ++i) {
    for (Index s = 0; s < r; ++s) d.a_mean(i, s) = rng.next_normal();
  }
  d.a_cov.assign(static_cast<std::size_t>(r), Matrix::Identity(n, n));
  d.a_cov_logdet = Vector::Zero(r);

  if (multi_kernel) {
    d.g_mean.assign(k.size(), Matrix(r, n));
    for (auto& g : d.g_mean) {
      for (Index i = 0; i < n; ++i) {
        for (Index s = 0; s < r; ++s) g(s, i) = rng.next_normal();
      }
    }
    d.g_var = Vector::Constant(p, hp.sigma_g * hp.sigma_g);
    d.eta_shape = Vector::Constant(p, hp.alpha_eta);
    d.eta_scale = Vector::Constant(p, hp.beta_eta);
    d.e_mean = Vector::Ones(p);
    d.e_cov = Matrix::Identity(p, p);
    d.e_cov_logdet = 0.0;
    d.h_mean = Matrix::Zero(r, n);
    for (Index m = 0; m < p; ++m) d.h_mean += d.e_mean(m) * d.g_mean[static_cast<std::size_t>(m)];
    d.h_cov = hp.sigma_h * hp.sigma_h * Matrix::Identity(r, r);
    d.h_cov_logdet = static_cast<double>(r) * std::log(hp.sigma_h * hp.sigma_h);
  } else {
    d.h_mean.resize(r, n);
    for (Index i = 0; i < n; ++i) {
      for (Index s = 0; s < r; ++s) d.h_mean(s, i) = rng.next_normal();
    }
    d.h_cov = hp.sigma_g * hp.sigma_g * Matrix::Identity(r, r);
    d.h_cov_logdet = static_cast<double>(r) * std::log(hp.sigma_g * hp.sigma_g);
  }
  return d;
}

}  // namespace

std::string_view to_string(Variant variant) {
  switch (variant) {
    case Variant::MklBinary: return "mkl-binary";
    case Variant::MklRegression: return "mkl-regression";
    case Variant::TwinKernelBinary: return "twin-kernel-binary";
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  if (name == "mkl-binary") return Variant::MklBinary;
  if (name == "mkl-regression") return Variant::MklRegression;
  if (name == "twin-kernel-binary") return Variant::TwinKernelBinary;
  throw ParameterError("unknown variant '" + std::string(name) + "'");
}

bool is_binary(Variant variant) { return variant != Variant::MklRegression; }
bool is_multi_kernel(Variant variant) { return variant != Variant::TwinKernelBinary; }

void HyperParams::validate() const {
  const auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ParameterError(std::string("hyperparameter ") + name + " must be positive");
    }
  };
  positive(alpha_eta, "alpha_eta");
  positive(beta_eta, "beta_eta");
  positive(alpha_lambda, "alpha_lambda");
  positive(beta_lambda, "beta_lambda");
  positive(sigma_g, "sigma_g");
  positive(sigma_h, "sigma_h");
  positive(sigma_y, "sigma_y");
  positive(rel_tol, "rel_tol");
  if (!std::isfinite(margin_nu)) throw ParameterError("hyperparameter margin_nu must be finite");
  if (rank < 1) throw ParameterError("rank must be at least 1");
  if (max_iter < 0) throw ParameterError("max_iter must be non-negative");
}

Matrix DomainPosteriors::e_second_moment() const {
  return e_mean * e_mean.transpose() + e_cov;
}

Matrix DomainPosteriors::h_scatter() const {
  return h_mean * h_mean.transpose() + static_cast<double>(h_mean.cols()) * h_cov;
}

void check_problem(const KernelBundle& kx, const KernelBundle& kz, const Matrix& y,
                   const HyperParams& hp, Variant variant) {
  hp.validate();
  if (kx.size() == 0 || kz.size() == 0) throw ShapeError("each domain needs at least one kernel");
  if (!is_multi_kernel(variant) && (kx.size() != 1 || kz.size() != 1)) {
    throw ShapeError("twin-kernel-binary takes exactly one kernel per domain");
  }
  if (y.rows() != kx.dimension() || y.cols() != kz.dimension()) {
    std::ostringstream msg;
    msg << "targets are " << y.rows() << "x" << y.cols() << " but kernels are "
        << kx.dimension() << " (x) and " << kz.dimension() << " (z)";
    throw ShapeError(msg.str());
  }
  if (!y.allFinite()) throw DataError("targets contain non-finite values");
  if (is_binary(variant) && !(y.array().abs() == 1.0).all()) {
    throw DataError("binary variants need targets in {-1, +1}");
  }
}

FitState init_state(const KernelBundle& kx, const KernelBundle& kz, const Matrix& y,
                    const HyperParams& hp, Variant variant) {
  check_problem(kx, kz, y, hp, variant);
  const CounterRng root(hp.seed);
  const bool multi = is_multi_kernel(variant);
  FitState s;
  s.x = init_domain(kx, hp, multi, root.split(0));
  s.z = init_domain(kz, hp, multi, root.split(1));
  if (is_binary(variant)) {
    const Matrix location = y * (hp.margin_nu + initial_output_offset());
    fill_outputs(s.f, location, y, hp.margin_nu);
  } else {
    s.f = OutputPosterior{OutputMode::Regression, {}, {}, {}};
  }
  return s;
}

void update_projection_priors(DomainPosteriors& d, const HyperParams& hp) {
  for (Index s = 0; s < d.rank(); ++s) {
    const auto& cov = d.a_cov[static_cast<std::size_t>(s)];
    for (Index i = 0; i < d.objects(); ++i) {
      const double second = d.a_mean(i, s) * d.a_mean(i, s) + cov(i, i);
      const auto q = gamma_update(hp.alpha_lambda, hp.beta_lambda, second);
      d.lambda_shape(i, s) = q.shape;
      d.lambda_scale(i, s) = q.scale;
    }
  }
}

void update_projections(DomainPosteriors& d, const KernelBundle& k, const HyperParams& hp) {
  const double inv_g2 = 1.0 / (hp.sigma_g * hp.sigma_g);
  const Matrix& gram = k.gram_sum();
  // rhs(:, s) = sum_m K_m mu(g_m^s)^T
  Matrix rhs = Matrix::Zero(d.objects(), d.rank());
  if (d.multi_kernel) {
    for (std::size_t m = 0; m < k.size(); ++m) rhs.noalias() += k[m] * d.g_mean[m].transpose();
  } else {
    rhs.noalias() = k[0] * d.h_mean.transpose();
  }
  const Matrix lambda_mean = d.lambda_shape.cwiseProduct(d.lambda_scale);
  for (Index s = 0; s < d.rank(); ++s) {
    Matrix precision = gram * inv_g2;
    precision.diagonal() += lambda_mean.col(s);
    auto inv = spd_inverse(precision, label_of("projection", s));
    d.a_mean.col(s) = inv.covariance * (rhs.col(s) * inv_g2);
    d.a_cov[static_cast<std::size_t>(s)] = std::move(inv.covariance);
    d.a_cov_logdet(s) = inv.log_det_covariance;
  }
}

void update_kernel_components(DomainPosteriors& d, const KernelBundle& k, const HyperParams& hp) {
  const double inv_g2 = 1.0 / (hp.sigma_g * hp.sigma_g);
  const double inv_h2 = 1.0 / (hp.sigma_h * hp.sigma_h);
  const Matrix ee = d.e_second_moment();
  const auto p = static_cast<Index>(k.size());
  for (Index m = 0; m < p; ++m) {
    const auto mi = static_cast<std::size_t>(m);
    const double var = 1.0 / (inv_g2 + ee(m, m) * inv_h2);
    Matrix acc = (d.a_mean.transpose() * k[mi]) * inv_g2;
    acc += (d.e_mean(m) * inv_h2) * d.h_mean;
    for (Index o = 0; o < p; ++o) {
      if (o == m) continue;
      acc -= (ee(m, o) * inv_h2) * d.g_mean[static_cast<std::size_t>(o)];
    }
    d.g_mean[mi] = var * acc;
    d.g_var(m) = var;
  }
}

void update_kernel_weights(DomainPosteriors& d, const HyperParams& hp) {
  const auto p = static_cast<Index>(d.kernels());
  const double inv_h2 = 1.0 / (hp.sigma_h * hp.sigma_h);
  for (Index m = 0; m < p; ++m) {
    const double second = d.e_mean(m) * d.e_mean(m) + d.e_cov(m, m);
    const auto q = gamma_update(hp.alpha_eta, hp.beta_eta, second);
    d.eta_shape(m) = q.shape;
    d.eta_scale(m) = q.scale;
  }
  const double trace_scale = static_cast<double>(d.objects() * d.rank());
  Matrix precision(p, p);
  Vector rhs(p);
  for (Index m = 0; m < p; ++m) {
    const auto& gm = d.g_mean[static_cast<std::size_t>(m)];
    rhs(m) = gm.cwiseProduct(d.h_mean).sum() * inv_h2;
    for (Index o = m; o < p; ++o) {
      double inner = gm.cwiseProduct(d.g_mean[static_cast<std::size_t>(o)]).sum();
      if (o == m) inner += trace_scale * d.g_var(m);
      precision(m, o) = precision(o, m) = inner * inv_h2;
    }
    precision(m, m) += d.eta_shape(m) * d.eta_scale(m);
  }
  auto inv = spd_inverse(precision, "kernel weights");
  d.e_mean = inv.covariance * rhs;
  d.e_cov = std::move(inv.covariance);
  d.e_cov_logdet = inv.log_det_covariance;
}

void update_composite(DomainPosteriors& d, const DomainPosteriors& other, const Matrix& coupling,
                      double coupling_scale, const HyperParams& hp) {
  if (coupling.rows() != other.objects() || coupling.cols() != d.objects()) {
    throw ShapeError("update_composite: coupling matrix has the wrong shape");
  }
  const double inv_h2 = 1.0 / (hp.sigma_h * hp.sigma_h);
  Matrix precision = coupling_scale * other.h_scatter();
  precision.diagonal().array() += inv_h2;
  auto inv = spd_inverse(precision, "composite components");
  Matrix rhs = (coupling_scale * other.h_mean) * coupling;
  for (std::size_t m = 0; m < d.kernels(); ++m) {
    rhs += (d.e_mean(static_cast<Index>(m)) * inv_h2) * d.g_mean[m];
  }
  d.h_mean = inv.covariance * rhs;
  d.h_cov = std::move(inv.covariance);
  d.h_cov_logdet = inv.log_det_covariance;
}

void update_single_kernel_components(DomainPosteriors& d, const KernelBundle& k,
                                     const DomainPosteriors& other, const Matrix& coupling,
                                     const HyperParams& hp) {
  if (coupling.rows() != other.objects() || coupling.cols() != d.objects()) {
    throw ShapeError("update_single_kernel_components: coupling matrix has the wrong shape");
  }
  const double inv_g2 = 1.0 / (hp.sigma_g * hp.sigma_g);
  Matrix precision = other.h_scatter();
  precision.diagonal().array() += inv_g2;
  auto inv = spd_inverse(precision, "kernel components");
  Matrix rhs = (d.a_mean.transpose() * k[0]) * inv_g2;
  rhs.noalias() += other.h_mean * coupling;
  d.h_mean = inv.covariance * rhs;
  d.h_cov = std::move(inv.covariance);
  d.h_cov_logdet = inv.log_det_covariance;
}

void update_outputs(OutputPosterior& f, const DomainPosteriors& x, const DomainPosteriors& z,
                    const Matrix& y, const HyperParams& hp) {
  const Matrix location = x.h_mean.transpose() * z.h_mean;
  fill_outputs(f, location, y, hp.margin_nu);
}

FitState mirror(const FitState& s) {
  FitState out;
  out.x = s.z;
  out.z = s.x;
  out.f.mode = s.f.mode;
  out.f.mean = s.f.mean.transpose();
  out.f.variance = s.f.variance.transpose();
  out.f.entropy = s.f.entropy.transpose();
  return out;
}

FitResult fit(const KernelBundle& kx, const KernelBundle& kz, const Matrix& y,
              const HyperParams& hp, Variant variant, const FitOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  check_problem(kx, kz, y, hp, variant);

  FitResult result;
  FitTrace& trace = result.trace;
  if (hp.rank > std::min(kx.dimension(), kz.dimension())) {
    std::ostringstream msg;
    msg << "rank " << hp.rank << " exceeds min(N_x, N_z) = "
        << std::min(kx.dimension(), kz.dimension());
    trace.warnings.push_back(msg.str());
  }

  FitState& s = result.state;
  s = options.initial ? *options.initial : init_state(kx, kz, y, hp, variant);
  if (s.x.objects() != kx.dimension() || s.z.objects() != kz.dimension() ||
      s.x.rank() != hp.rank || s.z.rank() != hp.rank) {
    throw ShapeError("initial state does not match the problem dimensions");
  }

  const bool binary = is_binary(variant);
  const bool multi = is_multi_kernel(variant);
  const double coupling_scale = binary ? 1.0 : 1.0 / (hp.sigma_y * hp.sigma_y);

  int iteration = 0;
  auto record = [&](const char* name) {
    if (options.record_updates) {
      trace.updates.push_back({iteration, name, elbo(s, kx, kz, y, hp, variant)});
    }
  };

  auto update_domain = [&](bool is_x) {
    DomainPosteriors& d = is_x ? s.x : s.z;
    const DomainPosteriors& other = is_x ? s.z : s.x;
    const KernelBundle& k = is_x ? kx : kz;
    const Matrix& outputs = binary ? s.f.mean : y;
    const Matrix coupling = is_x ? Matrix(outputs.transpose()) : outputs;
    const std::string side = is_x ? "x." : "z.";
    update_projection_priors(d, hp);
    record((side + "lambda").c_str());
    update_projections(d, k, hp);
    record((side + "a").c_str());
    if (multi) {
      update_kernel_components(d, k, hp);
      record((side + "g").c_str());
      update_kernel_weights(d, hp);
      record((side + "e").c_str());
      update_composite(d, other, coupling, coupling_scale, hp);
      record((side + "h").c_str());
    } else {
      update_single_kernel_components(d, k, other, coupling, hp);
      record((side + "g").c_str());
    }
  };

  trace.initial_elbo = elbo(s, kx, kz, y, hp, variant);
  double previous = trace.initial_elbo;
  for (iteration = 1; iteration <= hp.max_iter; ++iteration) {
    try {
      if (options.order == DomainOrder::XThenZ) {
        update_domain(true);
        update_domain(false);
      } else {
        update_domain(false);
        update_domain(true);
      }
      if (binary) {
        update_outputs(s.f, s.x, s.z, y, hp);
        record("f");
      }
      const double bound = elbo(s, kx, kz, y, hp, variant);
      trace.elbo_per_iter.push_back(bound);
      trace.iterations_run = iteration;
      const double change = std::abs(bound - previous) / std::max(std::abs(previous), 1e-300);
      previous = bound;
      if (iteration > 1 && change < hp.rel_tol) {
        trace.converged = true;
        break;
      }
    } catch (const NumericalError& err) {
      throw NumericalError("iteration " + std::to_string(iteration) + ": " + err.what());
    }
  }
  trace.wall_time = std::chrono::steady_clock::now() - start;
  return result;
}

Model train(const KernelBundle& kx, const KernelBundle& kz, const Matrix& y,
            const HyperParams& hp, Variant variant, const FitOptions& options) {
  auto result = fit(kx, kz, y, hp, variant, options);
  Model model;
  model.variant = variant;
  model.hp = hp;
  model.state = std::move(result.state);
  model.trace = std::move(result.trace);
  model.kernel_names_x = kx.names();
  model.kernel_names_z = kz.names();
  return model;
}

}  // namespace kbmf
