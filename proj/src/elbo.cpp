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

#include <cmath>
#include <numbers>

#include "kbmf/distributions.hpp"
#include "kbmf/engine.hpp"
#include "kbmf/errors.hpp"

namespace kbmf {
namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);
const double kLog2PiE = kLog2Pi + 1.0;

// sum_s tr(Sigma(a_s) * M) for symmetric M.
double trace_against(const std::vector<Matrix>& covs, const Matrix& m) {
  double total = 0.0;
  for (const auto& c : covs) total += c.cwiseProduct(m).sum();
  return total;
}

// E[log N(a; 0, 1/lambda)] over all entries plus the Gamma terms for lambda.
void projection_terms(const DomainPosteriors& d, const HyperParams& hp, ElboTerms& t) {
  const Index n = d.objects();
  const Index r = d.rank();
  for (Index s = 0; s < r; ++s) {
    const auto& cov = d.a_cov[static_cast<std::size_t>(s)];
    for (Index i = 0; i < n; ++i) {
      const GammaPosterior q{d.lambda_shape(i, s), d.lambda_scale(i, s)};
      t.lambda += q.expected_log_prior(hp.alpha_lambda, hp.beta_lambda) + q.entropy();
      const double second = d.a_mean(i, s) * d.a_mean(i, s) + cov(i, i);
      t.a += -0.5 * kLog2Pi + 0.5 * q.mean_log() - 0.5 * q.mean() * second;
    }
    t.a += 0.5 * (static_cast<double>(n) * kLog2PiE + d.a_cov_logdet(s));
  }
}

}  // namespace

ElboTerms domain_elbo(const DomainPosteriors& d, const KernelBundle& k, const HyperParams& hp) {
  ElboTerms t;
  projection_terms(d, hp, t);

  const auto n = static_cast<double>(d.objects());
  const auto r = static_cast<double>(d.rank());
  const double g2 = hp.sigma_g * hp.sigma_g;
  const double h2 = hp.sigma_h * hp.sigma_h;

  if (!d.multi_kernel) {
    // Components of the single kernel live in the H slot with noise sigma_g.
    const Matrix residual = d.h_mean - d.a_mean.transpose() * k[0];
    const double expected_sq = residual.squaredNorm() + n * d.h_cov.trace() +
                               trace_against(d.a_cov, k.gram_sum());
    t.g = -0.5 * n * r * std::log(2.0 * std::numbers::pi * g2) - 0.5 * expected_sq / g2 +
          0.5 * n * (r * kLog2PiE + d.h_cov_logdet);
    return t;
  }

  const auto p = static_cast<Index>(d.kernels());
  // Kernel-specific components.
  double g_sq = trace_against(d.a_cov, k.gram_sum());
  double g_entropy = 0.0;
  for (Index m = 0; m < p; ++m) {
    const auto mi = static_cast<std::size_t>(m);
    g_sq += (d.g_mean[mi] - d.a_mean.transpose() * k[mi]).squaredNorm() + n * r * d.g_var(m);
    g_entropy += 0.5 * n * r * (kLog2PiE + std::log(d.g_var(m)));
  }
  t.g = -0.5 * n * r * static_cast<double>(p) * std::log(2.0 * std::numbers::pi * g2) -
        0.5 * g_sq / g2 + g_entropy;

  // Kernel weights and their precisions.
  for (Index m = 0; m < p; ++m) {
    const GammaPosterior q{d.eta_shape(m), d.eta_scale(m)};
    t.eta += q.expected_log_prior(hp.alpha_eta, hp.beta_eta) + q.entropy();
    const double second = d.e_mean(m) * d.e_mean(m) + d.e_cov(m, m);
    t.e += -0.5 * kLog2Pi + 0.5 * q.mean_log() - 0.5 * q.mean() * second;
  }
  t.e += 0.5 * (static_cast<double>(p) * kLog2PiE + d.e_cov_logdet);

  // Composite components: E||h_i - sum_m e_m g_{m,i}||^2 summed over i.
  const Matrix ee = d.e_second_moment();
  double h_sq = d.h_mean.squaredNorm() + n * d.h_cov.trace();
  for (Index m = 0; m < p; ++m) {
    const auto& gm = d.g_mean[static_cast<std::size_t>(m)];
    h_sq -= 2.0 * d.e_mean(m) * gm.cwiseProduct(d.h_mean).sum();
    for (Index o = 0; o < p; ++o) {
      double inner = gm.cwiseProduct(d.g_mean[static_cast<std::size_t>(o)]).sum();
      if (o == m) inner += n * r * d.g_var(m);
      h_sq += ee(m, o) * inner;
    }
  }
  t.h = -0.5 * n * r * std::log(2.0 * std::numbers::pi * h2) - 0.5 * h_sq / h2 +
        0.5 * n * (r * kLog2PiE + d.h_cov_logdet);
  return t;
}

ElboTerms elbo_terms(const FitState& s, const KernelBundle& kx, const KernelBundle& kz,
                     const Matrix& y, const HyperParams& hp, Variant variant) {
  const ElboTerms tx = domain_elbo(s.x, kx, hp);
  const ElboTerms tz = domain_elbo(s.z, kz, hp);
  ElboTerms t;
  t.lambda = tx.lambda + tz.lambda;
  t.a = tx.a + tz.a;
  t.g = tx.g + tz.g;
  t.eta = tx.eta + tz.eta;
  t.e = tx.e + tz.e;
  t.h = tx.h + tz.h;

  const Matrix location = s.x.h_mean.transpose() * s.z.h_mean;
  // sum_ij E[(h_x,i^T h_z,j)^2] = tr(Sx Sz)
  const double product_sq = s.x.h_scatter().cwiseProduct(s.z.h_scatter()).sum();
  const auto cells = static_cast<double>(y.size());
  if (is_binary(variant)) {
    const double second = (s.f.variance.array() + s.f.mean.array().square()).sum();
    const double cross = s.f.mean.cwiseProduct(location).sum();
    t.output = -0.5 * cells * kLog2Pi - 0.5 * (second - 2.0 * cross + product_sq) +
               s.f.entropy.sum();
  } else {
    const double y2 = hp.sigma_y * hp.sigma_y;
    const double cross = y.cwiseProduct(location).sum();
    t.output = -0.5 * cells * std::log(2.0 * std::numbers::pi * y2) -
               0.5 * (y.squaredNorm() - 2.0 * cross + product_sq) / y2;
  }

  const std::pair<const char*, double> named[] = {
      {"lambda", t.lambda}, {"a", t.a}, {"g", t.g},           {"eta", t.eta},
      {"e", t.e},           {"h", t.h}, {"output", t.output},
  };
  for (const auto& [name, value] : named) {
    if (!std::isfinite(value)) {
      throw NumericalError(std::string("lower bound term '") + name + "' is not finite");
    }
  }
  return t;
}

double elbo(const FitState& s, const KernelBundle& kx, const KernelBundle& kz, const Matrix& y,
            const HyperParams& hp, Variant variant) {
  return elbo_terms(s, kx, kz, y, hp, variant).total();
}

}  // namespace kbmf
