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

#include "kbmf/predict.hpp"

#include <cmath>

#include "kbmf/distributions.hpp"
#include "kbmf/errors.hpp"

namespace kbmf {

PredictiveComponents project_test(const DomainPosteriors& d, const CrossKernelBundle& cross,
                                  const HyperParams& hp) {
  const std::size_t expected = d.multi_kernel ? d.kernels() : 1;
  if (cross.size() != expected) {
    throw ShapeError("project_test: model has " + std::to_string(expected) +
                     " kernels, cross bundle has " + std::to_string(cross.size()));
  }
  if (cross.train_count() != d.objects()) {
    throw ShapeError("project_test: cross kernels have " + std::to_string(cross.train_count()) +
                     " training rows, model has " + std::to_string(d.objects()));
  }
  const Index r = d.rank();
  const Index n_test = cross.test_count();
  const double g2 = hp.sigma_g * hp.sigma_g;

  // g mean R x N_test and per-component variance for each kernel, one test
  // column at a time so every column is computed the same way in any batch.
  std::vector<Matrix> g_mean(cross.size());
  std::vector<Matrix> g_var(cross.size());
  for (std::size_t m = 0; m < cross.size(); ++m) {
    const Matrix& k = cross[m];
    g_mean[m].resize(r, n_test);
    g_var[m].resize(r, n_test);
    for (Index j = 0; j < n_test; ++j) {
      const Vector kj = k.col(j);
      g_mean[m].col(j) = d.a_mean.transpose() * kj;
      for (Index s = 0; s < r; ++s) {
        const Vector projected = d.a_cov[static_cast<std::size_t>(s)] * kj;
        g_var[m](s, j) = kj.dot(projected) + g2;
      }
    }
  }

  PredictiveComponents out;
  if (!d.multi_kernel) {
    out.h_mean = std::move(g_mean[0]);
    out.h_var = std::move(g_var[0]);
    return out;
  }

  const auto p = static_cast<Index>(cross.size());
  const double h2 = hp.sigma_h * hp.sigma_h;
  out.h_mean = Matrix::Zero(r, n_test);
  out.h_var = Matrix::Constant(r, n_test, h2);
  for (Index m = 0; m < p; ++m) {
    const auto mi = static_cast<std::size_t>(m);
    out.h_mean += d.e_mean(m) * g_mean[mi];
    const double e2 = d.e_mean(m) * d.e_mean(m) + d.e_cov(m, m);
    out.h_var += e2 * g_var[mi];
    for (Index o = 0; o < p; ++o) {
      out.h_var += d.e_cov(m, o) * g_mean[mi].cwiseProduct(g_mean[static_cast<std::size_t>(o)]);
    }
  }
  return out;
}

PredictiveComponents in_matrix_components(const DomainPosteriors& d) {
  PredictiveComponents out;
  out.h_mean = d.h_mean;
  out.h_var = d.h_cov.diagonal().replicate(1, d.objects());
  return out;
}

ScorePrediction predict_scores(const PredictiveComponents& hx, const PredictiveComponents& hz,
                               double noise_var) {
  if (hx.h_mean.rows() != hz.h_mean.rows()) {
    throw ShapeError("predict_scores: component ranks differ");
  }
  const Index r = hx.h_mean.rows();
  ScorePrediction out;
  out.f_mean.resize(hx.h_mean.cols(), hz.h_mean.cols());
  out.f_std.resize(hx.h_mean.cols(), hz.h_mean.cols());
  for (Index j = 0; j < hz.h_mean.cols(); ++j) {
    for (Index i = 0; i < hx.h_mean.cols(); ++i) {
      double mean = 0.0;
      double var = noise_var;
      for (Index s = 0; s < r; ++s) {
        const double mx = hx.h_mean(s, i);
        const double mz = hz.h_mean(s, j);
        const double vx = hx.h_var(s, i);
        const double vz = hz.h_var(s, j);
        mean += mx * mz;
        var += vx * mz * mz + vz * mx * mx + vx * vz;
      }
      out.f_mean(i, j) = mean;
      out.f_std(i, j) = std::sqrt(var);
    }
  }
  return out;
}

double class_probability(double mean, double sd, double margin) {
  const double log_pos = std_normal_log_cdf((mean - margin) / sd);
  const double log_neg = std_normal_log_cdf((-mean - margin) / sd);
  return 1.0 / (1.0 + std::exp(log_neg - log_pos));
}

ScorePrediction predict_matrix(const Model& model, const CrossKernelBundle* cross_x,
                               const CrossKernelBundle* cross_z) {
  const auto hx = cross_x ? project_test(model.state.x, *cross_x, model.hp)
                          : in_matrix_components(model.state.x);
  const auto hz = cross_z ? project_test(model.state.z, *cross_z, model.hp)
                          : in_matrix_components(model.state.z);
  const bool binary = is_binary(model.variant);
  const double noise = binary ? 1.0 : model.hp.sigma_y * model.hp.sigma_y;
  auto out = predict_scores(hx, hz, noise);
  if (binary) {
    Matrix p(out.f_mean.rows(), out.f_mean.cols());
    for (Index j = 0; j < p.cols(); ++j) {
      for (Index i = 0; i < p.rows(); ++i) {
        p(i, j) = class_probability(out.f_mean(i, j), out.f_std(i, j), model.hp.margin_nu);
      }
    }
    out.p_positive = std::move(p);
  }
  return out;
}

}  // namespace kbmf
