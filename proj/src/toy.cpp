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

#include "kbmf/toy.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "kbmf/errors.hpp"
#include "kbmf/rng.hpp"

namespace kbmf {
namespace {

Matrix normal_matrix(Index rows, Index cols, CounterRng rng) {
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.next_normal();
  }
  return m;
}

// Value at the given upper quantile; entries strictly above it are positive.
double upper_threshold(const Matrix& scores, double rate) {
  std::vector<double> values(scores.data(), scores.data() + scores.size());
  const auto positives = static_cast<std::size_t>(std::llround(rate * static_cast<double>(values.size())));
  if (positives == 0 || positives >= values.size()) {
    throw ParameterError("positive rate leaves one class empty");
  }
  const auto cut = values.end() - static_cast<std::ptrdiff_t>(positives) - 1;
  std::nth_element(values.begin(), cut, values.end());
  return *cut;
}

}  // namespace

void ToySpec::validate() const {
  if (n_x < 1 || n_z < 1 || d_x < 1 || d_z < 1) throw ParameterError("toy: empty dimension");
  if (active_x.size() != active_z.size() || active_x.empty()) {
    throw ParameterError("toy: active feature lists must be non-empty and of equal length");
  }
  for (const Index a : active_x) {
    if (a < 1 || a > d_x) throw ParameterError("toy: active x feature " + std::to_string(a) + " out of range");
  }
  for (const Index b : active_z) {
    if (b < 1 || b > d_z) throw ParameterError("toy: active z feature " + std::to_string(b) + " out of range");
  }
  if (!(noise_sd >= 0.0)) throw ParameterError("toy: noise_sd must be non-negative");
}

Matrix toy_signal(const Matrix& x, const Matrix& z, const ToySpec& spec) {
  spec.validate();
  if (x.rows() != spec.d_x || z.rows() != spec.d_z) throw ShapeError("toy: feature dimensions differ from the spec");
  Matrix y = Matrix::Zero(x.cols(), z.cols());
  for (std::size_t k = 0; k < spec.active_x.size(); ++k) {
    y.noalias() += x.row(spec.active_x[k] - 1).transpose() * z.row(spec.active_z[k] - 1);
  }
  return y;
}

ToyData toy_generate(const ToySpec& spec) {
  spec.validate();
  const CounterRng root(spec.seed);
  ToyData out;
  out.x = normal_matrix(spec.d_x, spec.n_x, root.split(0));
  out.z = normal_matrix(spec.d_z, spec.n_z, root.split(1));
  out.y_clean = toy_signal(out.x, out.z, spec);
  auto noise = root.split(2);
  out.y = out.y_clean;
  for (Index i = 0; i < out.y.rows(); ++i) {
    for (Index j = 0; j < out.y.cols(); ++j) out.y(i, j) += spec.noise_sd * noise.next_normal();
  }
  return out;
}

PlantedInteractions planted_interactions(const PlantedInteractionSpec& spec) {
  if (spec.n_x < 2 || spec.n_z < 2 || spec.informative < 1 || spec.noise < 1 || spec.rank < 1) {
    throw ParameterError("planted interactions: invalid dimensions");
  }
  const CounterRng root(spec.seed);
  const Index d = spec.informative + spec.noise;
  PlantedInteractions out;
  out.x = normal_matrix(d, spec.n_x, root.split(0));
  out.z = normal_matrix(d, spec.n_z, root.split(1));
  const Matrix wx = normal_matrix(spec.informative, spec.rank, root.split(2));
  const Matrix wz = normal_matrix(spec.informative, spec.rank, root.split(3));
  const Matrix u = wx.transpose() * out.x.topRows(spec.informative);
  const Matrix v = wz.transpose() * out.z.topRows(spec.informative);
  const Matrix scores = u.transpose() * v;
  const double cut = upper_threshold(scores, spec.positive_rate);
  out.y = (scores.array() > cut).select(Matrix::Ones(scores.rows(), scores.cols()),
                                        -Matrix::Ones(scores.rows(), scores.cols()));

  const auto add_kernels = [&](KernelBundle& bundle, const Matrix& features) {
    const Matrix info = features.topRows(spec.informative);
    const Matrix noise = features.bottomRows(spec.noise);
    bundle.add(gaussian_kernel(info, info, std::sqrt(static_cast<double>(spec.informative))), "informative");
    bundle.add(gaussian_kernel(noise, noise, std::sqrt(static_cast<double>(spec.noise))), "noise");
  };
  add_kernels(out.kx, out.x);
  add_kernels(out.kz, out.z);
  return out;
}

PlantedMultilabel planted_multilabel(const PlantedMultilabelSpec& spec) {
  if (spec.n_train < 2 || spec.n_test < 1 || spec.features < 1 || spec.labels < 1 || spec.latent < 1) {
    throw ParameterError("planted multilabel: invalid dimensions");
  }
  const CounterRng root(spec.seed);
  const Index n = spec.n_train + spec.n_test;
  const Matrix x = normal_matrix(spec.features, n, root.split(0));
  const Matrix w = normal_matrix(spec.features, spec.latent, root.split(1)) /
                   std::sqrt(static_cast<double>(spec.features));
  const Matrix c = normal_matrix(spec.latent, spec.labels, root.split(2));
  const Matrix scores = c.transpose() * (w.transpose() * x);  // L x N

  Matrix labels(spec.labels, n);
  auto offsets = root.split(3);
  auto flips = root.split(4);
  for (Index l = 0; l < spec.labels; ++l) {
    // Per-label positive rate between 20% and 50%.
    const double rate = 0.2 + 0.3 * offsets.next_uniform();
    const double cut = upper_threshold(scores.row(l), rate);
    for (Index i = 0; i < n; ++i) {
      double v = scores(l, i) > cut ? 1.0 : -1.0;
      if (flips.next_uniform() < spec.flip_rate) v = -v;
      labels(l, i) = v;
    }
  }
  PlantedMultilabel out;
  out.x_train = x.leftCols(spec.n_train);
  out.x_test = x.rightCols(spec.n_test);
  out.labels_train = labels.leftCols(spec.n_train);
  out.labels_test = labels.rightCols(spec.n_test);
  return out;
}

}  // namespace kbmf
