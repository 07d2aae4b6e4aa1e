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

// Randomized problem instances shared by the unit and acceptance tests.

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "kbmf/engine.hpp"
#include "kbmf/kernel_ops.hpp"
#include "kbmf/rng.hpp"

namespace fixtures {

using kbmf::CounterRng;
using kbmf::Index;
using kbmf::KernelBundle;
using kbmf::Matrix;
using kbmf::Variant;

inline Matrix random_normal(CounterRng& rng, Index rows, Index cols) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.next_normal();
  }
  return m;
}

inline double uniform(CounterRng& rng, double lo, double hi) { return lo + (hi - lo) * rng.next_uniform(); }

inline int uniform_int(CounterRng& rng, int lo, int hi) {
  return lo + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(hi - lo + 1)));
}

/// P Gaussian kernels on independent random features, widths around sqrt(D).
inline KernelBundle random_bundle(CounterRng& rng, Index n, int p) {
  std::vector<Matrix> ks;
  for (int m = 0; m < p; ++m) {
    const Index dim = uniform_int(rng, 2, 5);
    const Matrix x = random_normal(rng, dim, n);
    ks.push_back(kbmf::gaussian_kernel(x, x, uniform(rng, 0.7, 1.5) * std::sqrt(static_cast<double>(dim))));
  }
  return KernelBundle(std::move(ks));
}

inline Matrix random_targets(CounterRng& rng, Index rows, Index cols, Variant variant) {
  Matrix y = random_normal(rng, rows, cols);
  if (kbmf::is_binary(variant)) y = y.unaryExpr([](double v) { return v > 0.3 ? 1.0 : -1.0; });
  return y;
}

struct Problem {
  Variant variant = Variant::MklBinary;
  KernelBundle kx;
  KernelBundle kz;
  Matrix y;
  kbmf::HyperParams hp;
};

/// Small instance with moderate noise levels so every linear system is
/// well conditioned.
inline Problem random_problem(CounterRng& rng, Variant variant, Index n_min, Index n_max, int p_max, int r_max) {
  Problem pr;
  pr.variant = variant;
  const Index nx = uniform_int(rng, static_cast<int>(n_min), static_cast<int>(n_max));
  const Index nz = uniform_int(rng, static_cast<int>(n_min), static_cast<int>(n_max));
  const bool multi = kbmf::is_multi_kernel(variant);
  pr.kx = random_bundle(rng, nx, multi ? uniform_int(rng, 1, p_max) : 1);
  pr.kz = random_bundle(rng, nz, multi ? uniform_int(rng, 1, p_max) : 1);
  pr.y = random_targets(rng, nx, nz, variant);
  pr.hp.rank = uniform_int(rng, 1, r_max);
  pr.hp.alpha_lambda = uniform(rng, 0.5, 2.0);
  pr.hp.beta_lambda = uniform(rng, 0.5, 2.0);
  pr.hp.alpha_eta = uniform(rng, 0.5, 2.0);
  pr.hp.beta_eta = uniform(rng, 0.5, 2.0);
  pr.hp.sigma_g = uniform(rng, 0.3, 1.5);
  pr.hp.sigma_h = uniform(rng, 0.3, 1.5);
  if (kbmf::is_binary(variant)) {
    pr.hp.margin_nu = uniform(rng, 0.0, 1.0);
  } else {
    pr.hp.sigma_y = uniform(rng, 0.5, 1.5);
  }
  pr.hp.seed = rng.next_u64();
  return pr;
}

inline constexpr Variant kAllVariants[] = {Variant::MklBinary, Variant::MklRegression, Variant::TwinKernelBinary};

/// A state a few sweeps away from initialization.
inline kbmf::FitState warm_state(const Problem& pr, int sweeps) {
  auto hp = pr.hp;
  hp.max_iter = sweeps;
  hp.rel_tol = 1e-300;
  return kbmf::fit(pr.kx, pr.kz, pr.y, hp, pr.variant).state;
}

}  // namespace fixtures
