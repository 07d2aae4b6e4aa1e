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

// One randomized comparison of every library update against its loop oracle.

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "fixtures.hpp"
#include "oracle/naive_updates.hpp"

namespace fixtures {

struct UpdateDiff {
  std::string update;
  double rel_diff;
};

inline std::vector<UpdateDiff> update_oracle_trial(CounterRng& rng) {
  const Variant variant = kAllVariants[rng.next_below(3)];
  const Problem pr = random_problem(rng, variant, 4, 8, 3, 3);
  const kbmf::FitState st = warm_state(pr, uniform_int(rng, 0, 3));
  const auto& hp = pr.hp;
  const bool binary = kbmf::is_binary(variant);
  const double scale = binary ? 1.0 : 1.0 / (hp.sigma_y * hp.sigma_y);
  const Matrix& outputs = binary ? st.f.mean : pr.y;

  std::vector<UpdateDiff> out;
  for (int side = 0; side < 2; ++side) {
    const bool is_x = side == 0;
    const std::string tag = std::string(kbmf::to_string(variant)) + (is_x ? " x." : " z.");
    const auto& base = is_x ? st.x : st.z;
    const auto& other = is_x ? st.z : st.x;
    const auto& bundle = is_x ? pr.kx : pr.kz;
    const auto& k = bundle.matrices();
    const Matrix targets = is_x ? Matrix(outputs) : Matrix(outputs.transpose());
    const Matrix coupling = targets.transpose();

    auto lib = base;
    auto ref = base;
    kbmf::update_projection_priors(lib, hp);
    oracle::lambda_update(ref, hp);
    out.push_back({tag + "lambda", oracle::domain_rel_diff(lib, ref)});

    lib = ref = base;
    kbmf::update_projections(lib, bundle, hp);
    if (base.multi_kernel) {
      oracle::a_update(ref, k, base.g_mean, hp);
    } else {
      oracle::a_update(ref, k, {base.h_mean}, hp);
    }
    out.push_back({tag + "a", oracle::domain_rel_diff(lib, ref)});

    if (base.multi_kernel) {
      lib = ref = base;
      kbmf::update_kernel_components(lib, bundle, hp);
      oracle::g_update(ref, k, hp);
      out.push_back({tag + "g", oracle::domain_rel_diff(lib, ref)});

      lib = ref = base;
      kbmf::update_kernel_weights(lib, hp);
      oracle::e_update(ref, hp);
      out.push_back({tag + "e", oracle::domain_rel_diff(lib, ref)});

      lib = ref = base;
      kbmf::update_composite(lib, other, coupling, scale, hp);
      oracle::h_update(ref, other, targets, scale, hp);
      out.push_back({tag + "h", oracle::domain_rel_diff(lib, ref)});
    } else {
      lib = ref = base;
      kbmf::update_single_kernel_components(lib, bundle, other, coupling, hp);
      oracle::single_kernel_update(ref, k[0], other, targets, hp);
      out.push_back({tag + "g", oracle::domain_rel_diff(lib, ref)});
    }
  }

  if (binary) {
    kbmf::OutputPosterior f = st.f;
    kbmf::update_outputs(f, st.x, st.z, pr.y, hp);
    double worst = oracle::max_rel_diff(f.mean, oracle::f_update(st.x, st.z, pr.y, hp.margin_nu));
    for (Index i = 0; i < pr.y.rows(); ++i) {
      for (Index j = 0; j < pr.y.cols(); ++j) {
        double loc = 0.0;
        for (Index s = 0; s < st.x.h_mean.rows(); ++s) loc += st.x.h_mean(s, i) * st.z.h_mean(s, j);
        const auto u = oracle::unit_truncated(loc, pr.y(i, j) > 0 ? 1 : -1, hp.margin_nu);
        worst = std::max(worst, oracle::rel_diff(f.variance(i, j), u.second - u.mean * u.mean));
        worst = std::max(worst, oracle::rel_diff(f.entropy(i, j), u.entropy));
      }
    }
    out.push_back({std::string(kbmf::to_string(variant)) + " f", worst});
  }
  return out;
}

}  // namespace fixtures
