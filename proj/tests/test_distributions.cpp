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

#include <boost/math/special_functions/digamma.hpp>

#include "doctest.h"
#include "fixtures.hpp"
#include "kbmf/distributions.hpp"
#include "kbmf/errors.hpp"
#include "oracle/quadrature.hpp"

namespace {

/// log Phi(x) for very negative x from the asymptotic tail series.
double log_cdf_tail_series(double x) {
  const double x2 = x * x;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k <= 8; ++k) {
    term *= -static_cast<double>(2 * k - 1) / x2;
    sum += term;
  }
  return -0.5 * x2 - std::log(-x) - 0.5 * std::log(2.0 * oracle::kPi) + std::log(sum);
}

}  // namespace

TEST_SUITE("distributions") {

TEST_CASE("std normal: origin") {
  const auto v = kbmf::std_normal(0.0);
  CHECK(v.pdf == doctest::Approx(0.3989422804014327).epsilon(1e-15));
  CHECK(v.cdf == 0.5);
}

TEST_CASE("std normal: cdf agrees with quadrature of the density") {
  CHECK(kbmf::std_normal_cdf(1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-14));
  for (double x = -8.0; x <= 8.0; x += 0.37) {
    CHECK(std::abs(kbmf::std_normal_cdf(x) - oracle::normal_cdf(x)) < 1e-14);
    CHECK(std::abs(kbmf::std_normal_pdf(x) - std::exp(-0.5 * x * x) / std::sqrt(2.0 * oracle::kPi)) < 1e-15);
  }
}

TEST_CASE("std normal: far lower tail") {
  CHECK(kbmf::std_normal_cdf(-38.0) > 0.0);
  for (double x : {-31.0, -38.0, -45.0, -100.0}) {
    const double lc = kbmf::std_normal_log_cdf(x);
    CHECK(std::isfinite(lc));
    CHECK(lc == doctest::Approx(log_cdf_tail_series(x)).epsilon(1e-12));
    CHECK(kbmf::inverse_mills_ratio(x) ==
          doctest::Approx(std::exp(-0.5 * x * x - 0.5 * std::log(2.0 * oracle::kPi) - log_cdf_tail_series(x)))
              .epsilon(1e-10));
  }
  const double t = 1e4;
  CHECK(std::isfinite(kbmf::std_normal_log_cdf(-t)));
  CHECK(kbmf::std_normal_log_cdf(-t) == doctest::Approx(log_cdf_tail_series(-t)).epsilon(1e-12));
  CHECK(kbmf::inverse_mills_ratio(-t) == doctest::Approx(t + 1.0 / t - 2.0 / (t * t * t)).epsilon(1e-14));
  for (double x : {-29.0, -10.0, -1.0, 0.0, 2.0}) {
    CHECK(kbmf::std_normal_log_cdf(x) == doctest::Approx(std::log(0.5 * std::erfc(-x / std::sqrt(2.0)))).epsilon(1e-13));
  }
}

TEST_CASE("truncated moments: half normal") {
  const auto t = kbmf::truncated_moments(0.0, 1.0, +1, 0.0);
  CHECK(t.mean == doctest::Approx(std::sqrt(2.0 / oracle::kPi)).epsilon(1e-14));
  CHECK(t.mean == doctest::Approx(0.7978845608).epsilon(1e-10));
  const auto q = oracle::truncated_reference(0.0, 1.0, +1, 0.0);
  CHECK(std::abs(t.mean - q.mean) < 1e-10);
}

TEST_CASE("truncated moments: unit margin") {
  const auto t = kbmf::truncated_moments(0.0, 1.0, +1, 1.0);
  CHECK(t.mean == doctest::Approx(1.5251352761).epsilon(1e-10));
  CHECK(std::abs(t.mean - oracle::truncated_reference(0.0, 1.0, +1, 1.0).mean) < 1e-10);
}

TEST_CASE("truncated moments: inactive truncation") {
  const auto t = kbmf::truncated_moments(5.0, 1.0, +1, 0.0);
  CHECK(t.mean == doctest::Approx(5.0000015).epsilon(1e-7));
  CHECK(std::abs(t.mean - oracle::truncated_reference(5.0, 1.0, +1, 0.0).mean) < 1e-10);
}

TEST_CASE("truncated moments: reflection") {
  for (double mu : {-3.0, -0.4, 0.0, 1.1, 4.0}) {
    for (double margin : {0.0, 0.5, 1.0}) {
      const auto neg = kbmf::truncated_moments(mu, 1.3, -1, margin);
      const auto pos = kbmf::truncated_moments(-mu, 1.3, +1, margin);
      CHECK(neg.mean == -pos.mean);
      CHECK(neg.variance == pos.variance);
      CHECK(neg.entropy == pos.entropy);
    }
  }
}

TEST_CASE("truncated moments: quadrature grid") {
  for (double mu = -5.0; mu <= 5.0 + 1e-12; mu += 0.5) {
    for (double sigma : {0.5, 1.0, 2.0}) {
      for (double margin : {0.0, 0.5, 1.0}) {
        for (int label : {-1, 1}) {
          const auto t = kbmf::truncated_moments(mu, sigma, label, margin);
          const auto q = oracle::truncated_reference(mu, sigma, label, margin);
          CAPTURE(mu);
          CAPTURE(sigma);
          CAPTURE(margin);
          CAPTURE(label);
          CHECK(std::abs(t.mean - q.mean) < 1e-8);
          CHECK(std::abs(t.variance - q.variance) < 1e-8);
          CHECK(std::abs(t.log_z - q.log_z) < 1e-8);
          CHECK(std::abs(t.entropy - q.entropy) < 1e-6);
          CHECK(label * t.mean > margin);
          CHECK(t.variance > 0.0);
          CHECK(t.variance <= sigma * sigma);
        }
      }
    }
  }
}

TEST_CASE("truncated moments: extreme locations stay finite and feasible") {
  for (double mu : {-1e3, -200.0, -40.0, -35.0, 35.0, 1e3}) {
    const auto t = kbmf::truncated_moments(mu, 1.0, +1, 1.0);
    CHECK(std::isfinite(t.mean));
    CHECK(std::isfinite(t.variance));
    CHECK(std::isfinite(t.log_z));
    CHECK(std::isfinite(t.entropy));
    CHECK(t.mean > 1.0);
    CHECK(t.variance > 0.0);
  }
}

TEST_CASE("truncated moments: errors") {
  CHECK_THROWS_AS(kbmf::truncated_moments(0.0, 0.0, 1, 0.0), kbmf::ParameterError);
  CHECK_THROWS_AS(kbmf::truncated_moments(0.0, -1.0, 1, 0.0), kbmf::ParameterError);
  CHECK_THROWS_AS(kbmf::truncated_moments(0.0, 1.0, 0, 0.0), kbmf::ParameterError);
}

TEST_CASE("gamma update: substitution") {
  auto q = kbmf::gamma_update(1.0, 1.0, 0.0);
  CHECK(q.shape == 1.5);
  CHECK(q.scale == 1.0);
  q = kbmf::gamma_update(1.0, 1.0, 2.0);
  CHECK(q.shape == 1.5);
  CHECK(q.scale == 0.5);
  q = kbmf::gamma_update(0.001, 1000.0, 0.0);
  CHECK(q.shape == doctest::Approx(0.501).epsilon(1e-15));
  CHECK(q.scale == doctest::Approx(1000.0).epsilon(1e-15));
  CHECK_THROWS_AS(kbmf::gamma_update(0.0, 1.0, 1.0), kbmf::ParameterError);
  CHECK_THROWS_AS(kbmf::gamma_update(1.0, -1.0, 1.0), kbmf::ParameterError);
}

TEST_CASE("gamma update: mean decreases in the second moment") {
  double previous = kbmf::gamma_update(1.3, 0.7, 0.0).mean();
  for (double s = 0.1; s < 50.0; s *= 1.5) {
    const double m = kbmf::gamma_update(1.3, 0.7, s).mean();
    CHECK(m < previous);
    previous = m;
  }
}

TEST_CASE("gamma posterior: expectations against closed forms") {
  kbmf::CounterRng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const kbmf::GammaPosterior q{fixtures::uniform(rng, 0.1, 10.0), fixtures::uniform(rng, 0.01, 100.0)};
    const double a = fixtures::uniform(rng, 0.1, 5.0);
    const double b = fixtures::uniform(rng, 0.1, 5.0);
    const double mean_log = boost::math::digamma(q.shape) + std::log(q.scale);
    CHECK(q.mean_log() == doctest::Approx(mean_log).epsilon(1e-13));
    const double entropy = q.shape + std::log(q.scale) + std::lgamma(q.shape) +
                           (1.0 - q.shape) * boost::math::digamma(q.shape);
    CHECK(q.entropy() == doctest::Approx(entropy).epsilon(1e-12));
    const double cross = (a - 1.0) * mean_log - q.mean() / b - std::lgamma(a) - a * std::log(b);
    CHECK(q.expected_log_prior(a, b) == doctest::Approx(cross).epsilon(1e-12));
  }
}

}  // TEST_SUITE
