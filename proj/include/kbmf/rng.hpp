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

#pragma once

#include <cstdint>
#include <span>

namespace kbmf {

/// Counter-based generator "kbmf-splitmix64-v1".
///
/// Draw number n (0-based) of a stream with key k is
/// splitmix64_finalize(k + (n + 1) * 0x9E3779B97F4A7C15), i.e. the output
/// sequence of SplitMix64 seeded with k. The sequence is fully specified
/// by (key, counter) and therefore identical on every platform.
class CounterRng {
 public:
  static constexpr const char* kName = "kbmf-splitmix64-v1";

  explicit CounterRng(std::uint64_t key, std::uint64_t counter = 0)
      : key_(key), counter_(counter) {}

  /// Derives an independent stream for a sub-task (fold, replication, ...).
  [[nodiscard]] CounterRng split(std::uint64_t stream) const;

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1) with 53 random bits.
  double next_uniform();
  /// Standard normal via the Box-Muller transform; caches the second variate.
  double next_normal();
  /// Uniform integer in [0, bound) by rejection.
  std::uint64_t next_below(std::uint64_t bound);

  [[nodiscard]] std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// Fisher-Yates shuffle driven by CounterRng (std::shuffle is not portable).
void shuffle(std::span<std::int64_t> values, CounterRng& rng);

}  // namespace kbmf
