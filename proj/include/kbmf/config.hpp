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

// Run configuration: an INI document with one section per concern.
//
//   [model]   variant, rank, alpha_eta, beta_eta, alpha_lambda, beta_lambda,
//             sigma_g, sigma_h, margin_nu (binary), sigma_y (regression),
//             max_iter, rel_tol, seed
//   [data]    kernels_x, kernels_z (manifests), targets, labels_01
//   [predict] model, cross_x, cross_z (manifests; omitted = in-matrix)
//   [cv]      folds, replications, axis (rows|columns), ranks, threads,
//             network_kernel_z
//   [toy]     n_x, n_z, d_x, d_z, active_x, active_z, noise_sd
//   [eval]    mode (report|multilabel|retrieval), report, features_train,
//             features_test, labels_train, labels_test, max_rank, threads,
//             model, classes, k, similarity (latent|kernel)
//   [output]  dir, binary, chart
//
// Relative paths resolve against the folder holding the config file.
// Unknown sections or keys are rejected.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kbmf/engine.hpp"
#include "kbmf/harness.hpp"
#include "kbmf/toy.hpp"

namespace kbmf {

struct DataPaths {
  std::optional<std::filesystem::path> kernels_x;
  std::optional<std::filesystem::path> kernels_z;
  std::optional<std::filesystem::path> targets;
  bool labels_01 = false;  ///< targets stored as 0/1, mapped to -1/+1 on load
};

struct PredictPaths {
  std::optional<std::filesystem::path> model;
  std::optional<std::filesystem::path> cross_x;
  std::optional<std::filesystem::path> cross_z;
};

struct CvSettings {
  int folds = 5;
  int replications = 5;
  SplitAxis axis = SplitAxis::Rows;
  std::vector<int> ranks{5};
  int threads = 0;
  bool network_kernel_z = false;
};

enum class EvalMode { Report, Multilabel, Retrieval };

struct EvalSettings {
  EvalMode mode = EvalMode::Report;
  std::optional<std::filesystem::path> report;
  std::optional<std::filesystem::path> features_train;
  std::optional<std::filesystem::path> features_test;
  std::optional<std::filesystem::path> labels_train;
  std::optional<std::filesystem::path> labels_test;
  int max_rank = 15;
  int threads = 0;
  std::optional<std::filesystem::path> model;
  std::optional<std::filesystem::path> classes;
  int k = 5;
  RetrievalMetric similarity = RetrievalMetric::LatentInnerProduct;
};

struct RunConfig {
  std::optional<Variant> variant;  ///< unset: the command's default
  HyperParams hp;
  bool margin_nu_set = false;
  bool sigma_y_set = false;
  bool max_iter_set = false;
  DataPaths data;
  PredictPaths predict;
  CvSettings cv;
  ToySpec toy;
  EvalSettings eval;
  std::filesystem::path out_dir = "out";
  bool binary_matrices = false;
  bool chart = true;

  /// The configured variant, or `fallback` when none was given. Throws
  /// ConfigError when sigma_y is set for a binary variant or margin_nu
  /// for the regression variant.
  [[nodiscard]] Variant resolve_variant(Variant fallback) const;
};

/// Parses and validates; throws ConfigError for anything malformed,
/// missing files included.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace kbmf
