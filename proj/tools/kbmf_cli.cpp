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

// kbmf toy|fit|predict|cv|eval --config <path> [--seed N] [--out DIR]

#include <iostream>

#include "CLI11.hpp"

#include "kbmf/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Kernelized Bayesian matrix factorization"};
  app.require_subcommand(1, 1);

  kbmf::CommandRequest request;
  std::uint64_t seed = 0;
  std::string out_dir;
  const auto add = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", request.config, "INI configuration file")->required();
    sub->add_option("--seed", seed, "overrides [model] seed");
    sub->add_option("--out", out_dir, "overrides [output] dir");
    sub->callback([&, sub, name] {
      request.command = name;
      if (sub->count("--seed") > 0) request.seed = seed;
      if (sub->count("--out") > 0) request.out_dir = out_dir;
    });
  };
  add("toy", "fit the two-domain toy problem and print kernel weights and RMSE");
  add("fit", "train a model and write model.json, elbo_trace.csv and summary.json");
  add("predict", "score test objects with a saved model");
  add("cv", "repeated cross-validation over a rank grid");
  add("eval", "summarize a saved report, or run multilabel or retrieval evaluation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kbmf::kExitConfig;
  }
  return kbmf::run_command(request, std::cout, std::cerr);
}
