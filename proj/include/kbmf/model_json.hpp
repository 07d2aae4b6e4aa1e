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

// Model persistence as a single JSON document. Matrices are stored as
// {"rows", "cols", "data"} with row-major data. Wall time and per-update
// bound records are not persisted, so saving the same fit twice gives the
// same bytes and save(load(save(m))) == save(m).

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "kbmf/engine.hpp"

namespace kbmf {

inline constexpr int kModelFormatVersion = 1;

std::string model_to_json(const Model& model);
/// Throws DataError on malformed documents or inconsistent shapes.
Model model_from_json(std::string_view text);

void save_model(const std::filesystem::path& path, const Model& model);
Model load_model(const std::filesystem::path& path);

}  // namespace kbmf
