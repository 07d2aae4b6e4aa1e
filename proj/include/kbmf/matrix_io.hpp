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

// Dense matrix files and kernel manifests.
//
// CSV: comma-separated, no header, one matrix row per line.
// Binary container: the 4 bytes "KBMF", u32 rows, u32 cols (little endian),
// then rows*cols little-endian IEEE-754 doubles in row-major order.
// Readers detect the container by its magic bytes.
//
// Manifest: one "name,path" line per kernel; blank lines and lines starting
// with '#' are ignored; relative paths resolve against the manifest's folder.

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "kbmf/kernel_ops.hpp"

namespace kbmf {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);
double parse_double(std::string_view text);

Matrix parse_matrix_csv(std::string_view text);
std::string matrix_to_csv(const Matrix& m);

std::string matrix_to_binary(const Matrix& m);
Matrix parse_matrix_binary(std::string_view bytes);

std::string read_file(const std::filesystem::path& path);
/// Writes through a temporary sibling file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// CSV or binary container, chosen by content.
Matrix read_matrix(const std::filesystem::path& path);
void write_matrix(const std::filesystem::path& path, const Matrix& m, bool binary = false);

struct ManifestEntry {
  std::string name;
  std::filesystem::path path;
};

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
KernelBundle load_bundle(const std::filesystem::path& manifest);
CrossKernelBundle load_cross_bundle(const std::filesystem::path& manifest);

}  // namespace kbmf
