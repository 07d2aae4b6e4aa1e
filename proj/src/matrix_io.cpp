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

#include "kbmf/matrix_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "kbmf/errors.hpp"

namespace kbmf {
namespace {

constexpr std::string_view kMagic = "KBMF";

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
void put_le(std::string& out, T value) {
  static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);
  std::array<char, sizeof(T)> bytes{};
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.append(bytes.data(), bytes.size());
}

template <typename T>
T get_le(std::string_view bytes, std::size_t offset) {
  std::array<char, sizeof(T)> raw{};
  std::memcpy(raw.data(), bytes.data() + offset, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
  T value;
  std::memcpy(&value, raw.data(), sizeof(T));
  return value;
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

double parse_double(std::string_view text) {
  text = trim(text);
  if (text == "nan" || text == "NaN") return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw DataError("not a number: '" + std::string(text) + "'");
  }
  return value;
}

Matrix parse_matrix_csv(std::string_view text) {
  std::vector<std::vector<double>> rows;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    const auto line = trim(text.substr(pos, end - pos));
    ++line_no;
    pos = end + 1;
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    std::vector<double> row;
    std::size_t start = 0;
    for (;;) {
      const auto comma = line.find(',', start);
      const auto cell = line.substr(start, comma == std::string_view::npos ? line.size() - start
                                                                           : comma - start);
      try {
        row.push_back(parse_double(cell));
      } catch (const DataError& err) {
        throw DataError("line " + std::to_string(line_no) + ": " + err.what());
      }
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(rows.front().size()) + " columns, found " +
                      std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
    if (end == text.size()) break;
  }
  const auto r = static_cast<Index>(rows.size());
  const auto c = rows.empty() ? Index{0} : static_cast<Index>(rows.front().size());
  Matrix m(r, c);
  for (Index i = 0; i < r; ++i) {
    for (Index j = 0; j < c; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return m;
}

std::string matrix_to_csv(const Matrix& m) {
  std::string out;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

std::string matrix_to_binary(const Matrix& m) {
  if (m.rows() > std::numeric_limits<std::uint32_t>::max() ||
      m.cols() > std::numeric_limits<std::uint32_t>::max()) {
    throw ShapeError("matrix too large for the binary container");
  }
  std::string out(kMagic);
  put_le(out, static_cast<std::uint32_t>(m.rows()));
  put_le(out, static_cast<std::uint32_t>(m.cols()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) put_le(out, m(i, j));
  }
  return out;
}

Matrix parse_matrix_binary(std::string_view bytes) {
  if (bytes.size() < 12 || bytes.substr(0, 4) != kMagic) {
    throw DataError("binary matrix: missing KBMF header");
  }
  const auto rows = get_le<std::uint32_t>(bytes, 4);
  const auto cols = get_le<std::uint32_t>(bytes, 8);
  const std::size_t expected = 12 + static_cast<std::size_t>(rows) * cols * sizeof(double);
  if (bytes.size() != expected) {
    throw DataError("binary matrix: expected " + std::to_string(expected) + " bytes, found " +
                    std::to_string(bytes.size()));
  }
  Matrix m(rows, cols);
  std::size_t offset = 12;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      m(i, j) = get_le<double>(bytes, offset);
      offset += sizeof(double);
    }
  }
  return m;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw ConfigError("short write to '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

Matrix read_matrix(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    if (bytes.size() >= 4 && std::string_view(bytes).substr(0, 4) == kMagic) {
      return parse_matrix_binary(bytes);
    }
    return parse_matrix_csv(bytes);
  } catch (const DataError& err) {
    throw DataError(path.string() + ": " + err.what());
  }
}

void write_matrix(const std::filesystem::path& path, const Matrix& m, bool binary) {
  write_file_atomic(path, binary ? matrix_to_binary(m) : matrix_to_csv(m));
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  const auto text = read_file(path);
  const auto base = path.parent_path();
  std::vector<ManifestEntry> entries;
  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string_view::npos) {
      throw ConfigError(path.string() + ": manifest lines must be 'name,path'");
    }
    ManifestEntry e;
    e.name = std::string(trim(line.substr(0, comma)));
    std::filesystem::path p(std::string(trim(line.substr(comma + 1))));
    e.path = p.is_relative() ? base / p : p;
    if (!std::filesystem::exists(e.path)) {
      throw ConfigError("kernel file not found: '" + e.path.string() + "'");
    }
    entries.push_back(std::move(e));
  }
  if (entries.empty()) throw ConfigError(path.string() + ": manifest lists no kernels");
  return entries;
}

KernelBundle load_bundle(const std::filesystem::path& manifest) {
  KernelBundle bundle;
  for (auto& e : read_manifest(manifest)) bundle.add(read_matrix(e.path), e.name);
  return bundle;
}

CrossKernelBundle load_cross_bundle(const std::filesystem::path& manifest) {
  std::vector<Matrix> matrices;
  for (auto& e : read_manifest(manifest)) matrices.push_back(read_matrix(e.path));
  return CrossKernelBundle(std::move(matrices));
}

}  // namespace kbmf
