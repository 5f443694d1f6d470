/* Copyright 2026 The CACP Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "cacp/binary_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "cacp/error.hpp"

namespace cacp::io {

void AppendFloatsLE(std::string& out, std::span<const float> values) {
  const std::size_t start = out.size();
  out.resize(start + values.size() * 4);
  char* dst = out.data() + start;
  for (float v : values) {
    const auto bits = std::bit_cast<std::uint32_t>(v);
    dst[0] = static_cast<char>(bits & 0xFF);
    dst[1] = static_cast<char>((bits >> 8) & 0xFF);
    dst[2] = static_cast<char>((bits >> 16) & 0xFF);
    dst[3] = static_cast<char>((bits >> 24) & 0xFF);
    dst += 4;
  }
}

bool DecodeFloatsLE(std::string_view bytes, std::size_t offset, std::size_t count,
                    std::vector<float>& out) {
  if (offset > bytes.size() || (bytes.size() - offset) / 4 < count) return false;
  out.resize(count);
  const auto* src = reinterpret_cast<const unsigned char*>(bytes.data() + offset);
  for (std::size_t i = 0; i < count; ++i, src += 4) {
    const std::uint32_t bits = static_cast<std::uint32_t>(src[0]) |
                               (static_cast<std::uint32_t>(src[1]) << 8) |
                               (static_cast<std::uint32_t>(src[2]) << 16) |
                               (static_cast<std::uint32_t>(src[3]) << 24);
    out[i] = std::bit_cast<float>(bits);
  }
  return true;
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::kIoFailure, "read failed: " + path.string());
  return std::move(ss).str();
}

void WriteFile(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot open for writing: " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.flush();
  if (!out) throw Error(ErrorCode::kIoFailure, "write failed: " + path.string());
}

std::vector<float> ReadFloatBlob(const std::filesystem::path& path) {
  const std::string bytes = ReadFile(path);
  if (bytes.size() % 4 != 0) {
    throw Error(ErrorCode::kShapeMismatch, "blob size is not a multiple of 4: " + path.string());
  }
  std::vector<float> values;
  DecodeFloatsLE(bytes, 0, bytes.size() / 4, values);
  return values;
}

void WriteFloatBlob(const std::filesystem::path& path, std::span<const float> values) {
  std::string bytes;
  AppendFloatsLE(bytes, values);
  WriteFile(path, bytes);
}

}  // namespace cacp::io
