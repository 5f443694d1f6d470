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

#ifndef CACP_BINARY_IO_HPP_
#define CACP_BINARY_IO_HPP_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace cacp::io {

// Raw little-endian float32 blobs shared by the model, dataset and policy formats.

std::vector<float> ReadFloatBlob(const std::filesystem::path& path);
void WriteFloatBlob(const std::filesystem::path& path, std::span<const float> values);

void AppendFloatsLE(std::string& out, std::span<const float> values);
/// Decodes `count` floats starting at byte `offset`; returns false if `bytes` is too short.
bool DecodeFloatsLE(std::string_view bytes, std::size_t offset, std::size_t count,
                    std::vector<float>& out);

std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, std::string_view contents);

}  // namespace cacp::io

#endif  // CACP_BINARY_IO_HPP_
