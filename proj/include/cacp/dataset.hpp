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

#ifndef CACP_DATASET_HPP_
#define CACP_DATASET_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace cacp {

enum class SplitTag { kTrainProxy, kValidation };

/// Samples stored back to back, each `input_shape` in row-major [c, h, w].
struct LabeledDataset {
  std::array<std::int64_t, 3> input_shape{1, 1, 1};
  std::int64_t num_classes = 1;
  std::vector<float> inputs;
  std::vector<std::int64_t> labels;
  SplitTag split = SplitTag::kValidation;

  std::size_t size() const { return labels.size(); }
  std::int64_t sample_size() const { return input_shape[0] * input_shape[1] * input_shape[2]; }
  const float* sample(std::size_t i) const {
    return inputs.data() + static_cast<std::ptrdiff_t>(i) * sample_size();
  }
  friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;
};

/// Returns an empty string when all dataset invariants hold, else the first violation.
std::string CheckDataset(const LabeledDataset& dataset);

LabeledDataset LoadDataset(const std::filesystem::path& manifest_path);
void SaveDataset(const LabeledDataset& dataset, const std::filesystem::path& manifest_path);

}  // namespace cacp

#endif  // CACP_DATASET_HPP_
