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

#include "cacp/dataset.hpp"

#include <cmath>

#include "cacp/binary_io.hpp"
#include "cacp/error.hpp"
#include "json.hpp"

namespace cacp {

using json = nlohmann::json;

std::string CheckDataset(const LabeledDataset& dataset) {
  for (auto d : dataset.input_shape) {
    if (d <= 0) return "input_shape must be positive";
  }
  if (dataset.num_classes <= 0) return "num_classes must be positive";
  if (static_cast<std::int64_t>(dataset.inputs.size()) !=
      static_cast<std::int64_t>(dataset.labels.size()) * dataset.sample_size()) {
    return "inputs and labels have different sample counts";
  }
  for (auto label : dataset.labels) {
    if (label < 0 || label >= dataset.num_classes) return "label out of range";
  }
  for (float v : dataset.inputs) {
    if (!std::isfinite(v)) return "non-finite input value";
  }
  return {};
}

LabeledDataset LoadDataset(const std::filesystem::path& manifest_path) {
  LabeledDataset ds;
  json doc;
  std::string blob_name;
  try {
    doc = json::parse(io::ReadFile(manifest_path));
    if (doc.at("version").get<int>() != 1) {
      throw Error(ErrorCode::kMalformedManifest, "unsupported dataset version");
    }
    const auto shape = doc.at("input_shape").get<std::vector<std::int64_t>>();
    if (shape.size() != 3) throw Error(ErrorCode::kMalformedManifest, "input_shape must have 3 dims");
    ds.input_shape = {shape[0], shape[1], shape[2]};
    ds.num_classes = doc.at("num_classes").get<std::int64_t>();
    blob_name = doc.at("blob_file").get<std::string>();
    ds.labels = doc.at("labels").get<std::vector<std::int64_t>>();
    if (doc.at("count").get<std::size_t>() != ds.labels.size()) {
      throw Error(ErrorCode::kMalformedManifest, "count does not match labels");
    }
    if (doc.contains("split") && doc.at("split").get<std::string>() == "train-proxy") {
      ds.split = SplitTag::kTrainProxy;
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedManifest, manifest_path.string() + ": " + e.what());
  }
  ds.inputs = io::ReadFloatBlob(manifest_path.parent_path() / blob_name);
  if (auto problem = CheckDataset(ds); !problem.empty()) {
    throw Error(ErrorCode::kShapeMismatch, manifest_path.string() + ": " + problem);
  }
  return ds;
}

void SaveDataset(const LabeledDataset& dataset, const std::filesystem::path& manifest_path) {
  std::filesystem::path blob_path = manifest_path;
  blob_path.replace_extension(".bin");
  json doc = {{"version", 1},
              {"input_shape", dataset.input_shape},
              {"num_classes", dataset.num_classes},
              {"count", dataset.labels.size()},
              {"split", dataset.split == SplitTag::kValidation ? "validation" : "train-proxy"},
              {"blob_file", blob_path.filename().string()},
              {"labels", dataset.labels}};
  io::WriteFloatBlob(blob_path, dataset.inputs);
  io::WriteFile(manifest_path, doc.dump() + "\n");
}

}  // namespace cacp
