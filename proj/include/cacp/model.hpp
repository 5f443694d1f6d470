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

#ifndef CACP_MODEL_HPP_
#define CACP_MODEL_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace cacp {

/// Flat row-major float32 storage with an explicit shape.
struct TensorBlob {
  std::vector<std::int64_t> shape;
  std::vector<float> data;

  std::int64_t numel() const;
  friend bool operator==(const TensorBlob&, const TensorBlob&) = default;
};

enum class LayerKind { kConv2D, kDense };
enum class Activation { kReLU, kIdentity };

std::string ToString(LayerKind kind);
std::string ToString(Activation act);

/// One node of the layer chain. Conv2D weights are [out, in, k, k] and
/// Dense weights [out, in]; bias is [out]. `out_spatial` is the square output
/// side length (1 for Dense).
struct LayerNode {
  std::string id;
  LayerKind kind = LayerKind::kConv2D;
  std::int64_t in_channels = 1;
  std::int64_t out_channels = 1;
  std::int64_t kernel = 1;
  std::int64_t stride = 1;
  std::int64_t out_spatial = 1;
  TensorBlob weights;
  TensorBlob bias;
  Activation activation = Activation::kReLU;
  bool prunable_out = true;

  /// Number of weights feeding one output channel (in * k * k, or in).
  std::int64_t fan_in() const { return in_channels * kernel * kernel; }
  friend bool operator==(const LayerNode&, const LayerNode&) = default;
};

/// Linear chain of layers. Immutable by convention: every transform returns
/// a new graph.
struct ModelGraph {
  std::vector<LayerNode> layers;
  std::array<std::int64_t, 3> input_shape{1, 1, 1};  // channels, height, width
  std::int64_t num_classes = 1;

  std::size_t size() const { return layers.size(); }
  friend bool operator==(const ModelGraph&, const ModelGraph&) = default;
};

/// A validation finding; `layer_id` is empty for graph-level problems.
struct Diagnostic {
  std::string layer_id;
  std::string message;
};

/// Checks every structural invariant of the graph. Never throws.
std::vector<Diagnostic> ValidateGraph(const ModelGraph& graph);

/// Reads a JSON manifest plus its companion blob of little-endian float32.
/// Throws Error{MalformedManifest, ShapeMismatch, ChainBroken, IoFailure}.
ModelGraph LoadModel(const std::filesystem::path& manifest_path);

/// Writes `<stem>.json` at `manifest_path` and the blob next to it as `<stem>.bin`.
void SaveModel(const ModelGraph& graph, const std::filesystem::path& manifest_path);

/// Builds a layer with zero-filled tensors of the right shapes.
LayerNode MakeLayer(std::string id, LayerKind kind, std::int64_t in_channels,
                    std::int64_t out_channels, std::int64_t kernel, std::int64_t stride,
                    std::int64_t out_spatial, Activation act, bool prunable_out);

}  // namespace cacp

#endif  // CACP_MODEL_HPP_
