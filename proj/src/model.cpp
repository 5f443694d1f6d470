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

#include "cacp/model.hpp"

#include <cmath>
#include <set>

#include "cacp/binary_io.hpp"
#include "cacp/error.hpp"
#include "json.hpp"

namespace cacp {

using json = nlohmann::json;

std::int64_t TensorBlob::numel() const {
  std::int64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string ToString(LayerKind kind) { return kind == LayerKind::kConv2D ? "Conv2D" : "Dense"; }
std::string ToString(Activation act) { return act == Activation::kReLU ? "ReLU" : "Identity"; }

LayerNode MakeLayer(std::string id, LayerKind kind, std::int64_t in_channels,
                    std::int64_t out_channels, std::int64_t kernel, std::int64_t stride,
                    std::int64_t out_spatial, Activation act, bool prunable_out) {
  LayerNode layer;
  layer.id = std::move(id);
  layer.kind = kind;
  layer.in_channels = in_channels;
  layer.out_channels = out_channels;
  layer.kernel = kind == LayerKind::kDense ? 1 : kernel;
  layer.stride = kind == LayerKind::kDense ? 1 : stride;
  layer.out_spatial = kind == LayerKind::kDense ? 1 : out_spatial;
  layer.activation = act;
  layer.prunable_out = prunable_out;
  if (kind == LayerKind::kConv2D) {
    layer.weights.shape = {out_channels, in_channels, layer.kernel, layer.kernel};
  } else {
    layer.weights.shape = {out_channels, in_channels};
  }
  layer.weights.data.assign(static_cast<std::size_t>(layer.weights.numel()), 0.0f);
  layer.bias.shape = {out_channels};
  layer.bias.data.assign(static_cast<std::size_t>(out_channels), 0.0f);
  return layer;
}

namespace {

void CheckBlob(const LayerNode& layer, const TensorBlob& blob, const char* what,
               const std::vector<std::int64_t>& expected_shape, std::vector<Diagnostic>& out) {
  if (blob.shape != expected_shape) {
    std::string got;
    for (auto d : blob.shape) got += std::to_string(d) + ",";
    out.push_back({layer.id, std::string(what) + " shape [" + got + "] does not match layer"});
  }
  for (auto d : blob.shape) {
    if (d <= 0) {
      out.push_back({layer.id, std::string(what) + " has a non-positive dimension"});
      break;
    }
  }
  if (static_cast<std::int64_t>(blob.data.size()) != blob.numel()) {
    out.push_back({layer.id, std::string(what) + " element count " +
                                 std::to_string(blob.data.size()) + " != shape product " +
                                 std::to_string(blob.numel())});
  }
  for (std::size_t i = 0; i < blob.data.size(); ++i) {
    if (!std::isfinite(blob.data[i])) {
      out.push_back({layer.id, std::string(what) + " has a non-finite value at " +
                                   std::to_string(i)});
      break;
    }
  }
}

}  // namespace

std::vector<Diagnostic> ValidateGraph(const ModelGraph& graph) {
  std::vector<Diagnostic> out;
  if (graph.layers.empty()) {
    out.push_back({"", "graph has no layers"});
    return out;
  }
  const auto [in_c, in_h, in_w] = graph.input_shape;
  if (in_c <= 0 || in_h <= 0 || in_w <= 0) out.push_back({"", "input_shape must be positive"});
  if (in_h != in_w) out.push_back({"", "input must be square"});
  if (graph.num_classes <= 0) out.push_back({"", "num_classes must be positive"});

  std::set<std::string> ids;
  std::int64_t prev_channels = in_c;
  std::int64_t prev_spatial = in_h;
  for (std::size_t i = 0; i < graph.layers.size(); ++i) {
    const LayerNode& layer = graph.layers[i];
    if (layer.id.empty()) out.push_back({layer.id, "layer " + std::to_string(i) + " has empty id"});
    if (!ids.insert(layer.id).second) out.push_back({layer.id, "duplicate layer id"});
    if (layer.in_channels <= 0 || layer.out_channels <= 0 || layer.kernel <= 0 ||
        layer.stride <= 0 || layer.out_spatial <= 0) {
      out.push_back({layer.id, "channel, kernel, stride and spatial sizes must be positive"});
    }
    if (layer.in_channels != prev_channels) {
      out.push_back({layer.id, "in_channels " + std::to_string(layer.in_channels) +
                                   " != upstream channels " + std::to_string(prev_channels)});
    }
    if (layer.kind == LayerKind::kConv2D) {
      CheckBlob(layer, layer.weights, "weights",
                {layer.out_channels, layer.in_channels, layer.kernel, layer.kernel}, out);
      if (layer.kernel > 0 && layer.stride > 0) {
        const std::int64_t expect =
            prev_spatial >= layer.kernel ? (prev_spatial - layer.kernel) / layer.stride + 1 : 0;
        if (expect != layer.out_spatial) {
          out.push_back({layer.id, "out_spatial " + std::to_string(layer.out_spatial) +
                                       " inconsistent with valid convolution of input side " +
                                       std::to_string(prev_spatial)});
        }
      }
    } else {
      CheckBlob(layer, layer.weights, "weights", {layer.out_channels, layer.in_channels}, out);
      if (layer.kernel != 1 || layer.stride != 1 || layer.out_spatial != 1) {
        out.push_back({layer.id, "Dense layer must have kernel, stride and out_spatial of 1"});
      }
      if (prev_spatial != 1) {
        out.push_back({layer.id, "Dense layer follows a spatial map of side " +
                                     std::to_string(prev_spatial) + " (must be 1)"});
      }
    }
    CheckBlob(layer, layer.bias, "bias", {layer.out_channels}, out);
    prev_channels = layer.out_channels;
    prev_spatial = layer.out_spatial;
  }

  const LayerNode& last = graph.layers.back();
  if (last.kind != LayerKind::kDense) out.push_back({last.id, "final layer must be Dense"});
  if (last.out_channels != graph.num_classes) {
    out.push_back({last.id, "final layer out_channels " + std::to_string(last.out_channels) +
                                " != num_classes " + std::to_string(graph.num_classes)});
  }
  if (last.activation != Activation::kIdentity) {
    out.push_back({last.id, "final layer activation must be Identity"});
  }
  if (last.prunable_out) out.push_back({last.id, "final layer must not be output-prunable"});
  return out;
}

namespace {

template <typename T>
T Field(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw Error(ErrorCode::kMalformedManifest, std::string("missing field '") + key + "'");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedManifest, std::string("field '") + key + "': " + e.what());
  }
}

LayerKind ParseKind(const std::string& s) {
  if (s == "Conv2D") return LayerKind::kConv2D;
  if (s == "Dense") return LayerKind::kDense;
  throw Error(ErrorCode::kMalformedManifest, "unknown layer kind '" + s + "'");
}

Activation ParseActivation(const std::string& s) {
  if (s == "ReLU") return Activation::kReLU;
  if (s == "Identity") return Activation::kIdentity;
  throw Error(ErrorCode::kMalformedManifest, "unknown activation '" + s + "'");
}

void Slice(const std::vector<float>& blob, std::int64_t offset, std::int64_t len,
           const std::string& what, TensorBlob& dst) {
  if (len != dst.numel()) {
    throw Error(ErrorCode::kShapeMismatch, what + ": length " + std::to_string(len) +
                                               " != shape product " +
                                               std::to_string(dst.numel()));
  }
  if (offset < 0 || len < 0 || offset + len > static_cast<std::int64_t>(blob.size())) {
    throw Error(ErrorCode::kShapeMismatch, what + ": range exceeds blob of " +
                                               std::to_string(blob.size()) + " values");
  }
  dst.data.assign(blob.begin() + offset, blob.begin() + offset + len);
}

}  // namespace

ModelGraph LoadModel(const std::filesystem::path& manifest_path) {
  json doc;
  try {
    doc = json::parse(io::ReadFile(manifest_path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedManifest, manifest_path.string() + ": " + e.what());
  }
  if (Field<int>(doc, "version") != 1) {
    throw Error(ErrorCode::kMalformedManifest, "unsupported manifest version");
  }
  ModelGraph graph;
  const auto shape = Field<std::vector<std::int64_t>>(doc, "input_shape");
  if (shape.size() != 3) throw Error(ErrorCode::kMalformedManifest, "input_shape must have 3 dims");
  graph.input_shape = {shape[0], shape[1], shape[2]};
  graph.num_classes = Field<std::int64_t>(doc, "num_classes");
  const auto blob_name = Field<std::string>(doc, "blob_file");
  const auto layers = Field<json>(doc, "layers");
  if (!layers.is_array()) throw Error(ErrorCode::kMalformedManifest, "'layers' must be an array");

  const std::vector<float> blob = io::ReadFloatBlob(manifest_path.parent_path() / blob_name);
  for (const json& entry : layers) {
    LayerNode layer = MakeLayer(
        Field<std::string>(entry, "id"), ParseKind(Field<std::string>(entry, "kind")),
        Field<std::int64_t>(entry, "in_channels"), Field<std::int64_t>(entry, "out_channels"),
        Field<std::int64_t>(entry, "kernel"), Field<std::int64_t>(entry, "stride"),
        Field<std::int64_t>(entry, "out_spatial"),
        ParseActivation(Field<std::string>(entry, "activation")),
        Field<bool>(entry, "prunable_out"));
    if (layer.in_channels <= 0 || layer.out_channels <= 0 || layer.kernel <= 0) {
      throw Error(ErrorCode::kMalformedManifest, layer.id + ": non-positive dimension");
    }
    Slice(blob, Field<std::int64_t>(entry, "weights_offset"),
          Field<std::int64_t>(entry, "weights_len"), layer.id + " weights", layer.weights);
    Slice(blob, Field<std::int64_t>(entry, "bias_offset"), Field<std::int64_t>(entry, "bias_len"),
          layer.id + " bias", layer.bias);
    graph.layers.push_back(std::move(layer));
  }

  std::int64_t prev = graph.input_shape[0];
  for (const auto& layer : graph.layers) {
    if (layer.in_channels != prev) {
      throw Error(ErrorCode::kChainBroken, layer.id + ": in_channels " +
                                               std::to_string(layer.in_channels) +
                                               " != upstream " + std::to_string(prev));
    }
    prev = layer.out_channels;
  }
  if (auto diags = ValidateGraph(graph); !diags.empty()) {
    throw Error(ErrorCode::kMalformedManifest, diags.front().layer_id + ": " + diags.front().message);
  }
  return graph;
}

void SaveModel(const ModelGraph& graph, const std::filesystem::path& manifest_path) {
  std::filesystem::path blob_path = manifest_path;
  blob_path.replace_extension(".bin");

  json layers = json::array();
  std::string blob;
  std::int64_t offset = 0;
  for (const auto& layer : graph.layers) {
    json entry = {{"id", layer.id},
                  {"kind", ToString(layer.kind)},
                  {"in_channels", layer.in_channels},
                  {"out_channels", layer.out_channels},
                  {"kernel", layer.kernel},
                  {"stride", layer.stride},
                  {"out_spatial", layer.out_spatial},
                  {"activation", ToString(layer.activation)},
                  {"prunable_out", layer.prunable_out}};
    entry["weights_offset"] = offset;
    entry["weights_len"] = layer.weights.data.size();
    io::AppendFloatsLE(blob, layer.weights.data);
    offset += static_cast<std::int64_t>(layer.weights.data.size());
    entry["bias_offset"] = offset;
    entry["bias_len"] = layer.bias.data.size();
    io::AppendFloatsLE(blob, layer.bias.data);
    offset += static_cast<std::int64_t>(layer.bias.data.size());
    layers.push_back(std::move(entry));
  }
  json doc = {{"version", 1},
              {"input_shape", graph.input_shape},
              {"num_classes", graph.num_classes},
              {"layers", std::move(layers)},
              {"blob_file", blob_path.filename().string()}};
  io::WriteFile(blob_path, blob);
  io::WriteFile(manifest_path, doc.dump(2) + "\n");
}

}  // namespace cacp
