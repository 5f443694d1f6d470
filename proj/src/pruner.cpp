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

#include "cacp/pruner.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "cacp/binary_io.hpp"
#include "cacp/error.hpp"
#include "json.hpp"

namespace cacp {

using json = nlohmann::json;
using RowMajorMatrixXf = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::vector<double> ChannelImportance(const LayerNode& layer) {
  const Eigen::Map<const RowMajorMatrixXf> w(layer.weights.data.data(), layer.out_channels,
                                             layer.fan_in());
  const Eigen::VectorXd scores = w.cast<double>().cwiseAbs().rowwise().sum();
  return {scores.data(), scores.data() + scores.size()};
}

std::int64_t RateToKeepCount(std::int64_t out_channels, double alpha) {
  const auto keep = static_cast<std::int64_t>(std::floor((1.0 - alpha) * static_cast<double>(out_channels)));
  return std::clamp<std::int64_t>(keep, 1, out_channels);
}

std::vector<std::int64_t> SelectChannels(std::span<const double> scores, std::int64_t keep) {
  std::vector<std::int64_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::int64_t a, std::int64_t b) { return scores[a] > scores[b]; });
  order.resize(static_cast<std::size_t>(std::clamp<std::int64_t>(keep, 0, std::ssize(scores))));
  std::sort(order.begin(), order.end());
  return order;
}

namespace {

// Gathers `index` along axis 0 or 1 of a weight tensor viewed as [d0, d1, rest].
TensorBlob GatherAxis(const TensorBlob& blob, int axis, std::span<const std::int64_t> index) {
  const std::int64_t d0 = blob.shape[0];
  const std::int64_t d1 = blob.shape.size() > 1 ? blob.shape[1] : 1;
  const std::int64_t rest = blob.numel() / (d0 * d1);
  TensorBlob out;
  out.shape = blob.shape;
  out.shape[static_cast<std::size_t>(axis)] = std::ssize(index);
  out.data.reserve(static_cast<std::size_t>(out.numel()));
  if (axis == 0) {
    for (auto r : index) {
      auto first = blob.data.begin() + r * d1 * rest;
      out.data.insert(out.data.end(), first, first + d1 * rest);
    }
  } else {
    for (std::int64_t r = 0; r < d0; ++r) {
      for (auto c : index) {
        auto first = blob.data.begin() + (r * d1 + c) * rest;
        out.data.insert(out.data.end(), first, first + rest);
      }
    }
  }
  return out;
}

void CheckKept(const LayerNode& layer, std::span<const std::int64_t> kept) {
  if (kept.empty()) throw Error(ErrorCode::kEmptyLayer, layer.id + ": kept set is empty");
  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (kept[i] < 0 || kept[i] >= layer.out_channels) {
      throw Error(ErrorCode::kPlanMismatch, layer.id + ": kept index " + std::to_string(kept[i]) +
                                                " out of range [0, " +
                                                std::to_string(layer.out_channels) + ")");
    }
    if (i > 0 && kept[i] <= kept[i - 1]) {
      throw Error(ErrorCode::kPlanMismatch, layer.id + ": kept indices not strictly increasing");
    }
  }
  if (!layer.prunable_out && std::ssize(kept) != layer.out_channels) {
    throw Error(ErrorCode::kPlanMismatch, layer.id + ": layer is not output-prunable");
  }
}

}  // namespace

ModelGraph PruneLayerOutputs(const ModelGraph& graph, std::size_t l,
                             std::span<const std::int64_t> kept) {
  if (l >= graph.layers.size()) throw Error(ErrorCode::kPlanMismatch, "layer index out of range");
  CheckKept(graph.layers[l], kept);
  ModelGraph out = graph;
  if (std::ssize(kept) == graph.layers[l].out_channels) return out;

  LayerNode& layer = out.layers[l];
  layer.weights = GatherAxis(layer.weights, 0, kept);
  layer.bias = GatherAxis(layer.bias, 0, kept);
  layer.out_channels = std::ssize(kept);
  if (l + 1 < out.layers.size()) {
    LayerNode& next = out.layers[l + 1];
    next.weights = GatherAxis(next.weights, 1, kept);
    next.in_channels = std::ssize(kept);
  }
  return out;
}

PruningPlan IdentityPlan(const ModelGraph& graph) {
  PruningPlan plan;
  for (const auto& layer : graph.layers) {
    PlanEntry e{layer.id, 0.0, std::vector<std::int64_t>(static_cast<std::size_t>(layer.out_channels))};
    std::iota(e.kept.begin(), e.kept.end(), 0);
    plan.layers.push_back(std::move(e));
  }
  return plan;
}

void CheckPlan(const ModelGraph& graph, const PruningPlan& plan) {
  if (plan.layers.size() != graph.layers.size()) {
    throw Error(ErrorCode::kPlanMismatch, "plan has " + std::to_string(plan.layers.size()) +
                                              " entries for " +
                                              std::to_string(graph.layers.size()) + " layers");
  }
  for (std::size_t i = 0; i < plan.layers.size(); ++i) {
    if (plan.layers[i].id != graph.layers[i].id) {
      throw Error(ErrorCode::kPlanMismatch, "plan entry '" + plan.layers[i].id +
                                                "' does not match layer '" +
                                                graph.layers[i].id + "'");
    }
    CheckKept(graph.layers[i], plan.layers[i].kept);
  }
}

ModelGraph ApplyPlan(const ModelGraph& graph, const PruningPlan& plan) {
  CheckPlan(graph, plan);
  ModelGraph out = graph;
  for (std::size_t i = 0; i < plan.layers.size(); ++i) {
    out = PruneLayerOutputs(out, i, plan.layers[i].kept);
  }
  return out;
}

ModelGraph ZeroDroppedChannels(const ModelGraph& graph, const PruningPlan& plan) {
  CheckPlan(graph, plan);
  ModelGraph out = graph;
  for (std::size_t i = 0; i < plan.layers.size(); ++i) {
    LayerNode& layer = out.layers[i];
    std::vector<bool> keep(static_cast<std::size_t>(layer.out_channels), false);
    for (auto k : plan.layers[i].kept) keep[static_cast<std::size_t>(k)] = true;
    const std::int64_t fan_in = layer.fan_in();
    for (std::int64_t c = 0; c < layer.out_channels; ++c) {
      if (keep[static_cast<std::size_t>(c)]) continue;
      std::fill_n(layer.weights.data.begin() + c * fan_in, fan_in, 0.0f);
      layer.bias.data[static_cast<std::size_t>(c)] = 0.0f;
    }
  }
  return out;
}

std::string PlanToJson(const PruningPlan& plan) {
  json layers = json::array();
  for (const auto& e : plan.layers) {
    layers.push_back({{"id", e.id}, {"alpha", e.alpha}, {"kept", e.kept}});
  }
  return json{{"beta", plan.beta}, {"layers", std::move(layers)}}.dump(1) + "\n";
}

PruningPlan PlanFromJson(std::string_view text) {
  try {
    const json doc = json::parse(text);
    PruningPlan plan;
    plan.beta = doc.at("beta").get<double>();
    for (const json& e : doc.at("layers")) {
      plan.layers.push_back({e.at("id").get<std::string>(), e.at("alpha").get<double>(),
                             e.at("kept").get<std::vector<std::int64_t>>()});
    }
    return plan;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kPlanMismatch, std::string("malformed plan: ") + e.what());
  }
}

void SavePlan(const PruningPlan& plan, const std::filesystem::path& path) {
  io::WriteFile(path, PlanToJson(plan));
}

PruningPlan LoadPlan(const std::filesystem::path& path) { return PlanFromJson(io::ReadFile(path)); }

}  // namespace cacp
