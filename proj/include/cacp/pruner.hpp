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

#ifndef CACP_PRUNER_HPP_
#define CACP_PRUNER_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cacp/model.hpp"

namespace cacp {

struct PlanEntry {
  std::string id;
  double alpha = 0.0;
  /// Kept output-channel indices of the original layer, strictly increasing.
  std::vector<std::int64_t> kept;

  friend bool operator==(const PlanEntry&, const PlanEntry&) = default;
};

/// One entry per layer of the graph, in chain order.
struct PruningPlan {
  double beta = 0.0;
  std::vector<PlanEntry> layers;

  friend bool operator==(const PruningPlan&, const PruningPlan&) = default;
};

/// L1 norm of each output channel's weights (bias excluded).
std::vector<double> ChannelImportance(const LayerNode& layer);

/// max(1, floor((1 - alpha) * out_channels)).
std::int64_t RateToKeepCount(std::int64_t out_channels, double alpha);

/// Indices of the `keep` highest scores, lower index winning ties, sorted ascending.
std::vector<std::int64_t> SelectChannels(std::span<const double> scores, std::int64_t keep);

/// Keeps only `kept` outputs of layer `l` and the matching input slices of layer l + 1.
ModelGraph PruneLayerOutputs(const ModelGraph& graph, std::size_t l,
                             std::span<const std::int64_t> kept);

/// Plan that keeps every channel of every layer.
PruningPlan IdentityPlan(const ModelGraph& graph);

/// Checks a plan against a graph, throwing PlanMismatch or EmptyLayer.
void CheckPlan(const ModelGraph& graph, const PruningPlan& plan);

/// Produces the compressed graph. Throws PlanMismatch or EmptyLayer.
ModelGraph ApplyPlan(const ModelGraph& graph, const PruningPlan& plan);

/// Same shapes as `graph`, but every channel the plan drops has its filter and
/// bias set to zero. Logits of this graph equal those of ApplyPlan(graph, plan).
ModelGraph ZeroDroppedChannels(const ModelGraph& graph, const PruningPlan& plan);

std::string PlanToJson(const PruningPlan& plan);
PruningPlan PlanFromJson(std::string_view text);
void SavePlan(const PruningPlan& plan, const std::filesystem::path& path);
PruningPlan LoadPlan(const std::filesystem::path& path);

}  // namespace cacp

#endif  // CACP_PRUNER_HPP_
