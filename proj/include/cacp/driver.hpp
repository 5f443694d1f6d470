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

#ifndef CACP_DRIVER_HPP_
#define CACP_DRIVER_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cacp/cost.hpp"
#include "cacp/dataset.hpp"
#include "cacp/model.hpp"
#include "cacp/policy.hpp"
#include "cacp/pruner.hpp"
#include "cacp/rate.hpp"

namespace cacp {

struct PolicyHyperparams {
  int hidden = 64;
  double lr_actor = 1e-4;
  double lr_critic = 1e-3;
  double discount = 0.0;
  double tau = 0.01;
  std::size_t batch_size = 64;
  std::size_t buffer_size = 2000;
  double sigma_init = 0.5;
  double sigma_decay = 0.99;
  int updates_per_episode = 20;
  double preact_penalty = 1e-2;
};

struct TrainConfig {
  std::vector<Rate> beta_support{Rate(3, 10), Rate(5, 10), Rate(7, 10)};
  Rate alpha_max{4, 5};
  int episodes = 400;
  int warmup_episodes = 50;
  std::uint64_t seed = 0;
  int jobs = 1;
  PolicyHyperparams policy;
};

/// Throws InvalidConfig for a malformed config and InfeasibleBudget when a
/// support rate cannot be met on `graph`.
void CheckTrainConfig(const TrainConfig& config, const ModelGraph& graph);

/// Supplies the un-clamped rate for the prunable layer at `layer_index`.
using RateProposer = std::function<double(const LayerState& state, std::size_t layer_index)>;

struct EpisodeResult {
  PruningPlan plan;
  ModelGraph compressed;
  double accuracy = 0.0;
  double reward = 0.0;
  /// One per prunable layer, terminal reward broadcast.
  std::vector<Transition> transitions;
  /// Ledger after initialization and after every layer decision.
  std::vector<BudgetLedger> ledgers;
  Macs c_all;
  Macs achieved;
  /// Sum over prunable layers of C_l / (C_all * out_channels_l), evaluated
  /// when the layer was decided.
  double rounding_slack = 0.0;

  double reduction() const;
};

/// Walks the layers once: featurize, propose, clamp to the budget floor,
/// discretize, select by L1, prune, advance the ledger. Evaluates the reward
/// on `dataset` when given (reward 0 otherwise).
EpisodeResult RunEpisode(const ModelGraph& graph, const LabeledDataset* dataset, const Rate& beta,
                         const Rate& alpha_max, const RateProposer& propose);

/// Policy-driven episode; noise is added only when `explore_rng` is non-null.
EpisodeResult RunEpisode(const ModelGraph& graph, const LabeledDataset* dataset,
                         const PolicyParams& theta, const Rate& beta, Rng* explore_rng);

struct EpisodeRecord {
  int episode = 0;
  double beta = 0.0;
  double reward = 0.0;
  double flops_drop_pct = 0.0;
  double sigma = 0.0;
};

std::string ToJsonLine(const EpisodeRecord& record);

struct TrainResult {
  PolicyParams theta;
  std::vector<EpisodeRecord> log;
};

/// Conditional training: each episode draws beta uniformly from the support,
/// so one set of parameters serves every rate.
TrainResult Train(const ModelGraph& graph, const LabeledDataset& dataset, const TrainConfig& config,
                  const std::function<void(const EpisodeRecord&)>& on_episode = {});

struct CompressionReport {
  double beta = 0.0;
  std::string method;  // "cacp", "uniform", "oracle"
  double accuracy = 0.0;
  double base_accuracy = 0.0;
  double flops_drop_pct = 0.0;
  double params_drop_pct = 0.0;
  double rounding_slack = 0.0;
  PruningPlan plan;
};

CompressionReport MakeReport(const ModelGraph& original, const ModelGraph& compressed,
                             const PruningPlan& plan, std::string method, double accuracy,
                             double base_accuracy, double rounding_slack);

struct Compressed {
  ModelGraph graph;
  CompressionReport report;
};

/// Inference mode: one deterministic policy pass for target rate `beta`.
Compressed Compress(const ModelGraph& graph, const LabeledDataset& dataset,
                    const PolicyParams& theta, const Rate& beta);

/// Fixed-rate baseline: every prunable layer gets alpha = beta.
Compressed BaselineUniform(const ModelGraph& graph, const LabeledDataset& dataset, double beta);

struct OracleResult {
  PruningPlan plan;
  double reward = 0.0;
  std::vector<double> rates;
};

/// Exhaustive search over per-layer rates from `grid` (prunable layers only),
/// keeping assignments whose discretized reduction reaches beta. Highest
/// reward wins; ties go to the lexicographically smallest rate vector.
/// Throws NoFeasibleAssignment, or InvalidConfig past 10^6 assignments.
OracleResult BruteForceOracle(const ModelGraph& graph, const LabeledDataset& dataset,
                              const Rate& beta, std::vector<double> grid);

/// Replays `plan` on `graph` to recover the rounding slack bound.
double RoundingSlack(const ModelGraph& graph, const PruningPlan& plan);

}  // namespace cacp

#endif  // CACP_DRIVER_HPP_
