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

#include "cacp/driver.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "cacp/error.hpp"
#include "cacp/inference.hpp"
#include "json.hpp"

namespace cacp {

double EpisodeResult::reduction() const {
  if (c_all.value() == 0) return 0.0;
  return static_cast<double>((c_all - achieved).value()) / static_cast<double>(c_all.value());
}

void CheckTrainConfig(const TrainConfig& config, const ModelGraph& graph) {
  if (config.beta_support.empty()) throw Error(ErrorCode::kInvalidConfig, "beta support is empty");
  for (std::size_t i = 0; i < config.beta_support.size(); ++i) {
    if (i > 0 && !(config.beta_support[i - 1] < config.beta_support[i])) {
      throw Error(ErrorCode::kInvalidConfig, "beta support must be strictly increasing");
    }
    CheckFeasible(graph, config.beta_support[i], config.alpha_max);
  }
  if (config.episodes < 0 || config.warmup_episodes < 0) {
    throw Error(ErrorCode::kInvalidConfig, "episode counts must be non-negative");
  }
  if (config.jobs < 1) throw Error(ErrorCode::kInvalidConfig, "jobs must be at least 1");
  const auto& p = config.policy;
  if (p.hidden < 1 || p.batch_size < 1 || p.buffer_size < 1 || p.updates_per_episode < 0 ||
      !(p.tau >= 0.0 && p.tau <= 1.0) || p.lr_actor < 0.0 || p.lr_critic < 0.0 ||
      p.sigma_init < 0.0 || !(p.preact_penalty >= 0.0) ||
      !(p.discount >= 0.0 && p.discount <= 1.0) || !(p.sigma_decay > 0.0 && p.sigma_decay <= 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "policy hyperparameters out of range");
  }
}

EpisodeResult RunEpisode(const ModelGraph& graph, const LabeledDataset* dataset, const Rate& beta,
                         const Rate& alpha_max, const RateProposer& propose) {
  CheckFeasible(graph, beta, alpha_max);
  EpisodeResult result;
  BudgetLedger ledger = LedgerInit(graph, beta, alpha_max);
  result.ledgers.push_back(ledger);
  result.c_all = ledger.c_all;
  result.plan.beta = beta.value();

  ModelGraph current = graph;
  double prev_action = 0.0;
  const double c_all = static_cast<double>(ledger.c_all.value());
  for (std::size_t l = 0; l < graph.layers.size(); ++l) {
    const LayerNode& layer = current.layers[l];
    PlanEntry entry{layer.id, 0.0, {}};
    if (!layer.prunable_out) {
      entry.kept.resize(static_cast<std::size_t>(layer.out_channels));
      for (std::int64_t c = 0; c < layer.out_channels; ++c) entry.kept[static_cast<std::size_t>(c)] = c;
    } else {
      const LayerState state = Featurize(ledger, graph, current, l, prev_action, beta.value());
      const double proposed = std::clamp(propose(state, l), 0.0, alpha_max.value());
      const double alpha = ClampRate(ledger, l, proposed);
      const std::int64_t out = layer.out_channels;
      const std::int64_t keep =
          std::max<std::int64_t>(1, std::min(RateToKeepCount(out, alpha), BudgetKeepCap(ledger, l, out)));
      result.rounding_slack +=
          static_cast<double>(ledger.current_costs[l].value()) / (c_all * static_cast<double>(out));
      entry.alpha = alpha;
      entry.kept = SelectChannels(ChannelImportance(layer), keep);
      result.transitions.push_back({state, alpha, 0.0, std::nullopt, beta.value()});
      prev_action = alpha;
    }
    current = PruneLayerOutputs(current, l, entry.kept);
    ledger = LedgerAdvance(ledger, l, current);
    result.ledgers.push_back(ledger);
    result.plan.layers.push_back(std::move(entry));
  }

  result.achieved = TotalCost(current);
  result.compressed = std::move(current);
  if (dataset) result.accuracy = EvaluateAccuracy(result.compressed, *dataset);
  result.reward = Reward(result.accuracy);
  for (std::size_t i = 0; i < result.transitions.size(); ++i) {
    result.transitions[i].reward = result.reward;
    if (i + 1 < result.transitions.size()) {
      result.transitions[i].next_state = result.transitions[i + 1].state;
    }
  }
  return result;
}

EpisodeResult RunEpisode(const ModelGraph& graph, const LabeledDataset* dataset,
                         const PolicyParams& theta, const Rate& beta, Rng* explore_rng) {
  const Rate alpha_max = Rate::FromDouble(theta.alpha_max);
  return RunEpisode(graph, dataset, beta, alpha_max,
                    [&](const LayerState& state, std::size_t) {
                      const double a = Act(theta, state);
                      return explore_rng ? Explore(a, theta.sigma, theta.alpha_max, *explore_rng) : a;
                    });
}

std::string ToJsonLine(const EpisodeRecord& record) {
  const nlohmann::json j = {{"episode", record.episode},
                            {"beta", record.beta},
                            {"reward", record.reward},
                            {"flops_drop_pct", record.flops_drop_pct},
                            {"sigma", record.sigma}};
  return j.dump();
}

TrainResult Train(const ModelGraph& graph, const LabeledDataset& dataset, const TrainConfig& config,
                  const std::function<void(const EpisodeRecord&)>& on_episode) {
  CheckTrainConfig(config, graph);
  const auto& hp = config.policy;
  TrainResult out;
  out.theta = PolicyParams::Init(config.seed, config.alpha_max.value(), hp.hidden, hp.sigma_init);
  PolicyParams& theta = out.theta;
  ReplayBuffer buffer(hp.buffer_size);
  Rng master = DeriveRng(config.seed, 1);
  const UpdateSettings settings{hp.lr_actor, hp.lr_critic, hp.discount, hp.tau,
                                 hp.preact_penalty};
  const double alpha_max = config.alpha_max.value();

  struct Slot {
    int episode = 0;
    Rate beta;
    bool warm = false;
    EpisodeResult result;
  };
  // Episodes are generated in groups of `jobs` against the same parameters,
  // then folded into the replay buffer and updated in episode order.
  for (int start = 0; start < config.episodes; start += config.jobs) {
    const int count = std::min(config.jobs, config.episodes - start);
    std::vector<Slot> slots(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      auto& s = slots[static_cast<std::size_t>(i)];
      s.episode = start + i;
      s.beta = config.beta_support[UniformIndex(master, config.beta_support.size())];
      s.warm = s.episode < config.warmup_episodes;
    }
    auto run = [&](Slot& s) {
      Rng rng = DeriveRng(config.seed, 1000 + static_cast<std::uint64_t>(s.episode));
      if (s.warm) {
        s.result = RunEpisode(graph, &dataset, s.beta, config.alpha_max,
                              [&](const LayerState&, std::size_t) { return Uniform(rng, 0.0, alpha_max); });
      } else {
        s.result = RunEpisode(graph, &dataset, theta, s.beta, &rng);
      }
    };
    if (count == 1) {
      run(slots.front());
    } else {
      std::vector<std::thread> workers;
      for (auto& s : slots) workers.emplace_back(run, std::ref(s));
      for (auto& w : workers) w.join();
    }

    for (auto& s : slots) {
      for (auto& t : s.result.transitions) buffer.Push(std::move(t));
      if (!s.warm) {
        for (int u = 0; u < hp.updates_per_episode; ++u) {
          const auto batch = buffer.Sample(hp.batch_size, master);
          Update(theta, batch, settings);
        }
        theta.sigma *= hp.sigma_decay;
      }
      EpisodeRecord record{s.episode, s.beta.value(), s.result.reward,
                           100.0 * s.result.reduction(), theta.sigma};
      out.log.push_back(record);
      if (on_episode) on_episode(record);
    }
  }
  return out;
}

CompressionReport MakeReport(const ModelGraph& original, const ModelGraph& compressed,
                             const PruningPlan& plan, std::string method, double accuracy,
                             double base_accuracy, double rounding_slack) {
  CompressionReport r;
  r.beta = plan.beta;
  r.method = std::move(method);
  r.accuracy = accuracy;
  r.base_accuracy = base_accuracy;
  const auto c0 = static_cast<double>(TotalCost(original).value());
  const auto c1 = static_cast<double>(TotalCost(compressed).value());
  const auto p0 = static_cast<double>(ParamsCount(original));
  const auto p1 = static_cast<double>(ParamsCount(compressed));
  r.flops_drop_pct = c0 > 0 ? 100.0 * (c0 - c1) / c0 : 0.0;
  r.params_drop_pct = p0 > 0 ? 100.0 * (p0 - p1) / p0 : 0.0;
  r.rounding_slack = rounding_slack;
  r.plan = plan;
  return r;
}

Compressed Compress(const ModelGraph& graph, const LabeledDataset& dataset,
                    const PolicyParams& theta, const Rate& beta) {
  EpisodeResult ep = RunEpisode(graph, &dataset, theta, beta, nullptr);
  const double base = EvaluateAccuracy(graph, dataset);
  CompressionReport report =
      MakeReport(graph, ep.compressed, ep.plan, "cacp", ep.accuracy, base, ep.rounding_slack);
  return {std::move(ep.compressed), std::move(report)};
}

Compressed BaselineUniform(const ModelGraph& graph, const LabeledDataset& dataset, double beta) {
  if (!(beta >= 0.0 && beta < 1.0)) throw Error(ErrorCode::kInvalidRate, "beta must lie in [0, 1)");
  PruningPlan plan;
  plan.beta = beta;
  ModelGraph current = graph;
  for (std::size_t l = 0; l < graph.layers.size(); ++l) {
    const LayerNode& layer = current.layers[l];
    PlanEntry entry{layer.id, layer.prunable_out ? beta : 0.0, {}};
    const std::int64_t keep =
        layer.prunable_out ? RateToKeepCount(layer.out_channels, beta) : layer.out_channels;
    entry.kept = SelectChannels(ChannelImportance(layer), keep);
    current = PruneLayerOutputs(current, l, entry.kept);
    plan.layers.push_back(std::move(entry));
  }
  const double acc = EvaluateAccuracy(current, dataset);
  const double base = EvaluateAccuracy(graph, dataset);
  CompressionReport report =
      MakeReport(graph, current, plan, "uniform", acc, base, RoundingSlack(graph, plan));
  return {std::move(current), std::move(report)};
}

namespace {

struct OracleSearch {
  const LabeledDataset& dataset;
  const std::vector<double>& grid;
  const Rate& beta;
  Macs c_all;
  std::vector<double> rates;
  PruningPlan plan;
  bool found = false;
  OracleResult best;

  void Visit(const ModelGraph& current, std::size_t l) {
    if (l == current.layers.size()) {
      if (!MeetsBudget(c_all, TotalCost(current), beta)) return;
      const double reward = Reward(EvaluateAccuracy(current, dataset));
      if (!found || reward > best.reward) {
        found = true;
        best = {plan, reward, rates};
      }
      return;
    }
    const LayerNode& layer = current.layers[l];
    if (!layer.prunable_out) {
      PlanEntry entry{layer.id, 0.0, SelectChannels(ChannelImportance(layer), layer.out_channels)};
      plan.layers.push_back(entry);
      Visit(current, l + 1);
      plan.layers.pop_back();
      return;
    }
    const auto scores = ChannelImportance(layer);
    for (double rate : grid) {
      PlanEntry entry{layer.id, rate,
                      SelectChannels(scores, RateToKeepCount(layer.out_channels, rate))};
      const ModelGraph next = PruneLayerOutputs(current, l, entry.kept);
      plan.layers.push_back(std::move(entry));
      rates.push_back(rate);
      Visit(next, l + 1);
      rates.pop_back();
      plan.layers.pop_back();
    }
  }
};

}  // namespace

OracleResult BruteForceOracle(const ModelGraph& graph, const LabeledDataset& dataset,
                              const Rate& beta, std::vector<double> grid) {
  if (grid.empty()) throw Error(ErrorCode::kInvalidConfig, "oracle grid is empty");
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  for (double g : grid) {
    if (!(g >= 0.0 && g < 1.0)) throw Error(ErrorCode::kInvalidConfig, "grid rates must lie in [0, 1)");
  }
  double assignments = 1.0;
  for (const auto& layer : graph.layers) {
    if (layer.prunable_out) assignments *= static_cast<double>(grid.size());
  }
  if (assignments > 1e6) {
    throw Error(ErrorCode::kInvalidConfig, "oracle would enumerate more than 10^6 assignments");
  }
  OracleSearch search{dataset, grid, beta, TotalCost(graph), {}, {}, false, {}};
  search.plan.beta = beta.value();
  search.Visit(graph, 0);
  if (!search.found) {
    throw Error(ErrorCode::kNoFeasibleAssignment,
                "no grid assignment reaches beta " + beta.ToString());
  }
  return search.best;
}

double RoundingSlack(const ModelGraph& graph, const PruningPlan& plan) {
  CheckPlan(graph, plan);
  const auto c_all = static_cast<double>(TotalCost(graph).value());
  if (c_all <= 0.0) return 0.0;
  double slack = 0.0;
  ModelGraph current = graph;
  for (std::size_t l = 0; l < graph.layers.size(); ++l) {
    const LayerNode& layer = current.layers[l];
    if (layer.prunable_out) {
      slack += static_cast<double>(LayerCost(layer).value()) /
               (c_all * static_cast<double>(layer.out_channels));
    }
    current = PruneLayerOutputs(current, l, plan.layers[l].kept);
  }
  return slack;
}

}  // namespace cacp
