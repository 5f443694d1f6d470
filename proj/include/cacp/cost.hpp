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

#ifndef CACP_COST_HPP_
#define CACP_COST_HPP_

#include <compare>
#include <cstdint>
#include <vector>

#include "cacp/model.hpp"
#include "cacp/rate.hpp"

namespace cacp {

/// Count of multiply-accumulate operations.
class Macs {
 public:
  constexpr Macs() = default;
  constexpr explicit Macs(std::uint64_t value) : value_(value) {}

  constexpr std::uint64_t value() const { return value_; }

  constexpr Macs& operator+=(Macs other) {
    value_ += other.value_;
    return *this;
  }
  friend constexpr Macs operator+(Macs a, Macs b) { return Macs(a.value_ + b.value_); }
  /// Requires a >= b.
  friend constexpr Macs operator-(Macs a, Macs b) { return Macs(a.value_ - b.value_); }
  friend constexpr auto operator<=>(Macs, Macs) = default;

 private:
  std::uint64_t value_ = 0;
};

/// MACs of `layer` when it sees `in_ch` inputs and produces `out_ch` outputs.
/// Conv2D: k^2 * in * out * s^2 with s the output side. Dense: in * out.
Macs LayerCost(const LayerNode& layer, std::int64_t in_ch, std::int64_t out_ch);
inline Macs LayerCost(const LayerNode& layer) {
  return LayerCost(layer, layer.in_channels, layer.out_channels);
}

std::vector<Macs> LayerCosts(const ModelGraph& graph);
Macs TotalCost(const ModelGraph& graph);

/// Weight plus bias element count over all layers.
std::uint64_t ParamsCount(const ModelGraph& graph);

/// A signed cost known exactly as num/den (den > 0).
struct ExactCost {
  __int128 num = 0;
  __int128 den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool is_positive() const { return num > 0; }
};

/// Per-episode cost bookkeeping for the budget floor.
///
/// `current_costs` always describes the evolving graph: pruning a layer's
/// outputs also shrinks the next layer's inputs, and that saving is picked
/// up when costs are recounted on advance. With this convention
///   c_all == c_reduced + sum(current_costs[0..cursor]) + c_rest
/// holds exactly at every step.
struct BudgetLedger {
  Rate beta;
  Rate alpha_max;
  Macs c_all;
  std::vector<Macs> current_costs;
  std::vector<bool> prunable;
  std::size_t cursor = 0;
  Macs c_reduced;
  /// Current cost of every layer strictly after the cursor.
  Macs c_rest;
  /// Current cost of the output-prunable layers strictly after the cursor.
  /// Only these can still be cut at up to alpha_max, so the floor uses them.
  Macs c_rest_prunable;

  std::size_t num_layers() const { return current_costs.size(); }
  /// Sum of current_costs over [0, cursor] (clamped to the last layer).
  Macs decided_cost() const;
  bool conserved() const;
};

/// Throws InvalidRate unless 0 < beta < 1 and 0 < alpha_max <= 1.
void CheckRates(const Rate& beta, const Rate& alpha_max);

BudgetLedger LedgerInit(const ModelGraph& graph, const Rate& beta, const Rate& alpha_max);

/// beta * c_all - alpha_max * c_rest - c_reduced, exactly.
ExactCost MinReduction(const Rate& beta, const Rate& alpha_max, Macs c_all, Macs c_rest,
                       Macs c_reduced);
/// The floor for layer `l`, which must be the ledger cursor (CursorMismatch otherwise).
ExactCost MinReduction(const BudgetLedger& ledger, std::size_t l);

/// max(proposed, D_l / C_l) clipped to [0, alpha_max]. Throws InfeasibleBudget
/// when D_l / C_l exceeds alpha_max.
double ClampRate(const BudgetLedger& ledger, std::size_t l, double proposed);

/// Largest number of output channels layer `l` may keep while still cutting at
/// least D_l of its cost (out_channels when no floor binds). May be zero.
std::int64_t BudgetKeepCap(const BudgetLedger& ledger, std::size_t l, std::int64_t out_channels);

/// Recounts costs on `achieved` (the graph after deciding layer `l`) and moves
/// the cursor to l + 1.
BudgetLedger LedgerAdvance(const BudgetLedger& ledger, std::size_t l, const ModelGraph& achieved);

/// Fails fast with InfeasibleBudget when beta exceeds alpha_max times the
/// output-prunable cost fraction of `graph`.
void CheckFeasible(const ModelGraph& graph, const Rate& beta, const Rate& alpha_max);

/// (c_all - total) / c_all as an exact comparison against `beta`.
bool MeetsBudget(Macs c_all, Macs achieved_total, const Rate& beta);

}  // namespace cacp

#endif  // CACP_COST_HPP_
