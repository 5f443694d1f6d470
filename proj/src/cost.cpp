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

#include "cacp/cost.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cacp/error.hpp"

namespace cacp {

Macs LayerCost(const LayerNode& layer, std::int64_t in_ch, std::int64_t out_ch) {
  const auto in = static_cast<std::uint64_t>(std::max<std::int64_t>(in_ch, 0));
  const auto out = static_cast<std::uint64_t>(std::max<std::int64_t>(out_ch, 0));
  if (layer.kind == LayerKind::kDense) return Macs(in * out);
  const auto k = static_cast<std::uint64_t>(layer.kernel);
  const auto s = static_cast<std::uint64_t>(layer.out_spatial);
  return Macs(k * k * in * out * s * s);
}

std::vector<Macs> LayerCosts(const ModelGraph& graph) {
  std::vector<Macs> costs;
  costs.reserve(graph.layers.size());
  for (const auto& layer : graph.layers) costs.push_back(LayerCost(layer));
  return costs;
}

Macs TotalCost(const ModelGraph& graph) {
  Macs total;
  for (const auto& layer : graph.layers) total += LayerCost(layer);
  return total;
}

std::uint64_t ParamsCount(const ModelGraph& graph) {
  std::uint64_t n = 0;
  for (const auto& layer : graph.layers) n += layer.weights.data.size() + layer.bias.data.size();
  return n;
}

Macs BudgetLedger::decided_cost() const {
  Macs sum;
  const std::size_t end = std::min(cursor + 1, current_costs.size());
  for (std::size_t i = 0; i < end; ++i) sum += current_costs[i];
  return sum;
}

bool BudgetLedger::conserved() const {
  return c_all == c_reduced + decided_cost() + c_rest;
}

void CheckRates(const Rate& beta, const Rate& alpha_max) {
  if (!(beta > Rate(0, 1) && beta < Rate(1, 1))) {
    throw Error(ErrorCode::kInvalidRate, "beta must lie in (0, 1), got " + beta.ToString());
  }
  if (!(alpha_max > Rate(0, 1) && alpha_max <= Rate(1, 1))) {
    throw Error(ErrorCode::kInvalidRate,
                "alpha_max must lie in (0, 1], got " + alpha_max.ToString());
  }
}

namespace {

void Recount(BudgetLedger& ledger, const ModelGraph& graph) {
  ledger.current_costs = LayerCosts(graph);
  Macs total, rest, rest_prunable;
  for (std::size_t i = 0; i < ledger.current_costs.size(); ++i) {
    total += ledger.current_costs[i];
    if (i > ledger.cursor) {
      rest += ledger.current_costs[i];
      if (ledger.prunable[i]) rest_prunable += ledger.current_costs[i];
    }
  }
  if (total > ledger.c_all) {
    throw Error(ErrorCode::kPlanMismatch, "achieved graph costs more than the original");
  }
  ledger.c_reduced = ledger.c_all - total;
  ledger.c_rest = rest;
  ledger.c_rest_prunable = rest_prunable;
}

void CheckCursor(const BudgetLedger& ledger, std::size_t l) {
  if (l != ledger.cursor || l >= ledger.num_layers()) {
    throw Error(ErrorCode::kCursorMismatch, "layer " + std::to_string(l) + " but cursor is at " +
                                                std::to_string(ledger.cursor));
  }
}

}  // namespace

BudgetLedger LedgerInit(const ModelGraph& graph, const Rate& beta, const Rate& alpha_max) {
  CheckRates(beta, alpha_max);
  BudgetLedger ledger;
  ledger.beta = beta;
  ledger.alpha_max = alpha_max;
  ledger.c_all = TotalCost(graph);
  for (const auto& layer : graph.layers) ledger.prunable.push_back(layer.prunable_out);
  ledger.cursor = 0;
  Recount(ledger, graph);
  return ledger;
}

ExactCost MinReduction(const Rate& beta, const Rate& alpha_max, Macs c_all, Macs c_rest,
                       Macs c_reduced) {
  const __int128 bn = beta.num(), bd = beta.den();
  const __int128 an = alpha_max.num(), ad = alpha_max.den();
  ExactCost d;
  d.den = bd * ad;
  d.num = bn * ad * static_cast<__int128>(c_all.value()) -
          an * bd * static_cast<__int128>(c_rest.value()) -
          d.den * static_cast<__int128>(c_reduced.value());
  return d;
}

ExactCost MinReduction(const BudgetLedger& ledger, std::size_t l) {
  CheckCursor(ledger, l);
  return MinReduction(ledger.beta, ledger.alpha_max, ledger.c_all, ledger.c_rest_prunable,
                      ledger.c_reduced);
}

double ClampRate(const BudgetLedger& ledger, std::size_t l, double proposed) {
  const ExactCost d = MinReduction(ledger, l);
  const __int128 c_l = ledger.current_costs[l].value();
  if (c_l == 0) throw Error(ErrorCode::kInfeasibleBudget, "layer has zero cost");
  // D / C_l > alpha_max  <=>  D.num * a.den > a.num * D.den * C_l
  if (d.num * ledger.alpha_max.den() > ledger.alpha_max.num() * d.den * c_l) {
    throw Error(ErrorCode::kInfeasibleBudget,
                "layer " + std::to_string(l) + " would need rate " +
                    std::to_string(d.value() / static_cast<double>(c_l)) + " > alpha_max " +
                    ledger.alpha_max.ToString());
  }
  const double floor_rate = d.value() / static_cast<double>(c_l);
  const double rate = std::max(proposed, floor_rate);
  return std::clamp(rate, 0.0, ledger.alpha_max.value());
}

std::int64_t BudgetKeepCap(const BudgetLedger& ledger, std::size_t l, std::int64_t out_channels) {
  const ExactCost d = MinReduction(ledger, l);
  if (d.num <= 0) return out_channels;
  const __int128 c_l = ledger.current_costs[l].value();
  // keep <= out * (C_l - D) / C_l
  const __int128 numer = static_cast<__int128>(out_channels) * (d.den * c_l - d.num);
  const __int128 denom = d.den * c_l;
  if (numer <= 0) return 0;
  return static_cast<std::int64_t>(numer / denom);
}

BudgetLedger LedgerAdvance(const BudgetLedger& ledger, std::size_t l, const ModelGraph& achieved) {
  CheckCursor(ledger, l);
  if (achieved.layers.size() != ledger.num_layers()) {
    throw Error(ErrorCode::kPlanMismatch, "achieved graph has a different layer count");
  }
  BudgetLedger next = ledger;
  next.cursor = l + 1;
  Recount(next, achieved);
  return next;
}

void CheckFeasible(const ModelGraph& graph, const Rate& beta, const Rate& alpha_max) {
  CheckRates(beta, alpha_max);
  Macs all, prunable;
  for (const auto& layer : graph.layers) {
    all += LayerCost(layer);
    if (layer.prunable_out) prunable += LayerCost(layer);
  }
  // beta * all <= alpha_max * prunable
  const __int128 lhs = static_cast<__int128>(beta.num()) * alpha_max.den() * all.value();
  const __int128 rhs = static_cast<__int128>(alpha_max.num()) * beta.den() * prunable.value();
  if (lhs > rhs) {
    throw Error(ErrorCode::kInfeasibleBudget,
                "beta " + beta.ToString() + " exceeds alpha_max " + alpha_max.ToString() +
                    " times the prunable cost fraction " +
                    std::to_string(static_cast<double>(prunable.value()) /
                                   static_cast<double>(std::max<std::uint64_t>(all.value(), 1))));
  }
}

bool MeetsBudget(Macs c_all, Macs achieved_total, const Rate& beta) {
  if (achieved_total > c_all) return false;
  const __int128 reduced = (c_all - achieved_total).value();
  return reduced * beta.den() >= static_cast<__int128>(beta.num()) * c_all.value();
}

}  // namespace cacp
