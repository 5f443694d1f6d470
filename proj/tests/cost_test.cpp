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

#include <gtest/gtest.h>

#include "cacp/cost.hpp"
#include "cacp/driver.hpp"
#include "cacp/error.hpp"
#include "cacp/fixture.hpp"
#include "cacp/pruner.hpp"
#include "support.hpp"

namespace cacp {
namespace {

using testing::RandomGraph;

bool SameValue(const ExactCost& a, const ExactCost& b) { return a.num * b.den == b.num * a.den; }

ExactCost Whole(__int128 v) { return {v, 1}; }

LayerNode Conv(std::int64_t in, std::int64_t out, std::int64_t k, std::int64_t side) {
  return MakeLayer("c", LayerKind::kConv2D, in, out, k, 1, side, Activation::kReLU, true);
}

LayerNode Dense(std::int64_t in, std::int64_t out) {
  return MakeLayer("d", LayerKind::kDense, in, out, 1, 1, 1, Activation::kIdentity, false);
}

// 10x10 input, 3x3 valid conv (side 8), then a conv that collapses the map
// and a classifier.
ModelGraph ConvChain() {
  ModelGraph g;
  g.input_shape = {4, 10, 10};
  g.num_classes = 10;
  g.layers.push_back(MakeLayer("c0", LayerKind::kConv2D, 4, 8, 3, 1, 8, Activation::kReLU, true));
  g.layers.push_back(MakeLayer("c1", LayerKind::kConv2D, 8, 16, 8, 1, 1, Activation::kReLU, true));
  g.layers.push_back(MakeLayer("fc", LayerKind::kDense, 16, 10, 1, 1, 1, Activation::kIdentity, false));
  return g;
}

TEST(LayerCost, Examples) {
  EXPECT_EQ(LayerCost(Conv(4, 8, 3, 8)).value(), 18432u);
  EXPECT_EQ(testing::LoopNestMacs(Conv(4, 8, 3, 8)), 18432u);
  EXPECT_EQ(LayerCost(Dense(16, 10)).value(), 160u);
  EXPECT_EQ(testing::LoopNestMacs(Dense(16, 10)), 160u);
  EXPECT_EQ(LayerCost(Conv(4, 8, 3, 8), 4, 0).value(), 0u);
}

TEST(TotalCost, ChainedExample) {
  ModelGraph g;
  g.input_shape = {4, 10, 10};
  g.num_classes = 10;
  g.layers = {Conv(4, 8, 3, 8), Dense(16, 10)};
  EXPECT_EQ(TotalCost(g).value(), 18592u);
}

TEST(ParamsCount, Examples) {
  ModelGraph g;
  g.layers = {Conv(4, 8, 3, 8)};
  EXPECT_EQ(ParamsCount(g), 296u);
  g.layers = {Dense(16, 10)};
  EXPECT_EQ(ParamsCount(g), 170u);
  EXPECT_EQ(ParamsCount(ModelGraph{}), 0u);
}

TEST(TotalCost, MatchesLoopNestOracle) {
  Rng rng = DeriveRng(21, 0);
  for (int i = 0; i < 100; ++i) {
    const ModelGraph g = RandomGraph(rng);
    EXPECT_EQ(TotalCost(g).value(), testing::LoopNestMacs(g));
    EXPECT_EQ(ParamsCount(g), testing::CountParams(g));
  }
}

TEST(TotalCost, PruningShrinksCost) {
  const ModelGraph g = ConvChain();
  const ModelGraph pruned = PruneLayerOutputs(g, 0, std::vector<std::int64_t>{0, 1, 2, 3});
  EXPECT_LT(TotalCost(pruned), TotalCost(g));
}

TEST(Ledger, InitAndRates) {
  const ModelGraph g = MakeRedundantFixture({}).graph;
  const BudgetLedger a = LedgerInit(g, Rate(1, 2), Rate(4, 5));
  EXPECT_EQ(a.c_reduced.value(), 0u);
  EXPECT_EQ(a.cursor, 0u);
  EXPECT_EQ(a.c_rest, a.c_all - a.current_costs[0]);
  EXPECT_TRUE(a.conserved());
  const BudgetLedger b = LedgerInit(g, Rate(1, 2), Rate(4, 5));
  EXPECT_EQ(a.current_costs, b.current_costs);
  EXPECT_EQ(a.c_rest, b.c_rest);

  for (auto [beta, amax] : std::vector<std::pair<Rate, Rate>>{{Rate::Parse("1.2"), Rate(4, 5)},
                                                              {Rate(0, 1), Rate(4, 5)},
                                                              {Rate(1, 2), Rate(0, 1)},
                                                              {Rate(1, 2), Rate(6, 5)}}) {
    try {
      LedgerInit(g, beta, amax);
      ADD_FAILURE() << beta.ToString() << " " << amax.ToString();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidRate);
    }
  }
}

TEST(MinReduction, Examples) {
  EXPECT_TRUE(SameValue(MinReduction(Rate(1, 2), Rate(4, 5), Macs(1000), Macs(400), Macs(100)),
                        Whole(80)));
  EXPECT_TRUE(SameValue(MinReduction(Rate(3, 10), Rate(4, 5), Macs(1000), Macs(800), Macs(0)),
                        Whole(-340)));
  EXPECT_TRUE(SameValue(MinReduction(Rate(3, 10), Rate(4, 5), Macs(1000), Macs(0), Macs(300)),
                        Whole(0)));
}

TEST(MinReduction, LinearInRestAndReduced) {
  Rng rng = DeriveRng(4, 0);
  for (int i = 0; i < 500; ++i) {
    const Rate beta(testing::RandInt(rng, 1, 99), 100);
    const Rate amax(testing::RandInt(rng, 1, 100), 100);
    const Macs all(static_cast<std::uint64_t>(testing::RandInt(rng, 1, 1'000'000)));
    const auto x1 = static_cast<std::uint64_t>(testing::RandInt(rng, 0, 500'000));
    const auto x2 = static_cast<std::uint64_t>(testing::RandInt(rng, 0, 500'000));
    const Macs fixed(static_cast<std::uint64_t>(testing::RandInt(rng, 0, 1000)));
    auto in_rest = [&](std::uint64_t x) { return MinReduction(beta, amax, all, Macs(x), fixed); };
    auto in_red = [&](std::uint64_t x) { return MinReduction(beta, amax, all, fixed, Macs(x)); };
    for (auto& f : {std::function<ExactCost(std::uint64_t)>(in_rest),
                    std::function<ExactCost(std::uint64_t)>(in_red)}) {
      const ExactCost a = f(x1), b = f(x2), ab = f(x1 + x2), zero = f(0);
      // f(x1) + f(x2) == f(x1 + x2) + f(0)
      const ExactCost lhs{a.num * b.den + b.num * a.den, a.den * b.den};
      const ExactCost rhs{ab.num * zero.den + zero.num * ab.den, ab.den * zero.den};
      EXPECT_TRUE(SameValue(lhs, rhs));
    }
  }
}

BudgetLedger HandLedger(Rate beta, std::vector<std::uint64_t> costs, std::size_t cursor,
                        std::uint64_t reduced) {
  BudgetLedger led;
  led.beta = beta;
  led.alpha_max = Rate(4, 5);
  led.cursor = cursor;
  led.c_reduced = Macs(reduced);
  std::uint64_t all = reduced;
  for (std::size_t i = 0; i < costs.size(); ++i) {
    led.current_costs.push_back(Macs(costs[i]));
    led.prunable.push_back(true);
    all += costs[i];
    if (i > cursor) {
      led.c_rest += Macs(costs[i]);
      led.c_rest_prunable += Macs(costs[i]);
    }
  }
  led.c_all = Macs(all);
  return led;
}

TEST(ClampRate, Examples) {
  // c_all 1000, C_l 200, c_rest 400, c_reduced 100: D = 80.
  const BudgetLedger led = HandLedger(Rate(1, 2), {300, 200, 400}, 1, 100);
  ASSERT_TRUE(led.conserved());
  ASSERT_TRUE(SameValue(MinReduction(led, 1), Whole(80)));
  EXPECT_DOUBLE_EQ(ClampRate(led, 1, 0.25), 0.4);
  EXPECT_DOUBLE_EQ(ClampRate(led, 1, 0.6), 0.6);

  // D = -340: any proposal passes through.
  const BudgetLedger loose = HandLedger(Rate(3, 10), {200, 800}, 0, 0);
  ASSERT_TRUE(SameValue(MinReduction(loose, 0), Whole(-340)));
  for (double p : {0.0, 0.13, 0.5, 0.8}) EXPECT_DOUBLE_EQ(ClampRate(loose, 0, p), p);
}

TEST(ClampRate, InfeasibleAndCursor) {
  // D = 500 - 0 - 0 on a layer of cost 500 at alpha_max 0.8.
  const BudgetLedger led = HandLedger(Rate(1, 2), {500, 500}, 1, 0);
  try {
    ClampRate(led, 1, 0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInfeasibleBudget);
  }
  try {
    MinReduction(led, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCursorMismatch);
  }
}

TEST(BudgetKeepCap, LargestKeepMeetingFloor) {
  Rng rng = DeriveRng(8, 0);
  for (int i = 0; i < 500; ++i) {
    const auto c_l = static_cast<std::uint64_t>(testing::RandInt(rng, 1, 5000));
    const auto rest = static_cast<std::uint64_t>(testing::RandInt(rng, 0, 5000));
    const BudgetLedger led = HandLedger(Rate(testing::RandInt(rng, 1, 9), 10), {c_l, rest}, 0, 0);
    const std::int64_t out = testing::RandInt(rng, 1, 64);
    const ExactCost d = MinReduction(led, 0);
    const std::int64_t cap = BudgetKeepCap(led, 0, out);
    // Keeping k of out channels cuts (out - k) / out of C_l.
    auto cuts_enough = [&](std::int64_t k) {
      return static_cast<__int128>(out - k) * c_l * d.den >= d.num * out;
    };
    if (d.num <= 0) {
      EXPECT_EQ(cap, out);
    } else if (d.num >= d.den * static_cast<__int128>(c_l)) {
      EXPECT_EQ(cap, 0);
    } else {
      EXPECT_GE(cap, 0);
      EXPECT_LE(cap, out);
      EXPECT_TRUE(cuts_enough(cap));
      if (cap < out) {
        EXPECT_FALSE(cuts_enough(cap + 1));
      }
    }
  }
}

TEST(LedgerAdvance, Examples) {
  const ModelGraph g = ConvChain();
  const BudgetLedger l0 = LedgerInit(g, Rate(1, 2), Rate(4, 5));

  const BudgetLedger same = LedgerAdvance(l0, 0, g);
  EXPECT_EQ(same.c_reduced, l0.c_reduced);
  EXPECT_TRUE(same.conserved());

  const ModelGraph half = PruneLayerOutputs(g, 0, std::vector<std::int64_t>{0, 1, 2, 3});
  const BudgetLedger l1 = LedgerAdvance(l0, 0, half);
  const std::uint64_t drop0 = testing::LoopNestMacs(g.layers[0]) - testing::LoopNestMacs(half.layers[0]);
  const std::uint64_t drop1 = testing::LoopNestMacs(g.layers[1]) - testing::LoopNestMacs(half.layers[1]);
  EXPECT_EQ(l1.c_reduced.value(), drop0 + drop1);
  EXPECT_TRUE(l1.conserved());

  const BudgetLedger l2 = LedgerAdvance(l1, 1, half);
  const BudgetLedger l3 = LedgerAdvance(l2, 2, half);
  EXPECT_EQ(l3.c_rest.value(), 0u);
  EXPECT_TRUE(l3.conserved());

  try {
    LedgerAdvance(l1, 0, half);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCursorMismatch);
  }
}

TEST(TotalCost, MonotoneInPrunedChannels) {
  Rng rng = DeriveRng(13, 0);
  for (int i = 0; i < 100; ++i) {
    const ModelGraph g = RandomGraph(rng);
    const std::size_t l = UniformIndex(rng, g.size() - 1);
    if (!g.layers[l].prunable_out) continue;
    const std::int64_t out = g.layers[l].out_channels;
    Macs prev = TotalCost(g);
    for (std::int64_t keep = out; keep >= 1; --keep) {
      std::vector<std::int64_t> kept(static_cast<std::size_t>(keep));
      std::iota(kept.begin(), kept.end(), 0);
      const Macs c = TotalCost(PruneLayerOutputs(g, l, kept));
      EXPECT_LE(c, prev);
      prev = c;
    }
  }
}

// Property: any proposal sequence yields reduction >= beta - rounding slack,
// the ledger is conserved at every step, and the plan's cost matches the ledger.
TEST(BudgetGuarantee, RandomEpisodes) {
  Rng rng = DeriveRng(99, 0);
  const Rate amax(4, 5);
  const std::vector<Rate> betas{Rate(3, 10), Rate(5, 10), Rate(7, 10)};
  testing::GraphSpec spec;
  spec.max_channels = 8;
  int done = 0;
  int aborted = 0;
  while (done < 1000) {
    const ModelGraph g = RandomGraph(rng, spec);
    const Rate beta = betas[UniformIndex(rng, betas.size())];
    try {
      CheckFeasible(g, beta, amax);
    } catch (const Error&) {
      continue;
    }
    EpisodeResult ep;
    try {
      ep = RunEpisode(g, nullptr, beta, amax, [&](const LayerState&, std::size_t) {
        return Uniform(rng, 0.0, amax.value());
      });
    } catch (const Error& e) {
      // A one-channel floor upstream can leave the budget out of reach; such
      // episodes stop with InfeasibleBudget instead of completing.
      ASSERT_EQ(e.code(), ErrorCode::kInfeasibleBudget);
      ++aborted;
      continue;
    }
    for (const auto& led : ep.ledgers) ASSERT_TRUE(led.conserved());
    EXPECT_GE(ep.reduction(), beta.value() - ep.rounding_slack - 1e-12);
    EXPECT_EQ(TotalCost(ApplyPlan(g, ep.plan)), ep.achieved);
    EXPECT_EQ(ep.ledgers.back().c_all - ep.ledgers.back().c_reduced, ep.achieved);
    ++done;
  }
  EXPECT_LT(aborted, done);
}

TEST(CheckFeasible, RejectsUnreachableBeta) {
  const ModelGraph g = ConvChain();
  EXPECT_NO_THROW(CheckFeasible(g, Rate(1, 2), Rate(4, 5)));
  try {
    CheckFeasible(g, Rate(95, 100), Rate(1, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInfeasibleBudget);
  }
}

TEST(Rate, ParseAndCompare) {
  EXPECT_EQ(Rate::Parse("0.5"), Rate(1, 2));
  EXPECT_EQ(Rate::Parse(".75"), Rate(3, 4));
  EXPECT_EQ(Rate::Parse("1"), Rate(1, 1));
  EXPECT_EQ(Rate::FromDouble(0.3), Rate(3, 10));
  EXPECT_LT(Rate(3, 10), Rate(1, 3));
  for (const char* bad : {"", "abc", "0.1234567891", "1.2.3", "0.5x"}) {
    EXPECT_THROW(Rate::Parse(bad), Error) << bad;
  }
}

}  // namespace
}  // namespace cacp
