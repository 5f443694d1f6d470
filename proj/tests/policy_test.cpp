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

#include <cmath>

#include "cacp/binary_io.hpp"
#include "cacp/error.hpp"
#include "cacp/fixture.hpp"
#include "cacp/policy.hpp"
#include "support.hpp"

namespace cacp {
namespace {

LayerState RandomState(Rng& rng) {
  LayerState s;
  for (auto& f : s.features) f = Uniform01(rng);
  return s;
}

std::vector<Transition> RandomBatch(Rng& rng, std::size_t n) {
  std::vector<Transition> batch;
  for (std::size_t i = 0; i < n; ++i) {
    Transition t{RandomState(rng), Uniform(rng, 0.0, 0.8), Uniform01(rng), std::nullopt, 0.5};
    if (UniformIndex(rng, 2) == 0) t.next_state = RandomState(rng);
    batch.push_back(t);
  }
  return batch;
}

// Larger random parameters than Init, so probes do not sit on the near-zero
// output layer of a fresh network.
Mlp<double> RandomNet(std::span<const int> sizes, Rng& rng) {
  Mlp<double> net = Mlp<double>::Init(sizes, rng);
  for (auto& w : net.weights) w = w.unaryExpr([&](double) { return Uniform(rng, -0.7, 0.7); });
  for (auto& b : net.biases) b = b.unaryExpr([&](double) { return Uniform(rng, -0.3, 0.3); });
  return net;
}

double& Param(Mlp<double>& net, std::size_t tensor, Eigen::Index idx) {
  const std::size_t l = tensor / 2;
  return tensor % 2 == 0 ? net.weights[l].data()[idx] : net.biases[l].data()[idx];
}

double Param(const Mlp<double>& net, std::size_t tensor, Eigen::Index idx) {
  return Param(const_cast<Mlp<double>&>(net), tensor, idx);
}

Eigen::Index TensorSize(const Mlp<double>& net, std::size_t tensor) {
  const std::size_t l = tensor / 2;
  return tensor % 2 == 0 ? net.weights[l].size() : net.biases[l].size();
}

bool Close(double analytic, double numeric) {
  const double gap = std::abs(analytic - numeric);
  return gap <= 1e-4 * std::max(std::abs(analytic), std::abs(numeric)) || gap < 1e-9;
}

// Probes every parameter tensor of `net` at random entries against a central
// difference of `loss` with step 1e-4.
int CheckGradient(Mlp<double>& net, const Mlp<double>& grad, const std::function<double()>& loss,
                  Rng& rng, int probes_per_tensor) {
  int failures = 0;
  for (std::size_t t = 0; t < 2 * net.weights.size(); ++t) {
    for (int p = 0; p < probes_per_tensor; ++p) {
      const auto idx = static_cast<Eigen::Index>(UniformIndex(rng, static_cast<std::uint64_t>(TensorSize(net, t))));
      double& w = Param(net, t, idx);
      const double saved = w;
      const double h = 1e-4;
      w = saved + h;
      const double up = loss();
      w = saved - h;
      const double down = loss();
      w = saved;
      const double numeric = (up - down) / (2 * h);
      const double analytic = Param(grad, t, idx);
      if (!Close(analytic, numeric)) {
        ++failures;
        ADD_FAILURE() << "tensor " << t << " index " << idx << ": analytic " << analytic
                      << " numeric " << numeric;
      }
    }
  }
  return failures;
}

TEST(Featurize, FirstLayer) {
  const Fixture fx = MakeRedundantFixture({});
  const BudgetLedger led = LedgerInit(fx.graph, Rate(1, 2), Rate(4, 5));
  const LayerState s = Featurize(led, fx.graph, fx.graph, 0, 0.0, 0.5);
  EXPECT_EQ(s.features[9], 0.0);
  EXPECT_EQ(s.features[10], 0.5);
  EXPECT_EQ(s.features[7], 0.0);
  EXPECT_EQ(s.features[0], 0.0);
  EXPECT_EQ(s.features[1], 1.0);
  for (double f : s.features) {
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 1.0);
  }
  EXPECT_EQ(Featurize(led, fx.graph, fx.graph, 0, 0.0, 0.5), s);
}

TEST(Act, ZeroActorGivesHalfAlphaMax) {
  PolicyParams theta = PolicyParams::Init(1, 0.8);
  theta.actor = Mlp<float>::Zeros(theta.actor.sizes());
  Rng rng = DeriveRng(1, 0);
  EXPECT_FLOAT_EQ(static_cast<float>(Act(theta, RandomState(rng))), 0.4f);
}

TEST(Act, AlwaysInRange) {
  Rng rng = DeriveRng(2, 0);
  for (int i = 0; i < 1000; ++i) {
    PolicyParams theta = PolicyParams::Init(static_cast<std::uint64_t>(i), 0.8, 8);
    for (auto& w : theta.actor.weights) {
      w = w.unaryExpr([&](float) { return static_cast<float>(Uniform(rng, -20.0, 20.0)); });
    }
    const double a = Act(theta, RandomState(rng));
    ASSERT_GE(a, 0.0);
    ASSERT_LE(a, 0.8);
  }
}

TEST(Explore, ZeroSigmaIsIdentity) {
  Rng rng = DeriveRng(3, 0);
  for (double a : {0.0, 0.3, 0.8}) EXPECT_EQ(Explore(a, 0.0, 0.8, rng), a);
}

TEST(Explore, StaysInRangeAndIsReproducible) {
  Rng a = DeriveRng(4, 0);
  Rng b = DeriveRng(4, 0);
  for (int i = 0; i < 10000; ++i) {
    const double base = Uniform01(a) * 0.8;
    Uniform01(b);
    const double x = Explore(base, 0.5, 0.8, a);
    ASSERT_GE(x, 0.0);
    ASSERT_LE(x, 0.8);
    ASSERT_EQ(x, Explore(base, 0.5, 0.8, b));
  }
}

TEST(Explore, NoiseTruncatedAtTwoSigma) {
  Rng rng = DeriveRng(5, 0);
  for (int i = 0; i < 10000; ++i) {
    const double x = Explore(0.5, 0.01, 1.0, rng);
    ASSERT_LE(std::abs(x - 0.5), 0.02 + 1e-15);
  }
}

TEST(GradientCheck, Critic) {
  Rng rng = DeriveRng(6, 0);
  const std::array<int, 4> sizes{kStateDim + 1, 7, 5, 1};
  const std::array<int, 4> actor_sizes{kStateDim, 6, 4, 1};
  int failures = 0;
  for (int trial = 0; trial < 5; ++trial) {
    Mlp<double> critic = RandomNet(sizes, rng);
    const Mlp<double> target_actor = RandomNet(actor_sizes, rng);
    const Mlp<double> target_critic = RandomNet(sizes, rng);
    const auto batch = RandomBatch(rng, 9);
    auto loss = [&] { return CriticLoss<double>(critic, target_actor, target_critic, batch, 0.9, 0.8).loss; };
    const Mlp<double> grad = CriticLoss<double>(critic, target_actor, target_critic, batch, 0.9, 0.8).grad;
    failures += CheckGradient(critic, grad, loss, rng, 2);
  }
  EXPECT_EQ(failures, 0);
}

TEST(GradientCheck, Actor) {
  Rng rng = DeriveRng(7, 0);
  const std::array<int, 4> sizes{kStateDim, 7, 5, 1};
  const std::array<int, 4> critic_sizes{kStateDim + 1, 6, 4, 1};
  int failures = 0;
  for (int trial = 0; trial < 5; ++trial) {
    Mlp<double> actor = RandomNet(sizes, rng);
    const Mlp<double> critic = RandomNet(critic_sizes, rng);
    const auto batch = RandomBatch(rng, 9);
    const double penalty = trial % 2 == 0 ? 0.0 : 0.01;
    auto loss = [&] { return ActorLoss<double>(actor, critic, batch, 0.8, penalty).loss; };
    const Mlp<double> grad = ActorLoss<double>(actor, critic, batch, 0.8, penalty).grad;
    failures += CheckGradient(actor, grad, loss, rng, 2);
  }
  EXPECT_EQ(failures, 0);
}

TEST(Update, ZeroLearningRateOnlyMovesTargets) {
  Rng rng = DeriveRng(8, 0);
  PolicyParams theta = PolicyParams::Init(8, 0.8, 16);
  for (auto& w : theta.target_actor.weights) w.setZero();
  const PolicyParams before = theta;
  const auto batch = RandomBatch(rng, 16);
  UpdateSettings s;
  s.lr_actor = 0.0;
  s.lr_critic = 0.0;
  s.tau = 0.25;
  const UpdateLosses losses = Update(theta, batch, s);
  EXPECT_TRUE(std::isfinite(losses.critic));
  EXPECT_TRUE(std::isfinite(losses.actor));
  EXPECT_EQ(theta.actor, before.actor);
  EXPECT_EQ(theta.critic, before.critic);
  Mlp<float> expect = before.target_actor;
  SoftUpdate(expect, before.actor, 0.25f);
  EXPECT_EQ(theta.target_actor, expect);
}

TEST(Update, CriticConvergesOnRepeatedTerminalTransition) {
  Rng rng = DeriveRng(9, 0);
  PolicyParams theta = PolicyParams::Init(9, 0.8, 32);
  const Transition t{RandomState(rng), 0.35, 0.73, std::nullopt, 0.5};
  const std::vector<Transition> batch(16, t);
  UpdateSettings s;
  s.lr_actor = 0.0;
  s.discount = 1.0;
  for (int i = 0; i < 1500; ++i) Update(theta, batch, s);
  Eigen::MatrixXf x(kStateDim + 1, 1);
  for (int i = 0; i < kStateDim; ++i) x(i, 0) = static_cast<float>(t.state.features[static_cast<std::size_t>(i)]);
  x(kStateDim, 0) = 0.35f;
  EXPECT_NEAR(theta.critic.Forward(x)(0, 0), 0.73, 1e-2);
}

TEST(Update, DivergenceIsReported) {
  Rng rng = DeriveRng(10, 0);
  PolicyParams theta = PolicyParams::Init(10, 0.8, 8);
  theta.critic.weights[0](0, 0) = std::numeric_limits<float>::quiet_NaN();
  try {
    Update(theta, RandomBatch(rng, 4), UpdateSettings{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDivergedParameters);
  }
  EXPECT_THROW(Update(theta, {}, UpdateSettings{}), Error);
}

TEST(ReplayBuffer, FifoAndSampling) {
  ReplayBuffer buf(3);
  for (int i = 0; i < 5; ++i) buf.Push({LayerState{}, 0.1 * i, 0.0, std::nullopt, 0.5});
  EXPECT_EQ(buf.size(), 3u);
  Rng rng = DeriveRng(11, 0);
  for (const auto& t : buf.Sample(100, rng)) EXPECT_GE(t.action, 0.2 - 1e-12);
}

TEST(PolicyFile, RoundTrip) {
  const auto dir = testing::TempDir("policy_file");
  PolicyParams theta = PolicyParams::Init(12, 0.8, 16, 0.37);
  theta.target_critic.biases[1](3) = 2.5f;
  SavePolicy(theta, dir / "p.bin");
  const PolicyParams back = LoadPolicy(dir / "p.bin");
  EXPECT_EQ(back.actor, theta.actor);
  EXPECT_EQ(back.critic, theta.critic);
  EXPECT_EQ(back.target_actor, theta.target_actor);
  EXPECT_EQ(back.target_critic, theta.target_critic);
  EXPECT_EQ(back.alpha_max, theta.alpha_max);
  EXPECT_EQ(back.sigma, theta.sigma);
  EXPECT_EQ(back.seed, theta.seed);
}

ErrorCode LoadError(const std::filesystem::path& path) {
  try {
    LoadPolicy(path);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "LoadPolicy did not throw";
  return ErrorCode::kIoFailure;
}

TEST(PolicyFile, CorruptionDetected) {
  const auto dir = testing::TempDir("policy_corrupt");
  SavePolicy(PolicyParams::Init(13, 0.8, 8), dir / "p.bin");
  const std::string bytes = io::ReadFile(dir / "p.bin");

  for (std::size_t cut : {std::size_t{0}, std::size_t{5}, std::size_t{20}, bytes.size() / 2, bytes.size() - 1}) {
    io::WriteFile(dir / "t.bin", bytes.substr(0, cut));
    EXPECT_EQ(LoadError(dir / "t.bin"), ErrorCode::kCorruptPolicy) << "cut at " << cut;
  }
  std::string magic = bytes;
  magic[0] = 'X';
  io::WriteFile(dir / "m.bin", magic);
  EXPECT_EQ(LoadError(dir / "m.bin"), ErrorCode::kCorruptPolicy);

  io::WriteFile(dir / "x.bin", bytes + "abcd");
  EXPECT_EQ(LoadError(dir / "x.bin"), ErrorCode::kCorruptPolicy);

  std::string header = bytes;
  header[13] = '[';
  io::WriteFile(dir / "h.bin", header);
  EXPECT_EQ(LoadError(dir / "h.bin"), ErrorCode::kCorruptPolicy);
}

}  // namespace
}  // namespace cacp
