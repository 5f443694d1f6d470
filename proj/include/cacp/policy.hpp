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

#ifndef CACP_POLICY_HPP_
#define CACP_POLICY_HPP_

#include <array>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "cacp/cost.hpp"
#include "cacp/mlp.hpp"
#include "cacp/model.hpp"
#include "cacp/random.hpp"

namespace cacp {

inline constexpr int kStateDim = 11;

/// Per-layer observation, every component in [0, 1]:
///   0 layer index / layer count      6 C_l / C_all
///   1 Conv2D ? 1 : 0                 7 C_reduced / C_all
///   2 in_channels / max channels     8 C_rest / C_all
///   3 out_channels / max channels    9 previous action
///   4 kernel / 7                    10 target rate beta
///   5 stride / 4
struct LayerState {
  std::array<double, kStateDim> features{};
  friend bool operator==(const LayerState&, const LayerState&) = default;
};

/// `current` is the partially pruned graph; the channel normalizer comes from
/// `original` so features do not drift within an episode.
LayerState Featurize(const BudgetLedger& ledger, const ModelGraph& original,
                     const ModelGraph& current, std::size_t l, double prev_action, double beta);

struct Transition {
  LayerState state;
  double action = 0.0;
  double reward = 0.0;
  std::optional<LayerState> next_state;  // nullopt marks the last decision of an episode
  double beta = 0.0;
};

/// Learnable state of the conditional actor-critic.
struct PolicyParams {
  using Net = Mlp<float>;
  Net actor;          // 11 -> 64 -> 64 -> 1, output squashed by alpha_max * sigmoid
  Net critic;         // 12 -> 64 -> 64 -> 1 on [state; action]
  Net target_actor;
  Net target_critic;
  Adam<float> actor_opt;
  Adam<float> critic_opt;
  double alpha_max = 0.8;
  double sigma = 0.5;
  std::uint64_t seed = 0;

  static PolicyParams Init(std::uint64_t seed, double alpha_max, int hidden = 64,
                           double sigma = 0.5);
  bool AllFinite() const;
};

/// Deterministic rate in [0, alpha_max].
double Act(const PolicyParams& theta, const LayerState& state);

/// `action` plus Gaussian noise truncated to +-2 sigma, clipped to [0, alpha_max].
double Explore(double action, double sigma, double alpha_max, Rng& rng);

struct UpdateLosses {
  double critic = 0.0;
  double actor = 0.0;
};

struct UpdateSettings {
  double lr_actor = 1e-3;
  double lr_critic = 1e-3;
  double discount = 1.0;
  double tau = 0.01;
  // Weight of mean(z^2) on the actor's pre-sigmoid output; keeps the output
  // away from the flat tails of the sigmoid.
  double preact_penalty = 0.0;
};

/// One critic regression step on the TD target from the target networks, one
/// actor ascent step on the critic, then a soft target update. Throws
/// DivergedParameters if anything stops being finite.
UpdateLosses Update(PolicyParams& theta, std::span<const Transition> batch,
                    const UpdateSettings& settings);

// Losses and analytic gradients, exposed for gradient checking. Templated on
// scalar so the checks can run in double.

template <typename Scalar>
struct LossAndGrad {
  Scalar loss{};
  Mlp<Scalar> grad;
};

/// Columns of `states` are feature vectors; returns alpha_max * sigmoid(actor(states)).
template <typename Scalar>
Eigen::Matrix<Scalar, 1, Eigen::Dynamic> ActorForward(const Mlp<Scalar>& actor,
                                                      const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& states,
                                                      Scalar alpha_max);

/// mean((Q(s, a) - y)^2) with y = r + discount * Q'(s', mu'(s')) for non-terminal rows.
template <typename Scalar>
LossAndGrad<Scalar> CriticLoss(const Mlp<Scalar>& critic, const Mlp<Scalar>& target_actor,
                               const Mlp<Scalar>& target_critic, std::span<const Transition> batch,
                               Scalar discount, Scalar alpha_max);

/// -mean(Q(s, mu(s))) + penalty * mean(z^2), z the pre-sigmoid output. The
/// gradient is with respect to the actor only.
template <typename Scalar>
LossAndGrad<Scalar> ActorLoss(const Mlp<Scalar>& actor, const Mlp<Scalar>& critic,
                              std::span<const Transition> batch, Scalar alpha_max,
                              Scalar penalty = Scalar(0));

/// Fixed-capacity FIFO of transitions.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}

  void Push(Transition t);
  /// Uniform draw with replacement.
  std::vector<Transition> Sample(std::size_t count, Rng& rng) const;
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }

 private:
  std::size_t capacity_;
  std::deque<Transition> items_;
};

/// Binary policy file: 8-byte magic, u32 LE header length, JSON header, then
/// little-endian float32 parameters of actor, critic, target actor, target critic.
void SavePolicy(const PolicyParams& theta, const std::filesystem::path& path);
/// Throws CorruptPolicy on any framing or size problem.
PolicyParams LoadPolicy(const std::filesystem::path& path);

}  // namespace cacp

#endif  // CACP_POLICY_HPP_
