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

#include "cacp/policy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cacp/error.hpp"

namespace cacp {

namespace {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using RowVectorX = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

double Unit(double v) { return std::clamp(v, 0.0, 1.0); }

template <typename Scalar>
MatrixX<Scalar> StateMatrix(std::span<const Transition> batch, bool next) {
  MatrixX<Scalar> s(kStateDim, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const LayerState& st = next ? *batch[j].next_state : batch[j].state;
    for (int i = 0; i < kStateDim; ++i) s(i, static_cast<Eigen::Index>(j)) = static_cast<Scalar>(st.features[static_cast<std::size_t>(i)]);
  }
  return s;
}

template <typename Scalar>
MatrixX<Scalar> Stack(const MatrixX<Scalar>& states, const RowVectorX<Scalar>& actions) {
  MatrixX<Scalar> x(states.rows() + 1, states.cols());
  x.topRows(states.rows()) = states;
  x.bottomRows(1) = actions;
  return x;
}

template <typename Scalar>
RowVectorX<Scalar> Sigmoid(const RowVectorX<Scalar>& z) {
  return (Scalar(1) / (Scalar(1) + (-z.array()).exp())).matrix();
}

}  // namespace

LayerState Featurize(const BudgetLedger& ledger, const ModelGraph& original,
                     const ModelGraph& current, std::size_t l, double prev_action, double beta) {
  std::int64_t max_ch = 1;
  for (const auto& layer : original.layers) {
    max_ch = std::max({max_ch, layer.in_channels, layer.out_channels});
  }
  const LayerNode& layer = current.layers[l];
  const auto c_all = static_cast<double>(std::max<std::uint64_t>(ledger.c_all.value(), 1));
  const auto max_c = static_cast<double>(max_ch);
  LayerState s;
  s.features = {
      static_cast<double>(l) / static_cast<double>(current.layers.size()),
      layer.kind == LayerKind::kConv2D ? 1.0 : 0.0,
      Unit(static_cast<double>(layer.in_channels) / max_c),
      Unit(static_cast<double>(layer.out_channels) / max_c),
      Unit(static_cast<double>(layer.kernel) / 7.0),
      Unit(static_cast<double>(layer.stride) / 4.0),
      Unit(static_cast<double>(ledger.current_costs[l].value()) / c_all),
      Unit(static_cast<double>(ledger.c_reduced.value()) / c_all),
      Unit(static_cast<double>(ledger.c_rest.value()) / c_all),
      Unit(prev_action),
      beta,
  };
  return s;
}

PolicyParams PolicyParams::Init(std::uint64_t seed, double alpha_max, int hidden, double sigma) {
  Rng rng = DeriveRng(seed, 0x5eed);
  const std::array<int, 4> actor_sizes{kStateDim, hidden, hidden, 1};
  const std::array<int, 4> critic_sizes{kStateDim + 1, hidden, hidden, 1};
  PolicyParams p;
  p.actor = Net::Init(actor_sizes, rng);
  p.critic = Net::Init(critic_sizes, rng);
  p.target_actor = p.actor;
  p.target_critic = p.critic;
  p.actor_opt = Adam<float>::For(p.actor);
  p.critic_opt = Adam<float>::For(p.critic);
  p.alpha_max = alpha_max;
  p.sigma = sigma;
  p.seed = seed;
  return p;
}

bool PolicyParams::AllFinite() const {
  return actor.AllFinite() && critic.AllFinite() && target_actor.AllFinite() &&
         target_critic.AllFinite() && std::isfinite(sigma);
}

template <typename Scalar>
RowVectorX<Scalar> ActorForward(const Mlp<Scalar>& actor, const MatrixX<Scalar>& states,
                                Scalar alpha_max) {
  return alpha_max * Sigmoid<Scalar>(actor.Forward(states));
}

double Act(const PolicyParams& theta, const LayerState& state) {
  Eigen::MatrixXf s(kStateDim, 1);
  for (int i = 0; i < kStateDim; ++i) s(i, 0) = static_cast<float>(state.features[static_cast<std::size_t>(i)]);
  const float a = ActorForward<float>(theta.actor, s, static_cast<float>(theta.alpha_max))(0);
  return std::clamp(static_cast<double>(a), 0.0, theta.alpha_max);
}

double Explore(double action, double sigma, double alpha_max, Rng& rng) {
  if (sigma <= 0.0) return action;
  double noise = sigma * StandardNormal(rng);
  while (std::abs(noise) > 2.0 * sigma) noise = sigma * StandardNormal(rng);
  return std::clamp(action + noise, 0.0, alpha_max);
}

template <typename Scalar>
LossAndGrad<Scalar> CriticLoss(const Mlp<Scalar>& critic, const Mlp<Scalar>& target_actor,
                               const Mlp<Scalar>& target_critic, std::span<const Transition> batch,
                               Scalar discount, Scalar alpha_max) {
  const auto n = static_cast<Eigen::Index>(batch.size());
  RowVectorX<Scalar> y(n), actions(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    y(j) = static_cast<Scalar>(batch[static_cast<std::size_t>(j)].reward);
    actions(j) = static_cast<Scalar>(batch[static_cast<std::size_t>(j)].action);
  }
  std::vector<Transition> live;
  std::vector<Eigen::Index> live_rows;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (batch[static_cast<std::size_t>(j)].next_state) {
      live.push_back(batch[static_cast<std::size_t>(j)]);
      live_rows.push_back(j);
    }
  }
  if (!live.empty() && discount != Scalar(0)) {
    const MatrixX<Scalar> next = StateMatrix<Scalar>(live, true);
    const RowVectorX<Scalar> next_q =
        target_critic.Forward(Stack<Scalar>(next, ActorForward(target_actor, next, alpha_max)));
    for (std::size_t k = 0; k < live_rows.size(); ++k) {
      y(live_rows[k]) += discount * next_q(static_cast<Eigen::Index>(k));
    }
  }
  typename Mlp<Scalar>::Tape tape;
  const RowVectorX<Scalar> q =
      critic.Forward(Stack<Scalar>(StateMatrix<Scalar>(batch, false), actions), &tape);
  const RowVectorX<Scalar> diff = q - y;
  LossAndGrad<Scalar> out;
  out.loss = diff.squaredNorm() / static_cast<Scalar>(n);
  out.grad = critic.Backward(tape, (Scalar(2) / static_cast<Scalar>(n)) * diff);
  return out;
}

template <typename Scalar>
LossAndGrad<Scalar> ActorLoss(const Mlp<Scalar>& actor, const Mlp<Scalar>& critic,
                              std::span<const Transition> batch, Scalar alpha_max,
                              Scalar penalty) {
  const auto n = static_cast<Eigen::Index>(batch.size());
  const MatrixX<Scalar> states = StateMatrix<Scalar>(batch, false);
  typename Mlp<Scalar>::Tape actor_tape, critic_tape;
  const RowVectorX<Scalar> z = actor.Forward(states, &actor_tape);
  const RowVectorX<Scalar> sig = Sigmoid<Scalar>(z);
  const RowVectorX<Scalar> actions = alpha_max * sig;
  const RowVectorX<Scalar> q = critic.Forward(Stack<Scalar>(states, actions), &critic_tape);

  LossAndGrad<Scalar> out;
  out.loss = (penalty * z.squaredNorm() - q.sum()) / static_cast<Scalar>(n);
  MatrixX<Scalar> grad_input;
  critic.Backward(critic_tape, RowVectorX<Scalar>::Constant(n, Scalar(-1) / static_cast<Scalar>(n)),
                  &grad_input);
  const RowVectorX<Scalar> dz =
      (grad_input.bottomRows(1).array() * alpha_max * sig.array() * (Scalar(1) - sig.array()))
          .matrix() +
      (Scalar(2) * penalty / static_cast<Scalar>(n)) * z;
  out.grad = actor.Backward(actor_tape, dz);
  return out;
}

UpdateLosses Update(PolicyParams& theta, std::span<const Transition> batch,
                    const UpdateSettings& settings) {
  if (batch.empty()) throw Error(ErrorCode::kInvalidConfig, "empty update batch");
  const auto alpha = static_cast<float>(theta.alpha_max);
  UpdateLosses losses;

  auto critic_step = CriticLoss<float>(theta.critic, theta.target_actor, theta.target_critic,
                                       batch, static_cast<float>(settings.discount), alpha);
  if (settings.lr_critic != 0.0) {
    theta.critic_opt.Step(theta.critic, critic_step.grad, static_cast<float>(settings.lr_critic));
  }
  auto actor_step = ActorLoss<float>(theta.actor, theta.critic, batch, alpha,
                                     static_cast<float>(settings.preact_penalty));
  if (settings.lr_actor != 0.0) {
    theta.actor_opt.Step(theta.actor, actor_step.grad, static_cast<float>(settings.lr_actor));
  }
  SoftUpdate(theta.target_actor, theta.actor, static_cast<float>(settings.tau));
  SoftUpdate(theta.target_critic, theta.critic, static_cast<float>(settings.tau));

  losses.critic = critic_step.loss;
  losses.actor = actor_step.loss;
  if (!theta.AllFinite() || !std::isfinite(losses.critic) || !std::isfinite(losses.actor)) {
    throw Error(ErrorCode::kDivergedParameters, "policy parameters became non-finite");
  }
  return losses;
}

void ReplayBuffer::Push(Transition t) {
  if (capacity_ == 0) return;
  if (items_.size() == capacity_) items_.pop_front();
  items_.push_back(std::move(t));
}

std::vector<Transition> ReplayBuffer::Sample(std::size_t count, Rng& rng) const {
  std::vector<Transition> out;
  if (items_.empty()) return out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(items_[UniformIndex(rng, items_.size())]);
  }
  return out;
}

template RowVectorX<float> ActorForward<float>(const Mlp<float>&, const MatrixX<float>&, float);
template RowVectorX<double> ActorForward<double>(const Mlp<double>&, const MatrixX<double>&, double);
template LossAndGrad<float> CriticLoss<float>(const Mlp<float>&, const Mlp<float>&,
                                              const Mlp<float>&, std::span<const Transition>,
                                              float, float);
template LossAndGrad<double> CriticLoss<double>(const Mlp<double>&, const Mlp<double>&,
                                                const Mlp<double>&, std::span<const Transition>,
                                                double, double);
template LossAndGrad<float> ActorLoss<float>(const Mlp<float>&, const Mlp<float>&,
                                             std::span<const Transition>, float, float);
template LossAndGrad<double> ActorLoss<double>(const Mlp<double>&, const Mlp<double>&,
                                               std::span<const Transition>, double, double);

}  // namespace cacp
