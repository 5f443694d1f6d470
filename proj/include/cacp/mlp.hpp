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

#ifndef CACP_MLP_HPP_
#define CACP_MLP_HPP_

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "cacp/random.hpp"

namespace cacp {

/// Fully connected network with tanh hidden units and a linear output.
/// Samples are columns: Forward maps [in, batch] to [out, batch].
template <typename Scalar>
struct Mlp {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  std::vector<Matrix> weights;  // [fan_out, fan_in]
  std::vector<Vector> biases;

  /// Post-activation values of every layer, input first.
  struct Tape {
    std::vector<Matrix> activations;
  };

  static Mlp Zeros(std::span<const int> sizes) {
    Mlp net;
    for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
      net.weights.push_back(Matrix::Zero(sizes[i + 1], sizes[i]));
      net.biases.push_back(Vector::Zero(sizes[i + 1]));
    }
    return net;
  }

  /// Hidden layers: U(-1/sqrt(fan_in), 1/sqrt(fan_in)); output layer: U(-3e-3, 3e-3).
  static Mlp Init(std::span<const int> sizes, Rng& rng) {
    Mlp net = Zeros(sizes);
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
      const bool last = l + 1 == net.weights.size();
      const double bound = last ? 3e-3 : 1.0 / std::sqrt(static_cast<double>(sizes[l]));
      for (Eigen::Index j = 0; j < net.weights[l].cols(); ++j) {
        for (Eigen::Index i = 0; i < net.weights[l].rows(); ++i) {
          net.weights[l](i, j) = static_cast<Scalar>(Uniform(rng, -bound, bound));
        }
      }
      for (Eigen::Index i = 0; i < net.biases[l].size(); ++i) {
        net.biases[l](i) = static_cast<Scalar>(Uniform(rng, -bound, bound));
      }
    }
    return net;
  }

  std::vector<int> sizes() const {
    std::vector<int> s;
    if (weights.empty()) return s;
    s.push_back(static_cast<int>(weights.front().cols()));
    for (const auto& w : weights) s.push_back(static_cast<int>(w.rows()));
    return s;
  }

  std::size_t num_params() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
      n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
    }
    return n;
  }

  Matrix Forward(const Matrix& x, Tape* tape = nullptr) const {
    Matrix a = x;
    if (tape) {
      tape->activations.clear();
      tape->activations.push_back(a);
    }
    for (std::size_t l = 0; l < weights.size(); ++l) {
      Matrix z = (weights[l] * a).colwise() + biases[l];
      a = l + 1 < weights.size() ? Matrix(z.array().tanh()) : z;
      if (tape) tape->activations.push_back(a);
    }
    return a;
  }

  /// Gradients of a scalar loss given dLoss/dOutput; optionally dLoss/dInput.
  Mlp Backward(const Tape& tape, const Matrix& grad_out, Matrix* grad_input = nullptr) const {
    Mlp grad;
    grad.weights.resize(weights.size());
    grad.biases.resize(biases.size());
    Matrix delta = grad_out;
    for (std::size_t l = weights.size(); l-- > 0;) {
      if (l + 1 < weights.size()) {
        const Matrix& h = tape.activations[l + 1];
        delta = (delta.array() * (Scalar(1) - h.array().square())).matrix();
      }
      grad.weights[l] = delta * tape.activations[l].transpose();
      grad.biases[l] = delta.rowwise().sum();
      if (l > 0 || grad_input) delta = weights[l].transpose() * delta;
    }
    if (grad_input) *grad_input = delta;
    return grad;
  }

  template <typename Other>
  Mlp<Other> cast() const {
    Mlp<Other> out;
    for (const auto& w : weights) out.weights.push_back(w.template cast<Other>());
    for (const auto& b : biases) out.biases.push_back(b.template cast<Other>());
    return out;
  }


  bool AllFinite() const {
    for (std::size_t l = 0; l < weights.size(); ++l) {
      if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
    }
    return true;
  }

  friend bool operator==(const Mlp& a, const Mlp& b) {
    if (a.weights.size() != b.weights.size()) return false;
    for (std::size_t l = 0; l < a.weights.size(); ++l) {
      if (a.weights[l].rows() != b.weights[l].rows() || a.weights[l].cols() != b.weights[l].cols() ||
          a.weights[l] != b.weights[l] || a.biases[l] != b.biases[l]) {
        return false;
      }
    }
    return true;
  }
};

/// target <- tau * source + (1 - tau) * target, parameter-wise.
template <typename Scalar>
void SoftUpdate(Mlp<Scalar>& target, const Mlp<Scalar>& source, Scalar tau) {
  for (std::size_t l = 0; l < target.weights.size(); ++l) {
    target.weights[l] = tau * source.weights[l] + (Scalar(1) - tau) * target.weights[l];
    target.biases[l] = tau * source.biases[l] + (Scalar(1) - tau) * target.biases[l];
  }
}

/// Adam moments for one network.
template <typename Scalar>
struct Adam {
  Mlp<Scalar> m;
  Mlp<Scalar> v;
  std::int64_t steps = 0;

  static Adam For(const Mlp<Scalar>& net) {
    const auto sizes = net.sizes();
    return {Mlp<Scalar>::Zeros(sizes), Mlp<Scalar>::Zeros(sizes), 0};
  }

  void Step(Mlp<Scalar>& net, const Mlp<Scalar>& grad, Scalar lr, Scalar beta1 = Scalar(0.9),
            Scalar beta2 = Scalar(0.999), Scalar eps = Scalar(1e-8)) {
    ++steps;
    const Scalar c1 = Scalar(1) - static_cast<Scalar>(std::pow(beta1, steps));
    const Scalar c2 = Scalar(1) - static_cast<Scalar>(std::pow(beta2, steps));
    auto update = [&](auto& p, auto& mt, auto& vt, const auto& g) {
      mt = beta1 * mt + (Scalar(1) - beta1) * g;
      vt = beta2 * vt + (Scalar(1) - beta2) * g.cwiseProduct(g);
      p.array() -= lr * (mt.array() / c1) / ((vt.array() / c2).sqrt() + eps);
    };
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
      update(net.weights[l], m.weights[l], v.weights[l], grad.weights[l]);
      update(net.biases[l], m.biases[l], v.biases[l], grad.biases[l]);
    }
  }
};

}  // namespace cacp

#endif  // CACP_MLP_HPP_
