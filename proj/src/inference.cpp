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

#include "cacp/inference.hpp"

#include <string>

#include "cacp/error.hpp"

namespace cacp {

namespace {

using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatrixXf = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Feature map stored as [channels, side * side], row-major.
struct FeatureMap {
  RowMatrixXd values;
  std::int64_t side = 0;
};

FeatureMap Conv(const LayerNode& layer, const FeatureMap& in) {
  const std::int64_t k = layer.kernel;
  const std::int64_t s = layer.stride;
  if (in.side < k) throw Error(ErrorCode::kShapeError, layer.id + ": kernel larger than input");
  const std::int64_t side = (in.side - k) / s + 1;
  if (side != layer.out_spatial) {
    throw Error(ErrorCode::kShapeError, layer.id + ": computed output side " +
                                            std::to_string(side) + " != out_spatial " +
                                            std::to_string(layer.out_spatial));
  }
  const std::int64_t channels = in.values.rows();
  // im2col: one column per output position, rows ordered (c, ky, kx) like the weights.
  Eigen::MatrixXd cols(channels * k * k, side * side);
  for (std::int64_t oy = 0; oy < side; ++oy) {
    for (std::int64_t ox = 0; ox < side; ++ox) {
      const std::int64_t col = oy * side + ox;
      std::int64_t row = 0;
      for (std::int64_t c = 0; c < channels; ++c) {
        for (std::int64_t ky = 0; ky < k; ++ky) {
          const std::int64_t base = (oy * s + ky) * in.side + ox * s;
          for (std::int64_t kx = 0; kx < k; ++kx) cols(row++, col) = in.values(c, base + kx);
        }
      }
    }
  }
  const Eigen::Map<const RowMatrixXf> w(layer.weights.data.data(), layer.out_channels,
                                        channels * k * k);
  const Eigen::Map<const Eigen::VectorXf> b(layer.bias.data.data(), layer.out_channels);
  FeatureMap out;
  out.side = side;
  out.values = w.cast<double>() * cols;
  out.values.colwise() += b.cast<double>();
  return out;
}

FeatureMap Dense(const LayerNode& layer, const FeatureMap& in) {
  if (in.side != 1) {
    throw Error(ErrorCode::kShapeError, layer.id + ": Dense input must have spatial side 1");
  }
  const Eigen::Map<const RowMatrixXf> w(layer.weights.data.data(), layer.out_channels,
                                        layer.in_channels);
  const Eigen::Map<const Eigen::VectorXf> b(layer.bias.data.data(), layer.out_channels);
  FeatureMap out;
  out.side = 1;
  out.values = w.cast<double>() * in.values + b.cast<double>();
  return out;
}

}  // namespace

Eigen::VectorXd Forward(const ModelGraph& graph, std::span<const float> input,
                        const std::array<std::int64_t, 3>& shape) {
  if (shape != graph.input_shape) {
    throw Error(ErrorCode::kShapeError,
                "input shape [" + std::to_string(shape[0]) + "," + std::to_string(shape[1]) + "," +
                    std::to_string(shape[2]) + "] does not match model input");
  }
  if (std::ssize(input) != shape[0] * shape[1] * shape[2]) {
    throw Error(ErrorCode::kShapeError, "input length does not match its shape");
  }
  FeatureMap x;
  x.side = shape[1];
  x.values = Eigen::Map<const RowMatrixXf>(input.data(), shape[0], shape[1] * shape[2]).cast<double>();
  for (const LayerNode& layer : graph.layers) {
    if (x.values.rows() != layer.in_channels) {
      throw Error(ErrorCode::kShapeError, layer.id + ": expected " +
                                              std::to_string(layer.in_channels) +
                                              " input channels, got " +
                                              std::to_string(x.values.rows()));
    }
    x = layer.kind == LayerKind::kConv2D ? Conv(layer, x) : Dense(layer, x);
    if (layer.activation == Activation::kReLU) x.values = x.values.cwiseMax(0.0);
  }
  return Eigen::Map<const Eigen::VectorXd>(x.values.data(), x.values.size());
}

std::int64_t ArgMax(const Eigen::Ref<const Eigen::VectorXd>& logits) {
  std::int64_t best = 0;
  for (Eigen::Index i = 1; i < logits.size(); ++i) {
    if (logits(i) > logits(best)) best = i;
  }
  return best;
}

double EvaluateAccuracy(const ModelGraph& graph, const LabeledDataset& dataset) {
  if (dataset.size() == 0) return 0.0;
  const auto n = static_cast<std::size_t>(dataset.sample_size());
  std::size_t correct = 0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const Eigen::VectorXd logits =
        Forward(graph, std::span<const float>(dataset.sample(i), n), dataset.input_shape);
    if (ArgMax(logits) == dataset.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

}  // namespace cacp
