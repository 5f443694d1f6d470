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

#ifndef CACP_TESTS_SUPPORT_HPP_
#define CACP_TESTS_SUPPORT_HPP_

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cacp/model.hpp"
#include "cacp/random.hpp"

namespace cacp::testing {

inline std::int64_t RandInt(Rng& rng, std::int64_t lo, std::int64_t hi) {
  return lo + static_cast<std::int64_t>(UniformIndex(rng, static_cast<std::uint64_t>(hi - lo + 1)));
}

inline void FillRandom(TensorBlob& t, Rng& rng, double scale = 1.0) {
  for (auto& v : t.data) v = static_cast<float>(Uniform(rng, -scale, scale));
}

struct GraphSpec {
  std::int64_t min_layers = 3;
  std::int64_t max_layers = 8;
  std::int64_t max_channels = 6;
  std::int64_t max_side = 6;
  bool random_prunable = true;
};

/// Random valid chain: some Conv2D layers whose last one collapses the map to
/// side 1, then Dense layers ending in a non-prunable classifier.
inline ModelGraph RandomGraph(Rng& rng, const GraphSpec& spec = {}) {
  ModelGraph g;
  const std::int64_t n = RandInt(rng, spec.min_layers, spec.max_layers);
  const std::int64_t n_conv = RandInt(rng, 1, n - 1);
  std::int64_t side = RandInt(rng, 1, spec.max_side);
  std::int64_t ch = RandInt(rng, 1, 4);
  g.input_shape = {ch, side, side};
  g.num_classes = RandInt(rng, 2, 5);
  for (std::int64_t i = 0; i < n; ++i) {
    const bool last = i + 1 == n;
    const bool conv = i < n_conv;
    const std::int64_t out = last ? g.num_classes : RandInt(rng, 1, spec.max_channels);
    const Activation act = last ? Activation::kIdentity
                                : (UniformIndex(rng, 4) == 0 ? Activation::kIdentity : Activation::kReLU);
    const bool prunable = !last && (!spec.random_prunable || UniformIndex(rng, 5) != 0);
    LayerNode layer;
    if (conv) {
      std::int64_t k = side;
      std::int64_t stride = 1;
      if (i + 1 < n_conv) {
        k = RandInt(rng, 1, std::min<std::int64_t>(3, side));
        stride = RandInt(rng, 1, 2);
      }
      const std::int64_t out_side = (side - k) / stride + 1;
      layer = MakeLayer("conv" + std::to_string(i), LayerKind::kConv2D, ch, out, k, stride, out_side,
                        act, prunable);
      side = out_side;
    } else {
      layer = MakeLayer("fc" + std::to_string(i), LayerKind::kDense, ch, out, 1, 1, 1, act, prunable);
    }
    FillRandom(layer.weights, rng);
    FillRandom(layer.bias, rng, 0.5);
    g.layers.push_back(std::move(layer));
    ch = out;
  }
  return g;
}

inline std::vector<float> RandomInput(Rng& rng, const std::array<std::int64_t, 3>& shape) {
  std::vector<float> x(static_cast<std::size_t>(shape[0] * shape[1] * shape[2]));
  for (auto& v : x) v = static_cast<float>(Uniform(rng, -1.0, 1.0));
  return x;
}

/// Counts MACs of a layer by walking the naive loop nest.
inline std::uint64_t LoopNestMacs(const LayerNode& layer) {
  std::uint64_t count = 0;
  const std::int64_t side = layer.kind == LayerKind::kConv2D ? layer.out_spatial : 1;
  const std::int64_t k = layer.kind == LayerKind::kConv2D ? layer.kernel : 1;
  for (std::int64_t o = 0; o < layer.out_channels; ++o)
    for (std::int64_t y = 0; y < side; ++y)
      for (std::int64_t x = 0; x < side; ++x)
        for (std::int64_t c = 0; c < layer.in_channels; ++c)
          for (std::int64_t i = 0; i < k; ++i)
            for (std::int64_t j = 0; j < k; ++j) ++count;
  return count;
}

inline std::uint64_t LoopNestMacs(const ModelGraph& g) {
  std::uint64_t total = 0;
  for (const auto& layer : g.layers) total += LoopNestMacs(layer);
  return total;
}

inline std::uint64_t CountParams(const ModelGraph& g) {
  std::uint64_t total = 0;
  for (const auto& layer : g.layers) {
    for (std::int64_t o = 0; o < layer.out_channels; ++o) {
      ++total;  // bias
      for (std::int64_t c = 0; c < layer.in_channels; ++c)
        for (std::int64_t i = 0; i < layer.kernel * layer.kernel; ++i) ++total;
    }
  }
  return total;
}

/// Reference forward pass written as plain nested loops.
inline std::vector<double> NaiveForward(const ModelGraph& g, const std::vector<float>& input) {
  std::vector<double> x(input.begin(), input.end());
  std::int64_t side = g.input_shape[1];
  for (const auto& layer : g.layers) {
    const std::int64_t k = layer.kernel;
    const std::int64_t s = layer.stride;
    const std::int64_t os = layer.out_spatial;
    const std::int64_t in_c = layer.in_channels;
    std::vector<double> y(static_cast<std::size_t>(layer.out_channels * os * os), 0.0);
    for (std::int64_t o = 0; o < layer.out_channels; ++o) {
      for (std::int64_t r = 0; r < os; ++r) {
        for (std::int64_t c = 0; c < os; ++c) {
          double acc = layer.bias.data[static_cast<std::size_t>(o)];
          for (std::int64_t ic = 0; ic < in_c; ++ic) {
            for (std::int64_t i = 0; i < k; ++i) {
              for (std::int64_t j = 0; j < k; ++j) {
                const double w = layer.weights.data[static_cast<std::size_t>(((o * in_c + ic) * k + i) * k + j)];
                const double v = x[static_cast<std::size_t>((ic * side + r * s + i) * side + c * s + j)];
                acc += w * v;
              }
            }
          }
          if (layer.activation == Activation::kReLU) acc = std::max(acc, 0.0);
          y[static_cast<std::size_t>((o * os + r) * os + c)] = acc;
        }
      }
    }
    x = std::move(y);
    side = os;
  }
  return x;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path TempDir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("cacp_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace cacp::testing

#endif  // CACP_TESTS_SUPPORT_HPP_
