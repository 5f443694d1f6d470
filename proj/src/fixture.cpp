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

#include "cacp/fixture.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cacp/error.hpp"
#include "cacp/inference.hpp"
#include "cacp/pruner.hpp"
#include "cacp/random.hpp"

namespace cacp {

namespace {

constexpr float kPlantScale = 0.01f;
constexpr std::int64_t kKernel = 3;

void ValidateSpec(const FixtureSpec& spec) {
  if (!(spec.redundancy >= 0.0 && spec.redundancy < 1.0)) {
    throw Error(ErrorCode::kInvalidSpec, "redundancy must lie in [0, 1)");
  }
  if (spec.widths.empty()) throw Error(ErrorCode::kInvalidSpec, "at least one width is required");
  for (auto w : spec.widths) {
    if (w <= 0) throw Error(ErrorCode::kInvalidSpec, "widths must be positive");
  }
  if (spec.input_channels <= 0) throw Error(ErrorCode::kInvalidSpec, "input_channels must be positive");
  if (spec.num_classes < 2) throw Error(ErrorCode::kInvalidSpec, "need at least two classes");
  if (spec.samples <= 0) throw Error(ErrorCode::kInvalidSpec, "samples must be positive");
}

// Picks `count` of `n` indices with a seeded Fisher-Yates shuffle.
std::vector<std::int64_t> PickIndices(std::int64_t n, std::int64_t count, Rng& rng) {
  std::vector<std::int64_t> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  for (std::int64_t i = n - 1; i > 0; --i) {
    const auto j = static_cast<std::int64_t>(UniformIndex(rng, static_cast<std::uint64_t>(i + 1)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(count));
  std::sort(idx.begin(), idx.end());
  return idx;
}

// Fills real filters with He-scaled normals, zeroing inputs that read planted
// upstream channels, then writes planted filters as scaled copies.
void FillLayer(LayerNode& layer, const std::vector<bool>& upstream_planted,
               const std::vector<std::int64_t>& planted, Rng& rng, bool with_bias) {
  const std::int64_t fan_in = layer.fan_in();
  const std::int64_t spatial = layer.kernel * layer.kernel;
  std::vector<bool> is_planted(static_cast<std::size_t>(layer.out_channels), false);
  for (auto p : planted) is_planted[static_cast<std::size_t>(p)] = true;
  std::vector<std::int64_t> real;
  for (std::int64_t c = 0; c < layer.out_channels; ++c) {
    if (!is_planted[static_cast<std::size_t>(c)]) real.push_back(c);
  }
  std::int64_t live_inputs = 0;
  for (bool p : upstream_planted) live_inputs += p ? 0 : 1;
  const double scale = std::sqrt(2.0 / static_cast<double>(std::max<std::int64_t>(live_inputs * spatial, 1)));

  auto& w = layer.weights.data;
  for (;;) {
    for (auto c : real) {
      for (std::int64_t i = 0; i < layer.in_channels; ++i) {
        for (std::int64_t s = 0; s < spatial; ++s) {
          const auto at = static_cast<std::size_t>(c * fan_in + i * spatial + s);
          w[at] = upstream_planted[static_cast<std::size_t>(i)]
                      ? 0.0f
                      : static_cast<float>(scale * StandardNormal(rng));
        }
      }
      layer.bias.data[static_cast<std::size_t>(c)] =
          with_bias ? static_cast<float>(0.1 * StandardNormal(rng)) : 0.0f;
    }
    // Planted copies must rank strictly below every real filter.
    const auto scores = ChannelImportance(layer);
    double lo = INFINITY, hi = 0.0;
    for (auto c : real) {
      lo = std::min(lo, scores[static_cast<std::size_t>(c)]);
      hi = std::max(hi, scores[static_cast<std::size_t>(c)]);
    }
    if (planted.empty() || static_cast<double>(kPlantScale) * hi < 0.5 * lo) break;
  }
  for (std::size_t j = 0; j < planted.size(); ++j) {
    const std::int64_t src = real[j % real.size()];
    const std::int64_t dst = planted[j];
    for (std::int64_t e = 0; e < fan_in; ++e) {
      w[static_cast<std::size_t>(dst * fan_in + e)] =
          kPlantScale * w[static_cast<std::size_t>(src * fan_in + e)];
    }
    layer.bias.data[static_cast<std::size_t>(dst)] =
        kPlantScale * layer.bias.data[static_cast<std::size_t>(src)];
  }
}

}  // namespace

Fixture MakeRedundantFixture(const FixtureSpec& spec) {
  ValidateSpec(spec);
  Rng rng = DeriveRng(spec.seed, 0);
  Fixture fx;
  ModelGraph& g = fx.graph;
  const auto convs = static_cast<std::int64_t>(spec.widths.size());
  const std::int64_t side = 1 + convs * (kKernel - 1);
  g.input_shape = {spec.input_channels, side, side};
  g.num_classes = spec.num_classes;

  std::vector<bool> upstream(static_cast<std::size_t>(spec.input_channels), false);
  std::int64_t in_ch = spec.input_channels;
  std::int64_t in_side = side;
  for (std::int64_t i = 0; i < convs; ++i) {
    const std::int64_t width = spec.widths[static_cast<std::size_t>(i)];
    const auto planted_count =
        static_cast<std::int64_t>(std::floor(spec.redundancy * static_cast<double>(width)));
    if (planted_count >= width) {
      throw Error(ErrorCode::kInvalidSpec, "layer " + std::to_string(i) + " has no real channels");
    }
    LayerNode layer = MakeLayer("conv" + std::to_string(i), LayerKind::kConv2D, in_ch, width,
                                kKernel, 1, in_side - kKernel + 1, Activation::kReLU, true);
    std::vector<std::int64_t> planted = PickIndices(width, planted_count, rng);
    FillLayer(layer, upstream, planted, rng, true);
    upstream.assign(static_cast<std::size_t>(width), false);
    for (auto p : planted) upstream[static_cast<std::size_t>(p)] = true;
    fx.planted.push_back(std::move(planted));
    g.layers.push_back(std::move(layer));
    in_ch = width;
    in_side -= kKernel - 1;
  }
  LayerNode head = MakeLayer("fc", LayerKind::kDense, in_ch, spec.num_classes, 1, 1, 1,
                             Activation::kIdentity, false);
  FillLayer(head, upstream, {}, rng, false);
  fx.planted.emplace_back();
  g.layers.push_back(std::move(head));

  // Labels come from the model itself; keep samples whose top-2 logit gap is
  // comfortable and balance the classes where the model allows it.
  LabeledDataset& ds = fx.dataset;
  ds.input_shape = g.input_shape;
  ds.num_classes = spec.num_classes;
  ds.split = SplitTag::kValidation;
  const std::int64_t n = ds.sample_size();
  const std::int64_t quota = (spec.samples + spec.num_classes - 1) / spec.num_classes;
  std::vector<std::int64_t> per_class(static_cast<std::size_t>(spec.num_classes), 0);

  std::vector<float> x(static_cast<std::size_t>(n));
  auto draw = [&]() {
    for (auto& v : x) v = static_cast<float>(StandardNormal(rng));
    return Forward(g, x, g.input_shape);
  };
  // Margin threshold from the spread of a pilot batch of logits.
  double spread = 0.0;
  for (int i = 0; i < 64; ++i) spread += draw().cwiseAbs().mean();
  const double margin = 0.1 * spread / 64.0;

  const std::int64_t max_attempts = 400 * spec.samples;
  for (std::int64_t attempt = 0; std::ssize(ds.labels) < spec.samples; ++attempt) {
    const Eigen::VectorXd logits = draw();
    const std::int64_t top = ArgMax(logits);
    double second = -INFINITY;
    for (Eigen::Index c = 0; c < logits.size(); ++c) {
      if (c != top) second = std::max(second, logits(c));
    }
    if (logits(top) - second < margin) continue;
    if (attempt < max_attempts && per_class[static_cast<std::size_t>(top)] >= quota) continue;
    ++per_class[static_cast<std::size_t>(top)];
    ds.inputs.insert(ds.inputs.end(), x.begin(), x.end());
    ds.labels.push_back(top);
  }
  return fx;
}

}  // namespace cacp
