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

#ifndef CACP_FIXTURE_HPP_
#define CACP_FIXTURE_HPP_

#include <cstdint>
#include <vector>

#include "cacp/dataset.hpp"
#include "cacp/model.hpp"

namespace cacp {

struct FixtureSpec {
  /// Output widths of the 3x3 Conv2D layers; a Dense classifier is appended.
  std::vector<std::int64_t> widths{8, 16, 16};
  /// Fraction of each conv layer's outputs planted as 0.01-scaled duplicates.
  double redundancy = 0.5;
  std::uint64_t seed = 7;
  std::int64_t input_channels = 3;
  std::int64_t num_classes = 4;
  std::int64_t samples = 256;
};

struct Fixture {
  ModelGraph graph;
  LabeledDataset dataset;
  /// Planted (redundant) output channels of each layer, sorted.
  std::vector<std::vector<std::int64_t>> planted;
};

/// Deterministic synthetic model with known redundancy, plus a labelled
/// validation set drawn from the model's own decisions (class-balanced,
/// with a logit margin so predictions are stable).
///
/// Each planted channel copies a real channel's filter and bias scaled by
/// 0.01, and every downstream weight reading a planted channel is zero, so
/// planted channels have the lowest L1 scores and removing them leaves all
/// logits unchanged. Throws InvalidSpec.
Fixture MakeRedundantFixture(const FixtureSpec& spec);

}  // namespace cacp

#endif  // CACP_FIXTURE_HPP_
