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

#ifndef CACP_INFERENCE_HPP_
#define CACP_INFERENCE_HPP_

#include <Eigen/Core>
#include <array>
#include <span>

#include "cacp/dataset.hpp"
#include "cacp/model.hpp"

namespace cacp {

/// Runs the chain on one [c, h, w] input: valid cross-correlation for Conv2D,
/// matrix product for Dense, then bias and activation. Accumulates in double.
/// Throws ShapeError when the input or an intermediate map does not fit.
Eigen::VectorXd Forward(const ModelGraph& graph, std::span<const float> input,
                        const std::array<std::int64_t, 3>& shape);

/// Index of the largest logit; the lowest index wins ties.
std::int64_t ArgMax(const Eigen::Ref<const Eigen::VectorXd>& logits);

double EvaluateAccuracy(const ModelGraph& graph, const LabeledDataset& dataset);

/// The search reward: validation accuracy of the compressed model, unchanged.
constexpr double Reward(double accuracy) { return accuracy; }

}  // namespace cacp

#endif  // CACP_INFERENCE_HPP_
