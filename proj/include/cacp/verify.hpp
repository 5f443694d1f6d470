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

#ifndef CACP_VERIFY_HPP_
#define CACP_VERIFY_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cacp/dataset.hpp"
#include "cacp/driver.hpp"
#include "cacp/model.hpp"
#include "cacp/pruner.hpp"

namespace cacp {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ArtifactSet {
  ModelGraph original;
  PruningPlan plan;
  std::optional<ModelGraph> compressed;
  std::optional<CompressionReport> report;
  const LabeledDataset* dataset = nullptr;
};

/// Re-checks one compression artifact set: graph validity, plan consistency,
/// plan-cost consistency, report consistency, budget guarantee, and zeroing
/// equivalence on `samples` seeded random inputs.
std::vector<CheckResult> VerifyArtifacts(const ArtifactSet& artifacts, std::uint64_t seed,
                                         int samples = 16);

/// flops_drop_pct >= 100 * (beta - rounding_slack), up to float formatting noise.
bool SatisfiesBudget(double flops_drop_pct, double beta, double rounding_slack);

}  // namespace cacp

#endif  // CACP_VERIFY_HPP_
