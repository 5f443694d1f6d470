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

#include "cacp/verify.hpp"

#include <cmath>

#include "cacp/cost.hpp"
#include "cacp/error.hpp"
#include "cacp/inference.hpp"
#include "cacp/random.hpp"

namespace cacp {

bool SatisfiesBudget(double flops_drop_pct, double beta, double rounding_slack) {
  return flops_drop_pct >= 100.0 * (beta - rounding_slack) - 1e-9;
}

namespace {

std::string Describe(const std::vector<Diagnostic>& diags) {
  std::string s;
  for (const auto& d : diags) s += (s.empty() ? "" : "; ") + d.layer_id + ": " + d.message;
  return s;
}

}  // namespace

std::vector<CheckResult> VerifyArtifacts(const ArtifactSet& a, std::uint64_t seed, int samples) {
  std::vector<CheckResult> out;
  if (auto diags = ValidateGraph(a.original); !diags.empty()) {
    out.push_back({"original graph validity", false, Describe(diags)});
    return out;
  }
  try {
    CheckPlan(a.original, a.plan);
    out.push_back({"plan consistency", true, ""});
  } catch (const Error& e) {
    out.push_back({"plan consistency", false, e.what()});
    return out;
  }

  const ModelGraph derived = ApplyPlan(a.original, a.plan);
  const ModelGraph& compressed = a.compressed ? *a.compressed : derived;
  {
    const auto diags = ValidateGraph(compressed);
    out.push_back({"graph validity", diags.empty(), Describe(diags)});
  }
  {
    const bool same = compressed == derived;
    const bool cost = TotalCost(compressed) == TotalCost(derived);
    out.push_back({"plan-cost consistency", same && cost,
                   same ? "" : "compressed model differs from the plan applied to the original"});
  }

  const Macs c0 = TotalCost(a.original);
  const Macs c1 = TotalCost(derived);
  const double flops = 100.0 * static_cast<double>((c0 - c1).value()) / static_cast<double>(c0.value());
  const double p0 = static_cast<double>(ParamsCount(a.original));
  const double params = 100.0 * (p0 - static_cast<double>(ParamsCount(derived))) / p0;
  const double slack = RoundingSlack(a.original, a.plan);

  if (a.report) {
    const auto& r = *a.report;
    std::string detail;
    if (std::abs(r.flops_drop_pct - flops) > 1e-9) detail += "flops_drop_pct mismatch; ";
    if (std::abs(r.params_drop_pct - params) > 1e-9) detail += "params_drop_pct mismatch; ";
    if (std::abs(r.rounding_slack - slack) > 1e-12) detail += "rounding_slack mismatch; ";
    if (r.beta != a.plan.beta) detail += "beta differs from plan; ";
    if (!(r.plan == a.plan)) detail += "embedded plan differs; ";
    out.push_back({"report consistency", detail.empty(), detail});

    if (r.method == "uniform") {
      out.push_back({"budget guarantee", true, "not applicable to the uniform baseline"});
    } else {
      const bool ok = SatisfiesBudget(r.flops_drop_pct, r.beta, slack) &&
                      SatisfiesBudget(flops, r.beta, slack);
      char buf[160];
      std::snprintf(buf, sizeof(buf), "flops drop %.4f%% vs required %.4f%%", r.flops_drop_pct,
                    100.0 * (r.beta - slack));
      out.push_back({"budget guarantee", ok, buf});
    }
    if (a.dataset) {
      const double acc = EvaluateAccuracy(derived, *a.dataset);
      out.push_back({"accuracy", acc == r.accuracy,
                     acc == r.accuracy ? "" : "recomputed accuracy " + std::to_string(acc)});
    }
  } else {
    out.push_back({"budget guarantee", SatisfiesBudget(flops, a.plan.beta, slack), ""});
  }

  {
    const ModelGraph zeroed = ZeroDroppedChannels(a.original, a.plan);
    Rng rng = DeriveRng(seed, 77);
    const auto shape = a.original.input_shape;
    std::vector<float> x(static_cast<std::size_t>(shape[0] * shape[1] * shape[2]));
    double worst = 0.0;
    for (int i = 0; i < samples; ++i) {
      for (auto& v : x) v = static_cast<float>(StandardNormal(rng));
      worst = std::max(worst, (Forward(derived, x, shape) - Forward(zeroed, x, shape)).cwiseAbs().maxCoeff());
    }
    out.push_back({"zeroing equivalence", worst < 1e-5, "max |dlogit| = " + std::to_string(worst)});
  }
  return out;
}

}  // namespace cacp
