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

#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>

#include "CLI11.hpp"
#include "cacp/binary_io.hpp"
#include "cacp/driver.hpp"
#include "cacp/error.hpp"
#include "cacp/fixture.hpp"
#include "cacp/report.hpp"
#include "cacp/verify.hpp"
#include "json.hpp"

namespace cacp::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInfeasibleBudget: return kExitInfeasible;
    case ErrorCode::kDivergedParameters: return kExitDiverged;
    case ErrorCode::kCorruptPolicy: return kExitCorruptPolicy;
    case ErrorCode::kPlanMismatch:
    case ErrorCode::kEmptyLayer: return kExitCheckFailed;
    default: return kExitInvalidConfig;
  }
}

Rate ParseRateValue(const json& v) {
  return v.is_string() ? Rate::Parse(v.get<std::string>()) : Rate::FromDouble(v.get<double>());
}

// Config file keys mirror TrainConfig; unknown keys are rejected.
void ApplyConfigFile(const fs::path& path, TrainConfig& cfg, std::optional<std::uint64_t>& seed) {
  json doc;
  try {
    doc = json::parse(io::ReadFile(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, path.string() + ": " + e.what());
  }
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "beta_support") {
        cfg.beta_support.clear();
        for (const auto& b : value) cfg.beta_support.push_back(ParseRateValue(b));
      } else if (key == "alpha_max") {
        cfg.alpha_max = ParseRateValue(value);
      } else if (key == "episodes") {
        cfg.episodes = value.get<int>();
      } else if (key == "warmup_episodes") {
        cfg.warmup_episodes = value.get<int>();
      } else if (key == "seed") {
        seed = value.get<std::uint64_t>();
      } else if (key == "jobs") {
        cfg.jobs = value.get<int>();
      } else if (key == "policy") {
        auto& p = cfg.policy;
        for (const auto& [pk, pv] : value.items()) {
          if (pk == "hidden") p.hidden = pv.get<int>();
          else if (pk == "lr_actor") p.lr_actor = pv.get<double>();
          else if (pk == "lr_critic") p.lr_critic = pv.get<double>();
          else if (pk == "discount") p.discount = pv.get<double>();
          else if (pk == "tau") p.tau = pv.get<double>();
          else if (pk == "batch_size") p.batch_size = pv.get<std::size_t>();
          else if (pk == "buffer_size") p.buffer_size = pv.get<std::size_t>();
          else if (pk == "sigma_init") p.sigma_init = pv.get<double>();
          else if (pk == "sigma_decay") p.sigma_decay = pv.get<double>();
          else if (pk == "updates_per_episode") p.updates_per_episode = pv.get<int>();
          else if (pk == "preact_penalty") p.preact_penalty = pv.get<double>();
          else throw Error(ErrorCode::kInvalidConfig, "unknown policy key '" + pk + "'");
        }
      } else {
        throw Error(ErrorCode::kInvalidConfig, "unknown config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, path.string() + ": " + e.what());
  }
}

std::vector<Rate> ParseRates(const std::vector<std::string>& texts) {
  std::vector<Rate> rates;
  for (const auto& t : texts) {
    Rate r = Rate::Parse(t);
    if (!(r > Rate(0, 1) && r < Rate(1, 1))) {
      throw Error(ErrorCode::kInvalidConfig, "--beta must lie in (0, 1), got " + t);
    }
    rates.push_back(r);
  }
  return rates;
}

void EnsureDir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoFailure, "cannot create " + dir.string() + ": " + ec.message());
}

std::string Tag(const std::string& method, const Rate& beta) {
  return method + "_b" + beta.ToString();
}

struct Options {
  std::string model, dataset, policy, out, config, artifacts, plan, report, compressed, csv;
  std::vector<std::string> betas, inputs;
  std::vector<double> oracle_grid;
  std::vector<std::int64_t> widths{8, 16, 16};
  double redundancy = 0.5;
  std::int64_t classes = 4, samples = 256;
  std::optional<std::string> alpha_max;
  std::optional<int> episodes, warmup, jobs;
  std::optional<std::uint64_t> seed;
};

int CmdFixture(const Options& o, std::ostream& out) {
  if (!o.seed) throw Error(ErrorCode::kInvalidConfig, "--seed is required for fixture");
  FixtureSpec spec;
  spec.widths = o.widths;
  spec.redundancy = o.redundancy;
  spec.seed = *o.seed;
  spec.num_classes = o.classes;
  spec.samples = o.samples;
  const Fixture fx = MakeRedundantFixture(spec);
  EnsureDir(o.out);
  SaveModel(fx.graph, fs::path(o.out) / "model.json");
  SaveDataset(fx.dataset, fs::path(o.out) / "dataset.json");
  out << (fs::path(o.out) / "model.json").string() << "\n"
      << (fs::path(o.out) / "dataset.json").string() << "\n";
  return kExitOk;
}

int CmdTrain(const Options& o, std::ostream& out, std::ostream& err) {
  TrainConfig cfg;
  std::optional<std::uint64_t> seed;
  if (!o.config.empty()) ApplyConfigFile(o.config, cfg, seed);
  if (!o.betas.empty()) cfg.beta_support = ParseRates(o.betas);
  if (o.alpha_max) cfg.alpha_max = Rate::Parse(*o.alpha_max);
  if (o.episodes) cfg.episodes = *o.episodes;
  if (o.warmup) cfg.warmup_episodes = *o.warmup;
  if (o.jobs) cfg.jobs = *o.jobs;
  if (o.seed) seed = o.seed;
  if (!seed) throw Error(ErrorCode::kInvalidConfig, "--seed is required for train");
  cfg.seed = *seed;
  CheckRates(Rate(1, 2), cfg.alpha_max);

  const ModelGraph graph = LoadModel(o.model);
  const LabeledDataset dataset = LoadDataset(o.dataset);
  CheckTrainConfig(cfg, graph);
  EnsureDir(o.out);
  const fs::path log_path = fs::path(o.out) / "episodes.jsonl";
  std::ofstream log(log_path, std::ios::trunc);
  if (!log) throw Error(ErrorCode::kIoFailure, "cannot write " + log_path.string());
  const TrainResult result = Train(graph, dataset, cfg, [&](const EpisodeRecord& r) {
    log << ToJsonLine(r) << "\n";
  });
  log.close();
  const fs::path policy_path = fs::path(o.out) / "policy.bin";
  SavePolicy(result.theta, policy_path);
  err << "trained " << cfg.episodes << " episodes\n";
  out << policy_path.string() << "\n" << log_path.string() << "\n";
  return kExitOk;
}

int CmdCompress(const Options& o, std::ostream& out) {
  const std::vector<Rate> betas = ParseRates(o.betas);
  const ModelGraph graph = LoadModel(o.model);
  const LabeledDataset dataset = LoadDataset(o.dataset);
  const PolicyParams theta = LoadPolicy(o.policy);
  EnsureDir(o.out);
  const fs::path dir(o.out);
  std::vector<CompressionReport> reports;
  auto emit = [&](const std::string& tag, const ModelGraph& g, const CompressionReport& r) {
    SaveModel(g, dir / ("model_" + tag + ".json"));
    SavePlan(r.plan, dir / ("plan_" + tag + ".json"));
    SaveReport(r, dir / ("report_" + tag + ".json"));
    reports.push_back(r);
  };
  // Every rate is served by the same loaded parameters; nothing is retrained.
  for (const Rate& beta : betas) {
    const Compressed c = Compress(graph, dataset, theta, beta);
    emit(Tag("cacp", beta), c.graph, c.report);
    const Compressed u = BaselineUniform(graph, dataset, beta.value());
    emit(Tag("uniform", beta), u.graph, u.report);
    if (!o.oracle_grid.empty()) {
      const OracleResult best = BruteForceOracle(graph, dataset, beta, o.oracle_grid);
      const ModelGraph g = ApplyPlan(graph, best.plan);
      emit(Tag("oracle", beta), g,
           MakeReport(graph, g, best.plan, "oracle", best.reward, c.report.base_accuracy,
                      RoundingSlack(graph, best.plan)));
    }
  }
  out << FormatTable(reports);
  return kExitOk;
}

std::vector<fs::path> CollectReports(const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::directory_iterator(in)) {
        const auto name = entry.path().filename().string();
        if (name.starts_with("report_") && entry.path().extension() == ".json") found.push_back(entry.path());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (fs::exists(in)) {
      files.emplace_back(in);
    } else {
      throw Error(ErrorCode::kInvalidConfig, "no such input: " + in);
    }
  }
  return files;
}

int CmdReport(const Options& o, std::ostream& out) {
  const auto files = CollectReports(o.inputs);
  if (files.empty()) throw Error(ErrorCode::kInvalidConfig, "no report inputs (use --input)");
  std::vector<CompressionReport> reports;
  for (const auto& f : files) reports.push_back(LoadReport(f));
  const std::string table = FormatTable(reports);
  const std::string csv = FormatCsv(reports);
  out << table;
  if (!o.csv.empty()) io::WriteFile(o.csv, csv);
  if (!o.out.empty()) {
    EnsureDir(o.out);
    io::WriteFile(fs::path(o.out) / "report.csv", csv);
    io::WriteFile(fs::path(o.out) / "report.txt", table);
  }
  return kExitOk;
}

int CmdVerify(const Options& o, std::ostream& out) {
  const ModelGraph original = LoadModel(o.model);
  std::optional<LabeledDataset> dataset;
  if (!o.dataset.empty()) dataset = LoadDataset(o.dataset);

  struct Job {
    fs::path plan, report, compressed;
  };
  std::vector<Job> jobs;
  if (!o.artifacts.empty()) {
    std::vector<fs::path> plans;
    for (const auto& entry : fs::directory_iterator(o.artifacts)) {
      const auto name = entry.path().filename().string();
      if (name.starts_with("plan_") && entry.path().extension() == ".json") plans.push_back(entry.path());
    }
    std::sort(plans.begin(), plans.end());
    for (const auto& p : plans) {
      const std::string tag = p.stem().string().substr(5);
      jobs.push_back({p, p.parent_path() / ("report_" + tag + ".json"),
                      p.parent_path() / ("model_" + tag + ".json")});
    }
  }
  if (!o.plan.empty()) jobs.push_back({o.plan, o.report, o.compressed});
  if (jobs.empty()) throw Error(ErrorCode::kInvalidConfig, "nothing to verify (use --artifacts or --plan)");

  bool all = true;
  for (const auto& job : jobs) {
    out << "== " << job.plan.string() << "\n";
    std::vector<CheckResult> checks;
    try {
      ArtifactSet set{original, LoadPlan(job.plan), std::nullopt, std::nullopt,
                      dataset ? &*dataset : nullptr};
      if (!job.report.empty() && fs::exists(job.report)) set.report = LoadReport(job.report);
      if (!job.compressed.empty() && fs::exists(job.compressed)) set.compressed = LoadModel(job.compressed);
      checks = VerifyArtifacts(set, o.seed.value_or(0));
    } catch (const Error& e) {
      checks.push_back({std::string(ErrorName(e.code())), false, e.what()});
    }
    for (const auto& c : checks) {
      all = all && c.passed;
      out << (c.passed ? "[PASS] " : "[FAIL] ") << c.name;
      if (!c.detail.empty()) out << ": " << c.detail;
      out << "\n";
    }
  }
  out << (all ? "verify: all checks passed\n" : "verify: FAILED\n");
  return all ? kExitOk : kExitCheckFailed;
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Conditional automated channel pruning"};
  app.require_subcommand(1);
  Options o;

  auto* fixture = app.add_subcommand("fixture", "Write a synthetic redundant model and dataset");
  fixture->add_option("--out", o.out, "Output directory")->required();
  fixture->add_option("--widths", o.widths, "Conv layer widths")->delimiter(',');
  fixture->add_option("--redundancy", o.redundancy, "Planted fraction per layer");
  fixture->add_option("--classes", o.classes, "Number of classes");
  fixture->add_option("--samples", o.samples, "Dataset size");
  fixture->add_option("--seed", o.seed, "Random seed (required)");

  auto* train = app.add_subcommand("train", "Train one conditional policy over a rate support");
  train->add_option("--model", o.model, "Model manifest")->required();
  train->add_option("--dataset", o.dataset, "Validation dataset manifest")->required();
  train->add_option("--beta", o.betas, "Support rate (repeatable)");
  train->add_option("--alpha-max", o.alpha_max, "Maximum per-layer rate");
  train->add_option("--episodes", o.episodes, "Training episodes");
  train->add_option("--warmup", o.warmup, "Random-action warmup episodes");
  train->add_option("--seed", o.seed, "Random seed (required)");
  train->add_option("--jobs", o.jobs, "Episodes generated in parallel");
  train->add_option("--out", o.out, "Output directory")->required();
  train->add_option("--config", o.config, "JSON config file");

  auto* compress = app.add_subcommand("compress", "Compress a model for one or more rates");
  compress->add_option("--model", o.model, "Model manifest")->required();
  compress->add_option("--dataset", o.dataset, "Validation dataset manifest")->required();
  compress->add_option("--policy", o.policy, "Trained policy file")->required();
  compress->add_option("--beta", o.betas, "Target rate (repeatable)")->required();
  compress->add_option("--oracle-grid", o.oracle_grid, "Also run the exhaustive oracle on this grid")
      ->delimiter(',');
  compress->add_option("--out", o.out, "Output directory")->required();

  auto* report = app.add_subcommand("report", "Tabulate compression reports");
  report->add_option("--input", o.inputs, "Report file or directory (repeatable)");
  report->add_option("--csv", o.csv, "Write CSV here");
  report->add_option("--out", o.out, "Write report.csv and report.txt here");

  auto* verify = app.add_subcommand("verify", "Re-check emitted artifacts");
  verify->add_option("--model", o.model, "Original model manifest")->required();
  verify->add_option("--dataset", o.dataset, "Dataset manifest (checks accuracy)");
  verify->add_option("--artifacts", o.artifacts, "Directory written by compress");
  verify->add_option("--plan", o.plan, "Single plan file");
  verify->add_option("--report", o.report, "Report for --plan");
  verify->add_option("--compressed", o.compressed, "Compressed model for --plan");
  verify->add_option("--seed", o.seed, "Seed for the zeroing-equivalence sample");

  std::vector<const char*> argv{"cacp"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalidConfig;
  }

  try {
    if (fixture->parsed()) return CmdFixture(o, out);
    if (train->parsed()) return CmdTrain(o, out, err);
    if (compress->parsed()) return CmdCompress(o, out);
    if (report->parsed()) return CmdReport(o, out);
    if (verify->parsed()) return CmdVerify(o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalidConfig;
  }
  return kExitInvalidConfig;
}

}  // namespace cacp::cli
