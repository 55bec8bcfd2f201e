// Copyright 2026 The maclab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line driver: train, extract, evaluate, edit and report.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "maclab/coupling.h"
#include "maclab/error.h"
#include "maclab/experiment.h"
#include "maclab/graph_entropy.h"
#include "maclab/information.h"
#include "maclab/mac_env.h"
#include "maclab/protocol_learn.h"
#include "maclab/random.h"
#include "maclab/symbolic_extract.h"
#include "maclab/symbolic_protocol.h"
#include "maclab/symbolic_runtime.h"

namespace {

using maclab::Arm;
using maclab::ErrorKind;
using maclab::ExperimentConfig;
using maclab::Fail;
using Json = nlohmann::json;
namespace fs = std::filesystem;

constexpr int kExitConfig = 2;
constexpr int kExitInvariant = 3;
constexpr int kExitMissing = 4;

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig:
      return kExitConfig;
    case ErrorKind::kMissingArtifact:
      return kExitMissing;
    default:
      return kExitInvariant;
  }
}

std::string OneLine(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool deterministic = false;
  std::string arm = "pos";
};

struct Context {
  ExperimentConfig config;
  fs::path root;
  Arm arm = Arm::kPos;
  std::vector<std::uint64_t> seeds;
  bool deterministic = false;
};

Context Resolve(const Options& o) {
  Context c;
  c.config = o.config_path.empty() ? ExperimentConfig{}
                                   : maclab::LoadExperimentConfig(o.config_path);
  c.root = o.out.empty() ? fs::path(c.config.output_dir) : fs::path(o.out);
  const auto arm = maclab::ArmFromName(o.arm);
  if (!arm) Fail(ErrorKind::kConfig, "--arm must be one of pos, neg, off");
  c.arm = *arm;
  c.seeds = o.seed ? std::vector<std::uint64_t>{*o.seed} : c.config.seeds;
  c.deterministic = o.deterministic;
  return c;
}

std::string ReadInput(const std::string& path) {
  if (path.empty() || path == "-") {
    return std::string(std::istreambuf_iterator<char>(std::cin), {});
  }
  return maclab::ReadFile(path);
}

Json ParseJsonInput(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    Fail(ErrorKind::kConfig, std::string("input is not valid JSON: ") + e.what());
  }
}

std::vector<double> NumberArray(const Json& j, const std::string& what) {
  if (!j.is_array()) Fail(ErrorKind::kConfig, what + ": expected an array");
  std::vector<double> v;
  for (const Json& x : j) {
    if (!x.is_number()) Fail(ErrorKind::kConfig, what + ": expected numbers");
    v.push_back(x.get<double>());
  }
  return v;
}

void RunTrain(const Context& c) {
  for (std::uint64_t seed : c.seeds) {
    const auto start = std::chrono::steady_clock::now();
    const auto [env, train] = maclab::RunConfigs(c.config, c.arm, seed);
    const maclab::TrainResult result = maclab::Train(env, train);
    const fs::path dir = maclab::RunDir(c.root, c.arm, seed);
    maclab::WriteFile(dir / maclab::files::kProtocol,
                      maclab::TrainedProtocolJson(result.protocol));
    maclab::WriteFile(dir / maclab::files::kCurves,
                      maclab::CurvesCsv(result.curves, env.num_ues));
    const double seconds = std::chrono::duration<double>(
                               std::chrono::steady_clock::now() - start)
                               .count();
    const Json manifest = {
        {"version", maclab::kVersion},
        {"config_hash", maclab::ConfigHash(c.config)},
        {"arm", maclab::ArmName(c.arm)},
        {"seed", seed},
        {"files",
         {(dir / maclab::files::kProtocol).string(),
          (dir / maclab::files::kCurves).string()}},
        {"wall_clock_seconds", seconds}};
    maclab::WriteFile(dir / maclab::files::kManifest, manifest.dump(2) + "\n");
    const auto& last = result.curves.back();
    std::printf("train arm=%s seed=%llu final_reward=%.6f dir=%s\n",
                std::string(maclab::ArmName(c.arm)).c_str(),
                static_cast<unsigned long long>(seed), last.mean_reward,
                dir.string().c_str());
  }
}

void RunExtract(const Context& c) {
  for (std::uint64_t seed : c.seeds) {
    const fs::path dir = maclab::RunDir(c.root, c.arm, seed);
    const auto neural = maclab::ParseTrainedProtocol(
        maclab::ReadFile(dir / maclab::files::kProtocol));
    const std::string provenance = std::string(maclab::ArmName(c.arm)) +
                                   "/seed_" + std::to_string(seed) + "/" +
                                   maclab::files::kProtocol;
    const maclab::Extraction x =
        maclab::ExtractSymbolic(neural, c.config.extract, seed, provenance);
    maclab::WriteFile(dir / maclab::files::kSymbolic, maclab::Serialize(x.compact));
    maclab::WriteFile(dir / maclab::files::kSymbolicFull,
                      maclab::Serialize(x.full));
    const Json graphs = {
        {"full", Json::parse(maclab::GraphJson(x.full_graph))},
        {"simplified", Json::parse(maclab::GraphJson(x.compact_graph))}};
    maclab::WriteFile(dir / maclab::files::kGraph, graphs.dump(2) + "\n");
    std::printf("extract arm=%s seed=%llu clauses=%zu vertices=%d->%d\n",
                std::string(maclab::ArmName(c.arm)).c_str(),
                static_cast<unsigned long long>(seed), x.compact.clauses.size(),
                x.full_graph.size(), x.compact_graph.size());
  }
}

void RunEval(const Context& c, const std::string& which, int episodes) {
  if (which != "symbolic" && which != "neural") {
    Fail(ErrorKind::kConfig, "--protocol must be symbolic or neural");
  }
  for (std::uint64_t seed : c.seeds) {
    const fs::path dir = maclab::RunDir(c.root, c.arm, seed);
    maclab::EvalStats stats;
    double entropy = 0.0;
    const char* entropy_kind;
    if (which == "symbolic") {
      const auto protocol = maclab::Parse(maclab::ReadFile(dir / maclab::files::kSymbolic));
      stats = maclab::EvaluateSymbolic(
          protocol, c.config.env, episodes,
          c.deterministic ? maclab::ExecMode::kDeterministic
                          : maclab::ExecMode::kStochastic,
          seed);
      entropy = maclab::ProtocolSemanticEntropy(protocol);
      entropy_kind = "semantic";
    } else {
      const auto protocol = maclab::ParseTrainedProtocol(
          maclab::ReadFile(dir / maclab::files::kProtocol));
      const auto mode = c.deterministic ? maclab::SamplingMode::kArgmax
                                        : maclab::SamplingMode::kStochastic;
      stats = maclab::EvaluateNeural(protocol, c.config.env, episodes, mode, seed);
      std::vector<maclab::Trace> traces;
      for (int e = 0; e < std::min(episodes, 100); ++e) {
        maclab::EnvConfig env = c.config.env;
        env.seed = maclab::DeriveSeed(env.seed, static_cast<std::uint64_t>(e));
        maclab::MacEnv mac(env);
        maclab::Rng rng(maclab::DeriveSeed(seed, static_cast<std::uint64_t>(e)));
        traces.push_back(maclab::RolloutEpisode(protocol, mac, rng, mode));
      }
      const auto report = maclab::EstimateEntropies(
          traces, protocol.config.codebook_size, protocol.config.entropy_pseudocount);
      entropy = maclab::RegularizerEc(report);
      entropy_kind = "l_ec";
    }
    const std::string mode = c.deterministic ? "deterministic" : "stochastic";
    char row[256];
    std::snprintf(row, sizeof(row), "%s,%s,%d,%d,%.6f,%d,%d,%s,%.6f\n",
                  which.c_str(), mode.c_str(), stats.episodes, stats.slots,
                  stats.mean_return, stats.collisions, stats.successes,
                  entropy_kind, entropy);
    const std::string csv =
        "protocol,mode,episodes,slots,mean_reward,collisions,successes,"
        "entropy_kind,entropy_bits\n" + std::string(row);
    const fs::path file = dir / ("eval_" + which + "_" + mode + ".csv");
    maclab::WriteFile(file, csv);
    std::printf("eval arm=%s seed=%llu %s", std::string(maclab::ArmName(c.arm)).c_str(),
                static_cast<unsigned long long>(seed), row);
  }
}

void RunManipulate(const std::string& in, const std::string& out,
                   const std::vector<int>& remove, const std::vector<std::string>& add,
                   bool resolve) {
  if (in.empty()) Fail(ErrorKind::kConfig, "manipulate needs --in <file.sproto>");
  maclab::SymbolicProtocol p = maclab::Parse(maclab::ReadFile(in));
  Json log = Json::array();
  // Removals refer to ids of the input protocol; apply from the highest id.
  std::vector<int> ids = remove;
  std::sort(ids.rbegin(), ids.rend());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  for (int id : ids) {
    if (id >= 0 && id < static_cast<int>(p.clauses.size())) {
      log.push_back({{"removed", maclab::ClauseText(p.clauses[id])}});
    }
    p = maclab::Edit(p, {maclab::EditCommand::Kind::kRemove, id, {}});
  }
  for (const std::string& text : add) {
    maclab::Clause clause;
    try {
      clause = maclab::ParseClause(text);
    } catch (const maclab::Error& e) {
      Fail(ErrorKind::kValidation, std::string("--add: ") + e.what());
    }
    p = maclab::Edit(p, {maclab::EditCommand::Kind::kAdd, -1, clause});
    log.push_back({{"added", maclab::ClauseText(clause)}});
  }
  if (resolve) {
    const auto before = maclab::FindConflicts(p);
    const auto res = maclab::ResolveConflicts(p);
    for (const auto& c : res.removed) log.push_back({{"removed", maclab::ClauseText(c)}});
    for (const auto& c : res.added) log.push_back({{"added", maclab::ClauseText(c)}});
    log.push_back({{"conflicts_before", before.size()},
                   {"conflicts_after", maclab::FindConflicts(res.protocol).size()}});
    p = res.protocol;
  }
  const std::string text = maclab::Serialize(p);
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    maclab::WriteFile(out, text);
  }
  std::cerr << log.dump() << "\n";
}

void RunSelect(const std::vector<std::string>& paths, const std::string& out) {
  if (paths.empty()) Fail(ErrorKind::kConfig, "select needs one or more .sproto files");
  std::vector<maclab::SymbolicProtocol> candidates;
  Json list = Json::array();
  for (const std::string& p : paths) {
    candidates.push_back(maclab::Parse(maclab::ReadFile(p)));
    list.push_back({{"path", p},
                    {"semantic_entropy",
                     maclab::ProtocolSemanticEntropy(candidates.back())},
                    {"clauses", candidates.back().clauses.size()}});
  }
  const int best = maclab::SelectBest(candidates);
  const Json record = {{"selected_index", best},
                       {"selected_path", paths[best]},
                       {"criterion", "minimum semantic entropy, ties to lowest index"},
                       {"candidates", list}};
  if (!out.empty()) maclab::WriteFile(out, record.dump(2) + "\n");
  std::cout << record.dump(2) << "\n";
}

void RunMec(const std::string& input) {
  const Json j = ParseJsonInput(ReadInput(input));
  Json result;
  if (j.contains("marginals")) {
    std::vector<maclab::Dist> marginals;
    for (const Json& m : j.at("marginals")) {
      marginals.emplace_back(NumberArray(m, "marginals"));
    }
    const auto table = maclab::MinEntropyCoupling(marginals);
    Json cells = Json::array();
    for (const auto& cell : table.cells) {
      cells.push_back({{"index", cell.index}, {"mass", cell.mass}});
    }
    result["greedy_entropy"] = table.Entropy();
    result["cells"] = cells;
    result["marginal_error"] = table.MarginalError(marginals);
    if (marginals.size() == 2 && marginals[0].size() <= 3 && marginals[1].size() <= 3) {
      result["brute_force_entropy"] =
          maclab::MecBruteForce(marginals[0], marginals[1]).Entropy();
    }
  }
  if (j.contains("samples")) {
    std::vector<std::pair<int, int>> samples;
    for (const Json& s : j.at("samples")) {
      samples.emplace_back(s.at(0).get<int>(), s.at(1).get<int>());
    }
    const auto v = maclab::InferCausalDirection(samples);
    const char* dir = v.direction == maclab::CausalDirection::kXCausesY   ? "x_causes_y"
                      : v.direction == maclab::CausalDirection::kYCausesX ? "y_causes_x"
                                                                          : "undecided";
    result["causal"] = {{"direction", dir},
                        {"forward_bits", v.forward_bits},
                        {"backward_bits", v.backward_bits}};
  }
  if (result.is_null()) {
    Fail(ErrorKind::kConfig, "mec input needs \"marginals\" and/or \"samples\"");
  }
  std::cout << result.dump(2) << "\n";
}

void RunEntropy(const std::string& input, const std::string& sproto) {
  Json result;
  if (!sproto.empty()) {
    const auto p = maclab::Parse(maclab::ReadFile(sproto));
    const auto g = maclab::ProtocolGraphOf(p);
    result["semantic_entropy"] = maclab::ProtocolSemanticEntropy(p);
    result["vertices"] = g.size();
    result["log2_n"] = std::log2(static_cast<double>(g.size()));
    result["von_neumann_entropy"] = maclab::VonNeumannEntropy(g);
  } else {
    const Json j = ParseJsonInput(ReadInput(input));
    if (j.contains("dist")) {
      result["shannon"] = maclab::ShannonEntropy(maclab::Dist(NumberArray(j.at("dist"), "dist")));
    }
    if (j.contains("contexts")) {
      result["semantic"] = maclab::SemanticEntropy(NumberArray(j.at("contexts"), "contexts"));
    }
    if (j.contains("pairs")) {
      std::vector<std::pair<int, int>> pairs;
      for (const Json& s : j.at("pairs")) {
        pairs.emplace_back(s.at(0).get<int>(), s.at(1).get<int>());
      }
      const double alpha = j.value("alpha", 0.0);
      result["conditional"] = maclab::ConditionalEntropy(pairs, alpha);
    }
    if (result.is_null()) {
      Fail(ErrorKind::kConfig, "entropy input needs \"dist\", \"contexts\" or \"pairs\"");
    }
  }
  std::cout << result.dump(2) << "\n";
}

void RunReport(const Context& c) {
  const std::string report = maclab::BuildReport(c.root, c.config);
  maclab::WriteFile(c.root / "report.json", report);
  std::cout << report;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"maclab: emergent MAC protocols, neural and symbolic"};
  app.require_subcommand(1);
  Options opts;
  auto add_common = [&opts](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "experiment config (JSON)");
    sub->add_option("--seed", opts.seed, "single run seed (default: config seeds)");
    sub->add_option("--out", opts.out, "run root directory (default: config output_dir)");
    sub->add_flag("--deterministic", opts.deterministic, "argmax execution");
    sub->add_option("--arm", opts.arm, "regularizer arm: pos, neg or off");
  };

  auto* train = app.add_subcommand("train", "train a neural protocol");
  add_common(train);
  auto* extract = app.add_subcommand("extract", "extract the symbolic protocol");
  add_common(extract);
  auto* eval = app.add_subcommand("eval", "evaluate a neural or symbolic protocol");
  add_common(eval);
  std::string which = "symbolic";
  int episodes = maclab::kEvalEpisodes;
  eval->add_option("--protocol", which, "symbolic or neural");
  eval->add_option("--episodes", episodes, "evaluation episodes");

  auto* manipulate = app.add_subcommand("manipulate", "edit a .sproto file");
  std::string in_path;
  std::string out_path;
  std::vector<int> remove;
  std::vector<std::string> add;
  bool resolve = false;
  manipulate->add_option("--in", in_path, "input .sproto");
  manipulate->add_option("--out", out_path, "output .sproto (default stdout)");
  manipulate->add_option("--remove", remove, "clause id to remove");
  manipulate->add_option("--add", add, "clause text to add");
  manipulate->add_flag("--resolve-conflicts", resolve,
                       "remove one clause of every access conflict");

  auto* select = app.add_subcommand("select", "pick the lowest-entropy protocol");
  std::vector<std::string> candidates;
  std::string select_out;
  select->add_option("protocols", candidates, ".sproto candidates");
  select->add_option("--out", select_out, "write the selection record here");

  auto* mec = app.add_subcommand("mec", "minimum entropy coupling / causal direction");
  std::string mec_input;
  mec->add_option("--input", mec_input, "JSON input file (default stdin)");

  auto* entropy = app.add_subcommand("entropy", "entropy measures");
  std::string entropy_input;
  std::string sproto;
  entropy->add_option("--input", entropy_input, "JSON input file (default stdin)");
  entropy->add_option("--sproto", sproto, "protocol file for semantic and graph entropy");

  auto* report = app.add_subcommand("report", "aggregate acceptance metrics");
  add_common(report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error=usage message=\"" << OneLine(e.what()) << "\"\n";
    return kExitConfig;
  }

  try {
    if (*train) RunTrain(Resolve(opts));
    if (*extract) RunExtract(Resolve(opts));
    if (*eval) RunEval(Resolve(opts), which, episodes);
    if (*manipulate) RunManipulate(in_path, out_path, remove, add, resolve);
    if (*select) RunSelect(candidates, select_out);
    if (*mec) RunMec(mec_input);
    if (*entropy) RunEntropy(entropy_input, sproto);
    if (*report) RunReport(Resolve(opts));
  } catch (const maclab::SyntaxError& e) {
    std::cerr << "error=syntax line=" << e.line() << " column=" << e.column()
              << " message=\"" << OneLine(e.what()) << "\"\n";
    return kExitInvariant;
  } catch (const maclab::Error& e) {
    std::cerr << "error=" << maclab::ErrorKindName(e.kind()) << " message=\""
              << OneLine(e.what()) << "\"\n";
    return ExitCodeFor(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error=internal message=\"" << OneLine(e.what()) << "\"\n";
    return kExitInvariant;
  }
  return 0;
}
