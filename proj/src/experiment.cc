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

#include "maclab/experiment.h"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "maclab/error.h"
#include "maclab/graph_entropy.h"
#include "maclab/random.h"

namespace maclab {
namespace {

using Json = nlohmann::json;
namespace fs = std::filesystem;

[[noreturn]] void ConfigError(const std::string& where, const std::string& why) {
  Fail(ErrorKind::kConfig, where + ": " + why);
}

void CheckKeys(const Json& obj, const std::string& section,
               std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) ConfigError(section, "must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; })) {
      ConfigError(section.empty() ? key : section + "." + key, "unknown key");
    }
  }
}

template <typename T>
void Read(const Json& obj, const std::string& section, const char* key,
          T& out) {
  if (!obj.contains(key)) return;
  const Json& v = obj.at(key);
  const std::string where = section.empty() ? key : section + "." + key;
  if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) ConfigError(where, "expected a string");
    out = v.get<std::string>();
  } else if constexpr (std::is_same_v<T, std::uint64_t>) {
    if (!v.is_number_unsigned()) ConfigError(where, "expected an unsigned integer");
    out = v.get<std::uint64_t>();
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) ConfigError(where, "expected an integer");
    const auto wide = v.get<std::int64_t>();
    if (wide < std::numeric_limits<T>::min() ||
        wide > std::numeric_limits<T>::max()) {
      ConfigError(where, "integer out of range");
    }
    out = static_cast<T>(wide);
  } else {
    if (!v.is_number()) ConfigError(where, "expected a number");
    out = v.get<double>();
  }
}

Json EnvJson(const EnvConfig& e) {
  return {{"num_ues", e.num_ues},         {"buffer_cap", e.buffer_cap},
          {"arrival_prob", e.arrival_prob}, {"reward_rho", e.reward_rho},
          {"episode_len", e.episode_len},   {"seed", e.seed}};
}

Json TrainJson(const TrainConfig& t) {
  return {{"codebook_size", t.codebook_size},
          {"episodes", t.episodes},
          {"lr", t.lr},
          {"reg_weight", t.reg_weight},
          {"reg_sign", t.reg_sign},
          {"ib_beta", t.ib_beta},
          {"entropy_pseudocount", t.entropy_pseudocount},
          {"eval_window", t.eval_window},
          {"seed", t.seed},
          {"hidden_width", t.hidden_width},
          {"latent_dim", t.latent_dim},
          {"discount", t.discount}};
}

EnvConfig EnvFromJson(const Json& j, const std::string& s) {
  CheckKeys(j, s, {"num_ues", "buffer_cap", "arrival_prob", "reward_rho",
                   "episode_len", "seed"});
  EnvConfig e;
  Read(j, s, "num_ues", e.num_ues);
  Read(j, s, "buffer_cap", e.buffer_cap);
  Read(j, s, "arrival_prob", e.arrival_prob);
  Read(j, s, "reward_rho", e.reward_rho);
  Read(j, s, "episode_len", e.episode_len);
  Read(j, s, "seed", e.seed);
  return e;
}

TrainConfig TrainFromJson(const Json& j, const std::string& s) {
  CheckKeys(j, s, {"codebook_size", "episodes", "lr", "reg_weight", "reg_sign",
                   "ib_beta", "entropy_pseudocount", "eval_window", "seed",
                   "hidden_width", "latent_dim", "discount"});
  TrainConfig t;
  Read(j, s, "codebook_size", t.codebook_size);
  Read(j, s, "episodes", t.episodes);
  Read(j, s, "lr", t.lr);
  Read(j, s, "reg_weight", t.reg_weight);
  Read(j, s, "reg_sign", t.reg_sign);
  Read(j, s, "ib_beta", t.ib_beta);
  Read(j, s, "entropy_pseudocount", t.entropy_pseudocount);
  Read(j, s, "eval_window", t.eval_window);
  Read(j, s, "seed", t.seed);
  Read(j, s, "hidden_width", t.hidden_width);
  Read(j, s, "latent_dim", t.latent_dim);
  Read(j, s, "discount", t.discount);
  return t;
}

Json NetJson(const Mlp& net) {
  Json layers = Json::array();
  for (const DenseLayer& l : net.layers()) {
    layers.push_back({{"in", l.in},
                      {"out", l.out},
                      {"weights", l.weights},
                      {"biases", l.biases}});
  }
  return {{"layers", layers}};
}

Mlp NetFromJson(const Json& j) {
  std::vector<DenseLayer> layers;
  for (const Json& l : j.at("layers")) {
    DenseLayer d;
    d.in = l.at("in").get<int>();
    d.out = l.at("out").get<int>();
    d.weights = l.at("weights").get<std::vector<double>>();
    d.biases = l.at("biases").get<std::vector<double>>();
    layers.push_back(std::move(d));
  }
  return Mlp::FromLayers(std::move(layers));
}

Json GraphSummary(const ProtocolGraph& g) {
  const double log2n = std::log2(static_cast<double>(g.size()));
  Json out = {{"n", g.size()}, {"log2_n", log2n}};
  if (g.EdgeCount() == 0) {
    out["H_v"] = nullptr;
    out["within_bound"] = nullptr;
  } else {
    const double h = VonNeumannEntropy(g);
    out["H_v"] = h;
    out["within_bound"] = h <= log2n + 1e-12;
  }
  return out;
}

Json OptionalNumber(const std::optional<double>& v) {
  return v ? Json(*v) : Json(nullptr);
}

std::optional<double> Mean(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::vector<std::uint64_t> SeedsUnder(const fs::path& arm_dir) {
  std::vector<std::uint64_t> seeds;
  if (!fs::is_directory(arm_dir)) return seeds;
  for (const auto& entry : fs::directory_iterator(arm_dir)) {
    const std::string name = entry.path().filename().string();
    if (!entry.is_directory() || name.rfind("seed_", 0) != 0) continue;
    try {
      seeds.push_back(std::stoull(name.substr(5)));
    } catch (const std::exception&) {
    }
  }
  std::sort(seeds.begin(), seeds.end());
  return seeds;
}

}  // namespace

void ExtractConfig::Validate() const {
  if (rollouts < 1) Fail(ErrorKind::kConfig, "extract.rollouts: must be >= 1");
  if (!(tv_threshold >= 0.0 && tv_threshold < 1.0)) {
    Fail(ErrorKind::kConfig, "extract.tv_threshold: must lie in [0, 1)");
  }
  if (!(active_epsilon > 0.0 && active_epsilon < 1.0)) {
    Fail(ErrorKind::kConfig, "extract.active_epsilon: must lie in (0, 1)");
  }
}

void ExperimentConfig::Validate() const {
  env.Validate();
  train.Validate();
  extract.Validate();
  if (seeds.empty()) Fail(ErrorKind::kConfig, "seeds: must be nonempty");
  if (output_dir.empty()) Fail(ErrorKind::kConfig, "output_dir: must be nonempty");
}

ExperimentConfig ParseExperimentConfig(std::string_view json_text) {
  Json root;
  try {
    root = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    Fail(ErrorKind::kConfig, std::string("config is not valid JSON: ") + e.what());
  }
  CheckKeys(root, "", {"env", "train", "extract", "output_dir", "seeds"});
  ExperimentConfig c;
  if (root.contains("env")) c.env = EnvFromJson(root.at("env"), "env");
  if (root.contains("train")) c.train = TrainFromJson(root.at("train"), "train");
  if (root.contains("extract")) {
    const Json& x = root.at("extract");
    CheckKeys(x, "extract", {"rollouts", "tv_threshold", "active_epsilon"});
    Read(x, "extract", "rollouts", c.extract.rollouts);
    Read(x, "extract", "tv_threshold", c.extract.tv_threshold);
    Read(x, "extract", "active_epsilon", c.extract.active_epsilon);
  }
  Read(root, "", "output_dir", c.output_dir);
  if (root.contains("seeds")) {
    const Json& s = root.at("seeds");
    if (!s.is_array()) ConfigError("seeds", "expected an array");
    c.seeds.clear();
    for (const Json& v : s) {
      if (!v.is_number_unsigned()) {
        ConfigError("seeds", "entries must be unsigned integers");
      }
      c.seeds.push_back(v.get<std::uint64_t>());
    }
  }
  c.Validate();
  return c;
}

ExperimentConfig LoadExperimentConfig(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kConfig, "cannot read config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return ParseExperimentConfig(buf.str());
}

std::string ExperimentConfigJson(const ExperimentConfig& c) {
  Json j = {{"env", EnvJson(c.env)},
            {"train", TrainJson(c.train)},
            {"extract",
             {{"rollouts", c.extract.rollouts},
              {"tv_threshold", c.extract.tv_threshold},
              {"active_epsilon", c.extract.active_epsilon}}},
            {"output_dir", c.output_dir},
            {"seeds", c.seeds}};
  return j.dump(2) + "\n";
}

std::string ConfigHash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : ExperimentConfigJson(config)) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

std::string_view ArmName(Arm arm) {
  switch (arm) {
    case Arm::kPos:
      return "pos";
    case Arm::kNeg:
      return "neg";
    case Arm::kOff:
      return "off";
  }
  return "?";
}

std::optional<Arm> ArmFromName(std::string_view name) {
  for (Arm a : kAllArms) {
    if (ArmName(a) == name) return a;
  }
  return std::nullopt;
}

int ArmSign(Arm arm) {
  return arm == Arm::kPos ? 1 : arm == Arm::kNeg ? -1 : 0;
}

std::pair<EnvConfig, TrainConfig> RunConfigs(const ExperimentConfig& config,
                                             Arm arm, std::uint64_t seed) {
  EnvConfig env = config.env;
  TrainConfig train = config.train;
  env.seed = seed;
  train.seed = seed;
  train.reg_sign = ArmSign(arm);
  return {env, train};
}

std::string TrainedProtocolJson(const TrainedProtocol& p) {
  Json lower = Json::array();
  Json upper = Json::array();
  for (const Mlp& net : p.lower_nets) lower.push_back(NetJson(net));
  for (const Mlp& net : p.upper_nets) upper.push_back(NetJson(net));
  Json j = {{"format", "maclab.trained_protocol"},
            {"version", 1},
            {"env", EnvJson(p.env)},
            {"train", TrainJson(p.config)},
            {"lower_nets", lower},
            {"upper_nets", upper},
            {"bs_net", NetJson(p.bs_net)},
            {"critic", NetJson(p.critic)}};
  return j.dump() + "\n";
}

TrainedProtocol ParseTrainedProtocol(std::string_view json_text) {
  TrainedProtocol p;
  try {
    const Json j = Json::parse(json_text);
    if (j.at("format") != "maclab.trained_protocol" || j.at("version") != 1) {
      Fail(ErrorKind::kValidation, "not a maclab trained protocol (version 1)");
    }
    p.env = EnvFromJson(j.at("env"), "env");
    p.config = TrainFromJson(j.at("train"), "train");
    for (const Json& n : j.at("lower_nets")) p.lower_nets.push_back(NetFromJson(n));
    for (const Json& n : j.at("upper_nets")) p.upper_nets.push_back(NetFromJson(n));
    p.bs_net = NetFromJson(j.at("bs_net"));
    p.critic = NetFromJson(j.at("critic"));
  } catch (const Json::exception& e) {
    Fail(ErrorKind::kValidation, std::string("trained protocol file: ") + e.what());
  }
  p.Validate();
  return p;
}

Extraction ExtractSymbolic(const TrainedProtocol& protocol,
                           const ExtractConfig& config, std::uint64_t seed,
                           const std::string& provenance) {
  config.Validate();
  const OperationTable table = ExtractTable(protocol, config.rollouts, seed);
  Extraction out;
  const ClusterMap identity = ClusterMap::Identity(
      table.num_agents, table.codebook_size);
  ExtractedProtocol full =
      BuildProtocol(AssignContext(table), identity, provenance);
  const SimplifyResult simple = Simplify(table, config.tv_threshold);
  ExtractedProtocol compact =
      BuildProtocol(AssignContext(simple.table), simple.clusters, provenance);
  out.full = std::move(full.protocol);
  out.full_graph = std::move(full.graph);
  out.compact = std::move(compact.protocol);
  out.compact_graph = std::move(compact.graph);
  out.clusters = simple.clusters;
  return out;
}

std::string GraphJson(const ProtocolGraph& graph) {
  Json j = GraphSummary(graph);
  j["labels"] = graph.labels();
  Json rows = Json::array();
  for (int i = 0; i < graph.size(); ++i) {
    std::vector<double> row;
    for (int k = 0; k < graph.size(); ++k) row.push_back(graph.weight(i, k));
    rows.push_back(row);
  }
  j["adjacency"] = rows;
  return j.dump(2) + "\n";
}

fs::path RunDir(const fs::path& root, Arm arm, std::uint64_t seed) {
  return root / std::string(ArmName(arm)) / ("seed_" + std::to_string(seed));
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    Fail(ErrorKind::kMissingArtifact, "missing artifact: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteFile(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) Fail(ErrorKind::kValidation, "cannot write " + path.string());
}

std::vector<CurveRow> ParseCurves(std::string_view csv, int num_ues) {
  std::istringstream in{std::string(csv)};
  std::string line;
  if (!std::getline(in, line)) {
    Fail(ErrorKind::kValidation, "curves: empty file");
  }
  std::vector<CurveRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream fields(line);
    for (std::string cell; std::getline(fields, cell, ',');) cells.push_back(cell);
    const std::size_t expected = 3 + 4 * static_cast<std::size_t>(num_ues) + 3;
    if (cells.size() != expected) {
      Fail(ErrorKind::kValidation, "curves: row has " +
                                       std::to_string(cells.size()) +
                                       " fields, expected " +
                                       std::to_string(expected));
    }
    CurveRow r;
    std::size_t c = 0;
    r.window = std::stoi(cells[c++]);
    r.episode_end = std::stoi(cells[c++]);
    r.mean_reward = std::stod(cells[c++]);
    for (int j = 0; j < num_ues; ++j) r.h_up.push_back(std::stod(cells[c++]));
    for (int j = 0; j < num_ues; ++j) r.h_u.push_back(std::stod(cells[c++]));
    for (int j = 0; j < num_ues; ++j) r.active_up.push_back(std::stoi(cells[c++]));
    for (int j = 0; j < num_ues; ++j) r.active_dn.push_back(std::stoi(cells[c++]));
    r.l_ec = std::stod(cells[c++]);
    r.i_zs = std::stod(cells[c++]);
    r.objective = std::stod(cells[c++]);
    rows.push_back(std::move(r));
  }
  return rows;
}

CurveRow ParseFinalCurveRow(std::string_view csv, int num_ues) {
  auto rows = ParseCurves(csv, num_ues);
  if (rows.empty()) Fail(ErrorKind::kValidation, "curves: no data rows");
  return rows.back();
}

double BaselineRange(const std::vector<std::vector<double>>& curves) {
  Require(!curves.empty(), "baseline_range: no curves");
  std::size_t len = curves.front().size();
  for (const auto& c : curves) len = std::min(len, c.size());
  Require(len > 0, "baseline_range: empty curve");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t w = 0; w < len; ++w) {
    double m = 0.0;
    for (const auto& c : curves) m += c[w];
    m /= static_cast<double>(curves.size());
    lo = std::min(lo, m);
    hi = std::max(hi, m);
  }
  return hi - lo;
}

BoostVerdict CausalityBoost(double pos, std::optional<double> off, double neg,
                            std::optional<double> baseline_range) {
  BoostVerdict v;
  v.ordering = off ? (pos > *off && *off > neg) : pos > neg;
  v.margin = pos - neg;
  if (baseline_range) v.required = 0.1 * *baseline_range;
  v.pass = v.ordering && (!v.required || v.margin >= *v.required);
  return v;
}

double InequalityMargin(const CurveRow& row) {
  const int n = static_cast<int>(row.h_up.size());
  Require(n >= 1 && row.h_u.size() == row.h_up.size(),
          "inequality_margin: incomplete row");
  double worst = std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j) {
    // The uplink of UE j is paired with the action entropy of the UE whose
    // partner it is.
    const int other = (j + n - 1) % n;
    worst = std::min(worst, row.h_up[j] - row.h_u[other]);
  }
  return worst;
}

double RandomSelectionReward(std::span<const double> rewards, int draws,
                             std::uint64_t seed) {
  Require(!rewards.empty() && draws >= 1, "random_selection: nothing to draw");
  Rng rng(seed);
  const std::vector<double> uniform(rewards.size(), 1.0);
  double total = 0.0;
  for (int d = 0; d < draws; ++d) total += rewards[SampleIndex(uniform, rng)];
  return total / draws;
}

double Median(std::vector<double> values) {
  Require(!values.empty(), "median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

std::string BuildReport(const fs::path& root, const ExperimentConfig& config) {
  const int n = config.env.num_ues;
  Json report;
  report["version"] = kVersion;
  report["config_hash"] = ConfigHash(config);
  Json missing = Json::array();

  struct SeedData {
    std::uint64_t seed;
    std::optional<CurveRow> last;
    std::vector<double> reward_curve;
  };
  std::map<Arm, std::vector<SeedData>> arms;
  bool any_run = false;
  for (Arm arm : kAllArms) {
    for (std::uint64_t seed : SeedsUnder(root / std::string(ArmName(arm)))) {
      any_run = true;
      SeedData d{seed, std::nullopt, {}};
      const fs::path curves = RunDir(root, arm, seed) / files::kCurves;
      if (fs::exists(curves)) {
        const auto rows = ParseCurves(ReadFile(curves), n);
        if (!rows.empty()) d.last = rows.back();
        for (const auto& r : rows) d.reward_curve.push_back(r.mean_reward);
      } else {
        missing.push_back(curves.string());
      }
      arms[arm].push_back(std::move(d));
    }
  }
  if (!any_run) {
    std::string expected;
    for (Arm arm : kAllArms) {
      for (const char* f : {files::kProtocol, files::kCurves}) {
        expected += " " + (root / std::string(ArmName(arm)) / "seed_<n>" / f).string();
      }
    }
    Fail(ErrorKind::kMissingArtifact,
         "no run directories under " + root.string() + "; expected" + expected);
  }

  std::map<Arm, std::optional<double>> arm_mean;
  Json arms_json = Json::object();
  for (Arm arm : kAllArms) {
    std::vector<double> finals;
    Json seeds = Json::array();
    for (const auto& d : arms[arm]) {
      seeds.push_back(d.seed);
      if (d.last) finals.push_back(d.last->mean_reward);
    }
    arm_mean[arm] = Mean(finals);
    arms_json[std::string(ArmName(arm))] = {
        {"seeds", seeds},
        {"final_rewards", finals},
        {"mean_final_reward", OptionalNumber(arm_mean[arm])}};
  }
  report["arms"] = arms_json;

  {
    Json boost = {{"status", nullptr}};
    std::optional<double> range;
    std::vector<std::vector<double>> off_curves;
    for (const auto& d : arms[Arm::kOff]) {
      if (!d.reward_curve.empty()) off_curves.push_back(d.reward_curve);
    }
    if (!off_curves.empty()) range = BaselineRange(off_curves);
    boost["baseline_range"] = OptionalNumber(range);
    if (arm_mean[Arm::kPos] && arm_mean[Arm::kNeg]) {
      const BoostVerdict v = CausalityBoost(*arm_mean[Arm::kPos],
                                            arm_mean[Arm::kOff],
                                            *arm_mean[Arm::kNeg], range);
      boost["ordering"] = v.ordering;
      boost["margin"] = v.margin;
      boost["required_margin"] = OptionalNumber(v.required);
      boost["status"] = v.pass ? "pass" : "fail";
    }
    report["causality_boost"] = boost;
  }

  {
    Json per_seed = Json::array();
    Json active = Json::array();
    int within = 0;
    int sparse = 0;
    int counted = 0;
    for (const auto& d : arms[Arm::kPos]) {
      if (!d.last) continue;
      ++counted;
      const double m = InequalityMargin(*d.last);
      within += m >= -0.1;
      per_seed.push_back({{"seed", d.seed}, {"margin", m}});
      bool all_below = true;
      for (int j = 0; j < n; ++j) {
        all_below = all_below && d.last->active_up[j] < config.train.codebook_size &&
                    d.last->active_dn[j] < config.train.codebook_size;
      }
      sparse += all_below;
      active.push_back({{"seed", d.seed},
                        {"uplink", d.last->active_up},
                        {"downlink", d.last->active_dn}});
    }
    const int needed = (4 * counted + 4) / 5;  // 4 of 5, scaled
    report["entropy_inequality"] = {
        {"arm", "pos"}, {"per_seed", per_seed}, {"seeds_within_0_1_bit", within},
        {"seeds", counted},
        {"status", counted ? Json(within >= needed ? "pass" : "fail") : Json(nullptr)}};
    report["active_codewords"] = {
        {"arm", "pos"}, {"epsilon", config.extract.active_epsilon},
        {"per_seed", active}, {"seeds_below_codebook", sparse},
        {"seeds", counted},
        {"status", counted ? Json(sparse >= needed ? "pass" : "fail") : Json(nullptr)}};
  }

  // Symbolic artifacts of the pos arm.
  Json fidelity = Json::array();
  Json graphs = Json::array();
  Json candidates = Json::array();
  std::vector<SymbolicProtocol> compact;
  std::vector<double> rewards;
  Json cost_per_seed = Json::array();
  std::vector<double> compute_ratios;
  std::vector<double> memory_ratios;
  int violations = 0;
  for (Arm arm : kAllArms) {
    for (const auto& d : arms[arm]) {
      const fs::path dir = RunDir(root, arm, d.seed);
      const fs::path pj = dir / files::kProtocol;
      const fs::path sp = dir / files::kSymbolic;
      const fs::path fp = dir / files::kSymbolicFull;
      bool complete = true;
      for (const fs::path& p : {pj, sp, fp}) {
        if (!fs::exists(p)) {
          missing.push_back(p.string());
          complete = false;
        }
      }
      if (!complete) continue;
      const SymbolicProtocol small = Parse(ReadFile(sp));
      const SymbolicProtocol large = Parse(ReadFile(fp));
      const Json g_full = GraphSummary(ProtocolGraphOf(large));
      const Json g_small = GraphSummary(ProtocolGraphOf(small));
      for (const Json* g : {&g_full, &g_small}) {
        if ((*g)["within_bound"].is_boolean() && !(*g)["within_bound"].get<bool>()) {
          ++violations;
        }
      }
      graphs.push_back({{"arm", ArmName(arm)}, {"seed", d.seed},
                        {"full", g_full}, {"simplified", g_small}});
      if (arm != Arm::kPos) continue;

      const TrainedProtocol neural = ParseTrainedProtocol(ReadFile(pj));
      EnvConfig eval_env = config.env;
      const Fidelity f =
          NeuralSymbolicFidelity(neural, small, eval_env, kFidelitySlots, d.seed);
      fidelity.push_back({{"seed", d.seed}, {"rate", f.rate}, {"steps", f.steps}});
      const CostReport c = MakeCostReport(neural, small);
      cost_per_seed.push_back({{"seed", d.seed},
                               {"neural_flops_per_step", c.neural_flops},
                               {"symbolic_comparisons_per_step", c.symbolic_comparisons},
                               {"compute_ratio", c.compute_ratio},
                               {"neural_bytes", c.neural_bytes},
                               {"symbolic_bytes", c.symbolic_bytes},
                               {"memory_ratio", c.memory_ratio}});
      compute_ratios.push_back(c.compute_ratio);
      memory_ratios.push_back(c.memory_ratio);
      const EvalStats e = EvaluateSymbolic(small, eval_env, kEvalEpisodes,
                                           ExecMode::kDeterministic, d.seed);
      rewards.push_back(e.mean_return);
      candidates.push_back({{"seed", d.seed},
                            {"semantic_entropy", ProtocolSemanticEntropy(small)},
                            {"eval_reward", e.mean_return}});
      compact.push_back(small);
    }
  }
  bool fid_pass = !fidelity.empty();
  for (const Json& f : fidelity) fid_pass = fid_pass && f["rate"].get<double>() >= 0.95;
  report["fidelity"] = {
      {"slots", kFidelitySlots}, {"per_seed", fidelity},
      {"status", fidelity.empty() ? Json(nullptr) : Json(fid_pass ? "pass" : "fail")}};
  if (cost_per_seed.empty()) {
    report["cost"] = nullptr;
  } else {
    const double compute = Median(compute_ratios);
    const double memory = Median(memory_ratios);
    report["cost"] = {{"per_seed", cost_per_seed},
                      {"median_compute_ratio", compute},
                      {"median_memory_ratio", memory},
                      {"status", compute >= 100.0 && memory <= 0.01 ? "pass" : "fail"}};
  }
  report["graph_entropy"] = {
      {"protocols", graphs},
      {"reference_log2", {{"n22", std::log2(22.0)}, {"n13", std::log2(13.0)}}},
      {"bound_violations", violations},
      {"status", graphs.empty() ? Json(nullptr)
                                : Json(violations == 0 ? "pass" : "fail")}};
  if (compact.empty()) {
    report["selection"] = nullptr;
  } else {
    const int best = SelectBest(compact);
    const double random =
        RandomSelectionReward(rewards, kRandomSelectionDraws, config.env.seed);
    report["selection"] = {
        {"candidates", candidates},
        {"selected_index", best},
        {"selected_reward", rewards[best]},
        {"random_expected_reward", random},
        {"random_draws", kRandomSelectionDraws},
        {"status", rewards[best] >= random ? "pass" : "fail"}};
  }
  report["missing"] = missing;
  return report.dump(2) + "\n";
}

}  // namespace maclab
