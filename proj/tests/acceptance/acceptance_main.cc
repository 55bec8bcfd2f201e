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

// Acceptance suite: trains every arm, extracts the symbolic protocols and
// prints one verdict per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "maclab/coupling.h"
#include "maclab/experiment.h"
#include "maclab/graph_entropy.h"
#include "maclab/information.h"
#include "maclab/mlp.h"
#include "maclab/protocol_learn.h"
#include "maclab/symbolic_extract.h"
#include "maclab/symbolic_protocol.h"
#include "maclab/symbolic_runtime.h"

namespace {

using namespace maclab;
namespace fs = std::filesystem;

constexpr int kSeeds = 5;
constexpr int kSelectionSeeds = 10;
constexpr double kRuntimeBudgetSeconds = 300.0;
constexpr int kCollisionEpisodes = 500;  // 500 x 20 slots
constexpr int kFiringSteps = 10000;

struct Run {
  Arm arm;
  std::uint64_t seed;
  TrainResult trained;
  Extraction extraction;
};

struct Verdict {
  int id;
  std::string name;
  bool pass;
  std::string detail;
};

std::string Fmt(const char* format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, value);
  return buf;
}

Run TrainAndExtract(const ExperimentConfig& config, Arm arm, std::uint64_t seed,
                    const fs::path& root) {
  const auto [env, train] = RunConfigs(config, arm, seed);
  Run run{arm, seed, Train(env, train), {}};
  const std::string provenance = std::string(ArmName(arm)) + "/seed_" +
                                 std::to_string(seed) + "/" + files::kProtocol;
  run.extraction =
      ExtractSymbolic(run.trained.protocol, config.extract, seed, provenance);
  const fs::path dir = RunDir(root, arm, seed);
  WriteFile(dir / files::kProtocol, TrainedProtocolJson(run.trained.protocol));
  WriteFile(dir / files::kCurves, CurvesCsv(run.trained.curves, env.num_ues));
  WriteFile(dir / files::kSymbolic, Serialize(run.extraction.compact));
  WriteFile(dir / files::kSymbolicFull, Serialize(run.extraction.full));
  return run;
}

Verdict CausalityBoostCheck(const std::map<Arm, std::vector<const Run*>>& arms,
                            double seconds) {
  std::map<Arm, double> mean;
  for (const auto& [arm, runs] : arms) {
    double s = 0.0;
    for (const Run* r : runs) s += r->trained.curves.back().mean_reward;
    mean[arm] = s / runs.size();
  }
  std::vector<std::vector<double>> off_curves;
  for (const Run* r : arms.at(Arm::kOff)) {
    std::vector<double> curve;
    for (const CurveRow& row : r->trained.curves) curve.push_back(row.mean_reward);
    off_curves.push_back(curve);
  }
  const double range = BaselineRange(off_curves);
  const BoostVerdict v =
      CausalityBoost(mean[Arm::kPos], mean[Arm::kOff], mean[Arm::kNeg], range);
  const bool fast = seconds < kRuntimeBudgetSeconds;
  std::string d = "pos=" + Fmt("%.3f", mean[Arm::kPos]) +
                  " off=" + Fmt("%.3f", mean[Arm::kOff]) +
                  " neg=" + Fmt("%.3f", mean[Arm::kNeg]) +
                  " ordering=" + (v.ordering ? "yes" : "no") +
                  " margin=" + Fmt("%.3f", v.margin) +
                  " required=" + Fmt("%.3f", *v.required) +
                  " (10% of baseline range " + Fmt("%.3f", range) + ")" +
                  " train_time=" + Fmt("%.0f", seconds) + "s";
  return {1, "causality boost", v.pass && fast, d};
}

Verdict InequalityCheck(const std::vector<const Run*>& pos) {
  int ok = 0;
  std::string d = "margins:";
  for (const Run* r : pos) {
    const double m = InequalityMargin(r->trained.curves.back());
    ok += m >= -0.1;
    d += " " + Fmt("%.3f", m);
  }
  d += " within 0.1 bit in " + std::to_string(ok) + "/" + std::to_string(pos.size());
  return {2, "entropic inequality", ok >= 4, d};
}

Verdict SparsityCheck(const std::vector<const Run*>& pos, int codebook) {
  int ok = 0;
  std::string d = "active up/dn per seed:";
  for (const Run* r : pos) {
    const CurveRow& row = r->trained.curves.back();
    bool below = true;
    d += " [";
    for (std::size_t j = 0; j < row.active_up.size(); ++j) {
      below = below && row.active_up[j] < codebook && row.active_dn[j] < codebook;
      d += (j ? " " : "") + std::to_string(row.active_up[j]) + "/" +
           std::to_string(row.active_dn[j]);
    }
    d += "]";
    ok += below;
  }
  d += " below " + std::to_string(codebook) + " in " + std::to_string(ok) + "/" +
       std::to_string(pos.size());
  return {3, "codeword sparsification", ok >= 4, d};
}

Verdict CouplingCheck() {
  Rng rng(20240601);
  int within = 0;
  double worst_gap = -1e9;
  double worst_marginal = 0.0;
  constexpr int kPairs = 100;
  for (int t = 0; t < kPairs; ++t) {
    std::vector<Dist> m;
    for (int k = 0; k < 2; ++k) {
      std::vector<double> w(1 + rng() % 3);
      for (double& v : w) v = Uniform01(rng) + 1e-3;
      m.push_back(Dist::FromCounts(w));
    }
    const CouplingTable greedy = MinEntropyCoupling(m);
    const CouplingTable exact = MecBruteForce(m[0], m[1]);
    const double gap = greedy.Entropy() - exact.Entropy();
    worst_gap = std::max(worst_gap, gap);
    worst_marginal = std::max({worst_marginal, greedy.MarginalError(m),
                               exact.MarginalError(m)});
    within += gap <= 1.0;
  }
  const bool pass = within == kPairs && worst_marginal <= 1e-6;
  return {4, "minimum entropy coupling", pass,
          std::to_string(within) + "/100 within 1 bit, worst gap " +
              Fmt("%.4f", worst_gap) + " bit, worst marginal error " +
              Fmt("%.2e", worst_marginal)};
}

Verdict GraphBoundCheck(const std::vector<Run>& runs) {
  int graphs = 0;
  int violations = 0;
  std::set<int> full_sizes;
  std::set<int> compact_sizes;
  for (const Run& r : runs) {
    for (const ProtocolGraph* g : {&r.extraction.full_graph, &r.extraction.compact_graph}) {
      ++graphs;
      if (VonNeumannEntropy(*g) > std::log2(static_cast<double>(g->size())) + 1e-12) {
        ++violations;
      }
    }
    full_sizes.insert(r.extraction.full_graph.size());
    compact_sizes.insert(r.extraction.compact_graph.size());
  }
  const double l22 = std::log2(22.0);
  const double l13 = std::log2(13.0);
  const bool refs = std::abs(l22 - 4.46) <= 0.005 && std::abs(l13 - 3.70) <= 0.005;
  std::string sizes = "full n in {";
  for (int n : full_sizes) sizes += " " + std::to_string(n);
  sizes += " }, simplified n in {";
  for (int n : compact_sizes) sizes += " " + std::to_string(n);
  sizes += " }";
  return {5, "graph entropy bound", violations == 0 && refs,
          std::to_string(graphs - violations) + "/" + std::to_string(graphs) +
              " graphs within log2(n); log2(22)=" + Fmt("%.4f", l22) +
              " log2(13)=" + Fmt("%.4f", l13) + "; " + sizes};
}

Verdict FidelityCheck(const std::vector<const Run*>& pos, const EnvConfig& env) {
  bool pass = true;
  std::string d = "agreement over " + std::to_string(kFidelitySlots) + " slots:";
  for (const Run* r : pos) {
    const Fidelity f = NeuralSymbolicFidelity(r->trained.protocol, r->extraction.compact,
                                              env, kFidelitySlots, r->seed);
    pass = pass && f.rate >= 0.95;
    d += " " + Fmt("%.3f", f.rate);
  }
  return {6, "neural-symbolic fidelity", pass, d};
}

Verdict CostCheck(const std::vector<const Run*>& pos) {
  std::vector<double> compute;
  std::vector<double> memory;
  std::string d = "per seed compute/memory:";
  for (const Run* r : pos) {
    const CostReport c = MakeCostReport(r->trained.protocol, r->extraction.compact);
    compute.push_back(c.compute_ratio);
    memory.push_back(c.memory_ratio);
    d += " " + Fmt("%.0fx", c.compute_ratio) + "/" + Fmt("%.2f%%", 100 * c.memory_ratio);
  }
  const double mc = Median(compute);
  const double mm = Median(memory);
  d = "median compute " + Fmt("%.0fx", mc) + " memory " + Fmt("%.3f%%", 100 * mm) +
      "; " + d;
  return {7, "cost ratios", mc >= 100.0 && mm <= 0.01, d};
}

Verdict CollisionCheck(const std::vector<Run>& runs, const EnvConfig& env) {
  // A hand-written contention protocol guarantees the edit path is exercised.
  std::vector<std::pair<std::string, SymbolicProtocol>> cases = {
      {"contention", Parse("1::action(ue1,access) :- state(ue1,1).\n"
                           "1::action(ue1,access) :- state(ue1,2).\n"
                           "1::action(ue1,silence) :- state(ue1,0).\n"
                           "1::action(ue2,access) :- state(ue2,1).\n"
                           "1::action(ue2,access) :- state(ue2,2).\n"
                           "1::action(ue2,silence) :- state(ue2,0).\n")}};
  for (const Run& r : runs) {
    if (r.seed <= kSeeds) {
      cases.push_back({std::string(ArmName(r.arm)) + std::to_string(r.seed),
                       r.extraction.compact});
    }
  }
  bool pass = true;
  int with_conflicts = 0;
  int collisions_before = 0;
  int slots = 0;
  for (const auto& [name, p] : cases) {
    const auto conflicts = FindConflicts(p);
    with_conflicts += !conflicts.empty();
    collisions_before +=
        EvaluateSymbolic(p, env, kCollisionEpisodes, ExecMode::kStochastic, 1).collisions;
    const ConflictResolution res = ResolveConflicts(p);
    const EvalStats after = EvaluateSymbolic(res.protocol, env, kCollisionEpisodes,
                                             ExecMode::kStochastic, 1);
    slots = after.slots;
    pass = pass && FindConflicts(res.protocol).empty() && after.collisions == 0;
  }
  return {8, "collision removal", pass,
          std::to_string(cases.size()) + " protocols (" + std::to_string(with_conflicts) +
              " with conflicts, " + std::to_string(collisions_before) +
              " collisions before edits), 0 collisions required over " +
              std::to_string(slots) + " slots each"};
}

Verdict SelectionCheck(const std::vector<const Run*>& pos, const EnvConfig& env) {
  std::vector<SymbolicProtocol> candidates;
  std::vector<double> rewards;
  for (const Run* r : pos) {
    candidates.push_back(r->extraction.compact);
    rewards.push_back(EvaluateSymbolic(r->extraction.compact, env, kEvalEpisodes,
                                       ExecMode::kDeterministic, r->seed)
                          .mean_return);
  }
  const int best = SelectBest(candidates);
  const double random = RandomSelectionReward(rewards, kRandomSelectionDraws, env.seed);
  const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / rewards.size();
  return {9, "entropy-based selection", rewards[best] >= random,
          "selected seed " + std::to_string(pos[best]->seed) + " reward " +
              Fmt("%.3f", rewards[best]) + " vs random selection " +
              Fmt("%.3f", random) + " (candidate mean " + Fmt("%.3f", mean) + ", " +
              std::to_string(pos.size()) + " protocols)"};
}

double RelErr(double a, double b) {
  return std::abs(a - b) / std::max(1e-6, std::abs(a) + std::abs(b));
}

double WorstGradientError() {
  constexpr double kStep = 1e-5;
  Rng rng(31337);
  double worst = 0.0;
  auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
  };
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<int> dims;
    const int depth = 2 + static_cast<int>(rng() % 3);
    for (int d = 0; d < depth; ++d) dims.push_back(1 + static_cast<int>(rng() % 8));
    const Mlp net = Mlp::Random(dims, rng);
    std::vector<double> x(dims.front()), up(dims.back());
    for (double& v : x) v = 2 * Uniform01(rng) - 1;
    for (double& v : up) v = 2 * Uniform01(rng) - 1;
    const Gradients g = Backward(net, x, up);
    for (std::size_t li = 0; li < net.layers().size(); ++li) {
      const std::size_t nw = net.layers()[li].weights.size();
      for (std::size_t k = 0; k < nw + net.layers()[li].biases.size(); ++k) {
        Mlp plus = net, minus = net;
        auto& lp = plus.mutable_layers()[li];
        auto& lm = minus.mutable_layers()[li];
        (k < nw ? lp.weights[k] : lp.biases[k - nw]) += kStep;
        (k < nw ? lm.weights[k] : lm.biases[k - nw]) -= kStep;
        const double numeric =
            (dot(Forward(plus, x), up) - dot(Forward(minus, x), up)) / (2 * kStep);
        const double analytic =
            k < nw ? g.layers[li].weights[k] : g.layers[li].biases[k - nw];
        worst = std::max(worst, RelErr(analytic, numeric));
      }
    }
  }
  return worst;
}

double WorstEigenSumError(const std::vector<Run>& runs) {
  double worst = 0.0;
  auto check = [&](const ProtocolGraph& g) {
    const int n = g.size();
    const auto lap = g.Laplacian();
    double trace = 0.0;
    for (int i = 0; i < n; ++i) trace += lap[i * n + i];
    const auto eig = JacobiEigenvalues(lap, n).eigenvalues;
    worst = std::max(worst, std::abs(std::accumulate(eig.begin(), eig.end(), 0.0) - trace));
  };
  for (const Run& r : runs) {
    check(r.extraction.full_graph);
    check(r.extraction.compact_graph);
  }
  return worst;
}

double WorstNormalization(const std::vector<Run>& runs) {
  double worst = 0.0;
  auto check = [&](const std::vector<double>& p) {
    worst = std::max(worst, std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0));
  };
  for (const Run& r : runs) {
    const TrainedProtocol& p = r.trained.protocol;
    const int k = p.config.codebook_size;
    for (int a = 0; a < k; ++a) {
      for (int b = 0; b < k; ++b) {
        const std::vector<int> ups = {a, b};
        for (const auto& d : DownlinkProbabilities(p, ups)) check(d);
      }
    }
    for (int j = 0; j < p.env.num_ues; ++j)
      for (int s = 0; s < p.env.NumStatesPerUe(); ++s)
        for (int d = 0; d < k; ++d) check(ActionProbabilities(p, j, s, d));
  }
  return worst;
}

// Firing frequency of every clause whose body holds on all steps at a fixed
// joint state, compared with its context value.
void FiringDeviation(const SymbolicProtocol& p, std::span<const int> buffers,
                     double& worst, int& checked) {
  Rng rng(DeriveSeed(4242, JointStateIndex(EnvConfig{}, buffers)));
  std::vector<int> fired(p.clauses.size(), 0);
  std::vector<int> matched(p.clauses.size(), 0);
  for (int step = 0; step < kFiringSteps; ++step) {
    const StepResult s = ExecuteStep(p, buffers, ExecMode::kStochastic, rng);
    std::set<Term> facts;
    for (std::size_t j = 0; j < buffers.size(); ++j) {
      facts.insert({Predicate::kState, static_cast<int>(j), std::to_string(buffers[j])});
    }
    std::set<int> fired_now(s.fired.begin(), s.fired.end());
    for (int id : s.fired) {
      if (p.clauses[id].head.pred != Predicate::kAction) facts.insert(p.clauses[id].head);
    }
    for (std::size_t id = 0; id < p.clauses.size(); ++id) {
      const Clause& c = p.clauses[id];
      bool holds = true;
      for (const Term& t : c.body) holds = holds && facts.count(t);
      matched[id] += holds;
      fired[id] += fired_now.count(static_cast<int>(id));
    }
  }
  // Agents with a grant-free clause here never consult their downlink.
  std::set<int> grant_free;
  for (const Clause& c : p.clauses) {
    if (c.head.pred == Predicate::kAction && c.body.size() == 1 && c.prob > 0.0 &&
        c.body[0].pred == Predicate::kState &&
        c.body[0].symbol == std::to_string(buffers[c.head.agent])) {
      grant_free.insert(c.head.agent);
    }
  }
  for (std::size_t id = 0; id < p.clauses.size(); ++id) {
    const Clause& c = p.clauses[id];
    if (matched[id] != kFiringSteps) continue;
    const bool chained = c.head.pred == Predicate::kDn ||
                         (c.head.pred == Predicate::kAction && c.body.size() > 1);
    if (chained && grant_free.count(c.head.agent)) continue;
    worst = std::max(worst, std::abs(static_cast<double>(fired[id]) / kFiringSteps - c.prob));
    ++checked;
  }
}

Verdict NumericCheck(const std::vector<Run>& runs, const std::vector<const Run*>& pos) {
  const double grad = WorstGradientError();
  const double eig = WorstEigenSumError(runs);
  const double norm = WorstNormalization(runs);
  double firing = 0.0;
  int checked = 0;
  const SymbolicProtocol reference = Parse(
      "0.2::action(ue1,access) :- state(ue1,2).\n"
      "0.5::action(ue1,discard) :- state(ue1,2).\n"
      "0.3::action(ue1,silence) :- state(ue1,2).\n"
      "0.6::up(ue2,m0) :- state(ue2,1).\n"
      "0.4::up(ue2,m1) :- state(ue2,1).\n"
      "1::dn(ue2,m0) :- up(ue2,m0).\n"
      "1::dn(ue2,m1) :- up(ue2,m1).\n"
      "1::action(ue2,access) :- state(ue2,1), dn(ue2,m0).\n"
      "1::action(ue2,silence) :- state(ue2,1), dn(ue2,m1).\n");
  const std::vector<int> fixed = {2, 1};
  FiringDeviation(reference, fixed, firing, checked);
  const EnvConfig env;
  for (const Run* r : pos) {
    for (const EnvState& s : EnumerateStates(env)) {
      FiringDeviation(r->extraction.compact, s.buffers, firing, checked);
    }
  }
  const bool pass = grad < 1e-4 && eig <= 1e-8 && norm <= 1e-9 && firing <= 0.03;
  return {10, "numerical substrate", pass,
          "grad rel err " + Fmt("%.2e", grad) + ", eigen sum vs trace " +
              Fmt("%.2e", eig) + ", normalization " + Fmt("%.2e", norm) +
              ", firing deviation " + Fmt("%.4f", firing) + " over " +
              std::to_string(checked) + " clause checks"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"maclab acceptance suite"};
  std::string work = "acceptance_runs";
  std::string summary;
  bool strict = false;
  app.add_option("--work", work, "directory for run artifacts");
  app.add_option("--summary", summary, "also write the verdict lines here");
  app.add_flag("--strict", strict, "exit nonzero when any criterion fails");
  CLI11_PARSE(app, argc, argv);

  const ExperimentConfig config;
  const fs::path root = fs::path(work);
  fs::remove_all(root);

  std::vector<Run> runs;
  runs.reserve(3 * kSeeds + kSelectionSeeds - kSeeds);
  const auto start = std::chrono::steady_clock::now();
  for (Arm arm : kAllArms) {
    for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
      runs.push_back(TrainAndExtract(config, arm, seed, root));
      std::fprintf(stderr, "trained %s seed %llu\n", std::string(ArmName(arm)).c_str(),
                   static_cast<unsigned long long>(seed));
    }
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (std::uint64_t seed = kSeeds + 1; seed <= kSelectionSeeds; ++seed) {
    runs.push_back(TrainAndExtract(config, Arm::kPos, seed, root));
    std::fprintf(stderr, "trained pos seed %llu\n", static_cast<unsigned long long>(seed));
  }

  std::map<Arm, std::vector<const Run*>> arms;
  std::vector<const Run*> all_pos;
  for (const Run& r : runs) {
    if (r.seed <= kSeeds) arms[r.arm].push_back(&r);
    if (r.arm == Arm::kPos) all_pos.push_back(&r);
  }
  const std::vector<const Run*>& pos = arms[Arm::kPos];

  const std::vector<std::function<Verdict()>> checks = {
      [&] { return CausalityBoostCheck(arms, seconds); },
      [&] { return InequalityCheck(pos); },
      [&] { return SparsityCheck(pos, config.train.codebook_size); },
      [&] { return CouplingCheck(); },
      [&] { return GraphBoundCheck(runs); },
      [&] { return FidelityCheck(pos, config.env); },
      [&] { return CostCheck(pos); },
      [&] { return CollisionCheck(runs, config.env); },
      [&] { return SelectionCheck(all_pos, config.env); },
      [&] { return NumericCheck(runs, pos); },
  };

  std::ostringstream out;
  int passed = 0;
  for (const auto& check : checks) {
    const Verdict v = check();
    passed += v.pass;
    char head[96];
    std::snprintf(head, sizeof(head), "%s %2d %-26s ", v.pass ? "PASS" : "FAIL", v.id,
                  v.name.c_str());
    out << head << v.detail << "\n";
    std::cout << head << v.detail << std::endl;
  }
  const std::string tally =
      std::to_string(passed) + "/" + std::to_string(checks.size()) + " criteria passed\n";
  out << tally;
  std::cout << tally;
  if (!summary.empty()) WriteFile(summary, out.str());
  return strict && passed != static_cast<int>(checks.size()) ? 1 : 0;
}
