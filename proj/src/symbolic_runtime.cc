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

#include "maclab/symbolic_runtime.h"

#include <algorithm>
#include <set>

#include "maclab/error.h"
#include "maclab/information.h"

namespace maclab {
namespace {

// Ground facts derived so far in one step.
struct Facts {
  std::set<Term> terms;
  bool Has(const Term& t) const { return terms.count(t) > 0; }
};

bool IsGrantFree(const Clause& c) {
  return c.head.pred == Predicate::kAction && c.body.size() == 1 &&
         c.body[0].pred == Predicate::kState && c.body[0].agent == c.head.agent;
}

// Short-circuit body match; one comparison per body term looked at.
bool Matches(const Clause& c, const Facts& facts, std::size_t& comparisons) {
  for (const Term& t : c.body) {
    ++comparisons;
    if (!facts.Has(t)) return false;
  }
  return true;
}

// Clause ids for (agent, head predicate), optionally restricted to
// grant-free or chained action clauses.
enum class ActionKind { kAny, kGrantFree, kChained };

std::vector<int> Group(const SymbolicProtocol& p, int agent, Predicate pred,
                       ActionKind kind = ActionKind::kAny) {
  std::vector<int> ids;
  for (std::size_t i = 0; i < p.clauses.size(); ++i) {
    const Clause& c = p.clauses[i];
    if (c.head.agent != agent || c.head.pred != pred) continue;
    if (kind == ActionKind::kGrantFree && !IsGrantFree(c)) continue;
    if (kind == ActionKind::kChained && IsGrantFree(c)) continue;
    ids.push_back(static_cast<int>(i));
  }
  return ids;
}

std::vector<int> Applicable(const SymbolicProtocol& p,
                            std::span<const int> group, const Facts& facts,
                            std::size_t& comparisons) {
  std::vector<int> out;
  for (int id : group) {
    const Clause& c = p.clauses[id];
    if (Matches(c, facts, comparisons) && c.prob > 0.0) out.push_back(id);
  }
  return out;
}

int Choose(const SymbolicProtocol& p, std::span<const int> ids, ExecMode mode,
           Rng& rng) {
  if (mode == ExecMode::kDeterministic) {
    int best = ids[0];
    for (int id : ids) {
      if (p.clauses[id].prob > p.clauses[best].prob) best = id;
    }
    return best;
  }
  std::vector<double> weights;
  for (int id : ids) weights.push_back(p.clauses[id].prob);
  return ids[SampleIndex(weights, rng)];
}

Term StateTerm(int agent, int level) {
  return {Predicate::kState, agent, std::to_string(level)};
}

std::string JointStateText(std::span<const int> buffers) {
  std::string s = "[";
  for (std::size_t j = 0; j < buffers.size(); ++j) {
    if (j) s += ",";
    s += std::to_string(buffers[j]);
  }
  return s + "]";
}

std::vector<int> DecodeStates(const std::vector<std::string>& symbols,
                              std::size_t index, int agents) {
  std::vector<int> out(agents);
  for (int j = agents - 1; j >= 0; --j) {
    out[j] = static_cast<int>(index % symbols.size());
    index /= symbols.size();
  }
  return out;
}

}  // namespace

StepResult ExecuteStep(const SymbolicProtocol& protocol,
                       std::span<const int> buffers, ExecMode mode, Rng& rng) {
  const int n = static_cast<int>(buffers.size());
  Require(protocol.NumAgents() <= n,
          "execute_step: protocol has " +
              std::to_string(protocol.NumAgents()) + " agents, state has " +
              std::to_string(n));
  StepResult result;
  result.actions.assign(n, UeAction::kSilence);
  Facts facts;
  for (int j = 0; j < n; ++j) facts.terms.insert(StateTerm(j, buffers[j]));

  std::vector<std::optional<int>> chosen_action(n);
  for (int j = 0; j < n; ++j) {
    const auto group = Group(protocol, j, Predicate::kAction,
                             ActionKind::kGrantFree);
    const auto ids = Applicable(protocol, group, facts, result.comparisons);
    if (!ids.empty()) chosen_action[j] = Choose(protocol, ids, mode, rng);
  }

  std::vector<Term> derived;
  for (int j = 0; j < n; ++j) {
    const auto ids = Applicable(protocol, Group(protocol, j, Predicate::kUp),
                                facts, result.comparisons);
    if (ids.empty()) continue;
    const int id = Choose(protocol, ids, mode, rng);
    result.fired.push_back(id);
    derived.push_back(protocol.clauses[id].head);
  }
  facts.terms.insert(derived.begin(), derived.end());

  derived.clear();
  for (int j = 0; j < n; ++j) {
    if (chosen_action[j]) continue;
    const auto ids = Applicable(protocol, Group(protocol, j, Predicate::kDn),
                                facts, result.comparisons);
    if (ids.empty()) continue;
    const int id = Choose(protocol, ids, mode, rng);
    result.fired.push_back(id);
    derived.push_back(protocol.clauses[id].head);
  }
  facts.terms.insert(derived.begin(), derived.end());

  for (int j = 0; j < n; ++j) {
    if (!chosen_action[j]) {
      const auto group =
          Group(protocol, j, Predicate::kAction, ActionKind::kChained);
      const auto ids = Applicable(protocol, group, facts, result.comparisons);
      if (!ids.empty()) chosen_action[j] = Choose(protocol, ids, mode, rng);
    }
    if (!chosen_action[j]) {
      Fail(ErrorKind::kCoverage,
           "no applicable action clause for " + AgentName(j) + " in state " +
               std::to_string(buffers[j]) + " (joint state " +
               JointStateText(buffers) + ")");
    }
    const Clause& c = protocol.clauses[*chosen_action[j]];
    const auto action = UeActionFromName(c.head.symbol);
    if (!action) {
      Fail(ErrorKind::kValidation, "unknown action '" + c.head.symbol + "'");
    }
    result.actions[j] = *action;
    result.fired.push_back(*chosen_action[j]);
  }
  return result;
}

std::vector<Conflict> FindConflicts(const SymbolicProtocol& protocol) {
  const int n = protocol.NumAgents();
  std::set<Conflict> found;
  const auto it = protocol.vocabulary.symbols.find(Predicate::kState);
  if (n < 2 || it == protocol.vocabulary.symbols.end() || it->second.empty()) {
    return {};
  }
  const std::vector<std::string> states(it->second.begin(), it->second.end());
  std::size_t joint_count = 1;
  for (int j = 0; j < n; ++j) joint_count *= states.size();

  std::size_t unused = 0;
  for (std::size_t index = 0; index < joint_count; ++index) {
    const auto level = DecodeStates(states, index, n);
    Facts facts;
    for (int j = 0; j < n; ++j) {
      facts.terms.insert({Predicate::kState, j, states[level[j]]});
    }
    // Per agent: applicable uplink clauses, or a single "no uplink" option.
    std::vector<std::vector<int>> up_options(n);
    for (int j = 0; j < n; ++j) {
      up_options[j] = Applicable(protocol, Group(protocol, j, Predicate::kUp),
                                 facts, unused);
      if (up_options[j].empty()) up_options[j].push_back(-1);
    }
    std::vector<std::size_t> pick(n, 0);
    while (true) {
      Facts with_up = facts;
      for (int j = 0; j < n; ++j) {
        if (up_options[j][pick[j]] >= 0) {
          with_up.terms.insert(protocol.clauses[up_options[j][pick[j]]].head);
        }
      }
      std::vector<std::vector<int>> access(n);
      for (int j = 0; j < n; ++j) {
        std::vector<int> actions = Applicable(
            protocol,
            Group(protocol, j, Predicate::kAction, ActionKind::kGrantFree),
            with_up, unused);
        if (actions.empty()) {
          const auto dns = Applicable(
              protocol, Group(protocol, j, Predicate::kDn), with_up, unused);
          const auto chained =
              Group(protocol, j, Predicate::kAction, ActionKind::kChained);
          for (int dn : dns) {
            Facts with_dn = with_up;
            with_dn.terms.insert(protocol.clauses[dn].head);
            for (int a : Applicable(protocol, chained, with_dn, unused)) {
              actions.push_back(a);
            }
          }
        }
        for (int a : actions) {
          if (protocol.clauses[a].head.symbol == UeActionName(UeAction::kAccess)) {
            access[j].push_back(a);
          }
        }
      }
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          for (int a : access[i]) {
            for (int b : access[j]) found.insert({std::min(a, b), std::max(a, b)});
          }
        }
      }
      int j = n - 1;
      while (j >= 0 && ++pick[j] == up_options[j].size()) pick[j--] = 0;
      if (j < 0) break;
    }
  }
  return {found.begin(), found.end()};
}

SymbolicProtocol Edit(const SymbolicProtocol& protocol,
                      const EditCommand& command) {
  SymbolicProtocol out = protocol;
  if (command.kind == EditCommand::Kind::kRemove) {
    if (command.clause_id < 0 ||
        command.clause_id >= static_cast<int>(out.clauses.size())) {
      Fail(ErrorKind::kNotFound,
           "edit: no clause with id " + std::to_string(command.clause_id) +
               " (protocol has " + std::to_string(out.clauses.size()) +
               " clauses)");
    }
    out.clauses.erase(out.clauses.begin() + command.clause_id);
    return out;
  }
  out.clauses.push_back(command.clause);
  try {
    Canonicalize(out);
  } catch (const Error& e) {
    Fail(ErrorKind::kValidation, std::string("edit: ") + e.what());
  }
  return out;
}

ConflictResolution ResolveConflicts(const SymbolicProtocol& protocol) {
  ConflictResolution res;
  res.protocol = protocol;
  for (auto conflicts = FindConflicts(res.protocol); !conflicts.empty();
       conflicts = FindConflicts(res.protocol)) {
    const auto [a, b] = conflicts.front();
    const Clause& ca = res.protocol.clauses[a];
    const Clause& cb = res.protocol.clauses[b];
    int victim;
    if (ca.prob != cb.prob) {
      victim = ca.prob < cb.prob ? a : b;
    } else {
      victim = ca.head.agent > cb.head.agent ? a : b;
    }
    const Clause removed = res.protocol.clauses[victim];
    res.protocol = Edit(res.protocol, {EditCommand::Kind::kRemove, victim, {}});
    res.removed.push_back(removed);

    const bool orphaned = std::none_of(
        res.protocol.clauses.begin(), res.protocol.clauses.end(),
        [&](const Clause& c) {
          return c.head.pred == Predicate::kAction &&
                 c.head.agent == removed.head.agent && c.body == removed.body;
        });
    if (orphaned) {
      Clause fallback = removed;
      fallback.prob = 1.0;
      fallback.head.symbol = std::string(UeActionName(UeAction::kSilence));
      res.protocol.vocabulary.symbols[Predicate::kAction].insert(
          fallback.head.symbol);
      res.protocol = Edit(res.protocol, {EditCommand::Kind::kAdd, -1, fallback});
      res.added.push_back(fallback);
    }
  }
  return res;
}

double ProtocolSemanticEntropy(const SymbolicProtocol& protocol) {
  std::vector<double> contexts;
  for (const Clause& c : protocol.clauses) contexts.push_back(c.prob);
  return SemanticEntropy(contexts);
}

int SelectBest(std::span<const SymbolicProtocol> candidates) {
  Require(!candidates.empty(), "select_best: no candidates");
  int best = 0;
  double best_h = ProtocolSemanticEntropy(candidates[0]);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double h = ProtocolSemanticEntropy(candidates[i]);
    if (h < best_h) {
      best_h = h;
      best = static_cast<int>(i);
    }
  }
  return best;
}

EvalStats EvaluateSymbolic(const SymbolicProtocol& protocol,
                           const EnvConfig& env, int episodes, ExecMode mode,
                           std::uint64_t seed) {
  Require(episodes >= 1, "evaluate: episodes must be >= 1");
  EvalStats stats;
  stats.episodes = episodes;
  for (int e = 0; e < episodes; ++e) {
    EnvConfig cfg = env;
    cfg.seed = DeriveSeed(env.seed, static_cast<std::uint64_t>(e));
    MacEnv mac(cfg);
    Rng rng(DeriveSeed(seed, static_cast<std::uint64_t>(e)));
    EnvState state = mac.Reset();
    for (int t = 0; t < cfg.episode_len; ++t) {
      const StepResult step = ExecuteStep(protocol, state.buffers, mode, rng);
      auto [next, outcome] = mac.Step(state, step.actions);
      for (double r : outcome.rewards) stats.mean_return += r;
      stats.collisions += outcome.collision;
      stats.successes += outcome.success_ue.has_value();
      ++stats.slots;
      state = std::move(next);
    }
  }
  stats.mean_return /= episodes;
  return stats;
}

EvalStats EvaluateNeural(const TrainedProtocol& protocol, const EnvConfig& env,
                         int episodes, SamplingMode mode, std::uint64_t seed) {
  Require(episodes >= 1, "evaluate: episodes must be >= 1");
  EvalStats stats;
  stats.episodes = episodes;
  for (int e = 0; e < episodes; ++e) {
    EnvConfig cfg = env;
    cfg.seed = DeriveSeed(env.seed, static_cast<std::uint64_t>(e));
    MacEnv mac(cfg);
    Rng rng(DeriveSeed(seed, static_cast<std::uint64_t>(e)));
    const Trace trace = RolloutEpisode(protocol, mac, rng, mode);
    stats.mean_return += trace.episode_return;
    stats.collisions += trace.collisions;
    stats.successes += trace.successes;
    stats.slots += cfg.episode_len;
  }
  stats.mean_return /= episodes;
  return stats;
}

Fidelity NeuralSymbolicFidelity(const TrainedProtocol& neural,
                                const SymbolicProtocol& symbolic,
                                const EnvConfig& env, int slots,
                                std::uint64_t seed) {
  Require(slots >= 1, "fidelity: slots must be >= 1");
  Fidelity f;
  Rng unused(seed);
  std::optional<MacEnv> mac;
  EnvState state;
  for (int t = 0; t < slots; ++t) {
    if (t % env.episode_len == 0) {
      EnvConfig cfg = env;
      cfg.seed = DeriveSeed(seed, static_cast<std::uint64_t>(t));
      mac.emplace(cfg);
      state = mac->Reset();
    }
    const ChainSample chain =
        RunChain(neural, state.buffers, SamplingMode::kArgmax, unused);
    bool match = false;
    try {
      const StepResult step = ExecuteStep(symbolic, state.buffers,
                                          ExecMode::kDeterministic, unused);
      match = step.actions == chain.actions;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kCoverage) throw;
    }
    ++f.steps;
    f.matching_steps += match;
    state = mac->Step(state, chain.actions).first;
  }
  f.rate = static_cast<double>(f.matching_steps) / f.steps;
  return f;
}

CostReport MakeCostReport(const TrainedProtocol& neural,
                          const SymbolicProtocol& symbolic) {
  CostReport report;
  report.neural_flops = neural.ExecutionFlopsPerStep();
  const auto states = EnumerateStates(neural.env);
  Rng unused(0);
  std::size_t total = 0;
  for (const EnvState& s : states) {
    total += ExecuteStep(symbolic, s.buffers, ExecMode::kDeterministic, unused)
                 .comparisons;
  }
  report.symbolic_comparisons =
      static_cast<double>(total) / static_cast<double>(states.size());
  Require(report.symbolic_comparisons > 0.0,
          "cost_report: symbolic protocol performed no comparisons");
  report.compute_ratio =
      static_cast<double>(report.neural_flops) / report.symbolic_comparisons;
  report.neural_bytes = neural.ExecutionParameterCount() * 8;
  report.symbolic_bytes = ClauseBytes(symbolic);
  report.memory_ratio = static_cast<double>(report.symbolic_bytes) /
                        static_cast<double>(report.neural_bytes);
  return report;
}

}  // namespace maclab
