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

#include "maclab/symbolic_extract.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "maclab/error.h"
#include "maclab/random.h"

namespace maclab {
namespace {

// Random streams for probe sampling sit above the per-state streams.
constexpr std::uint64_t kDownlinkProbeStream = 1ull << 32;
constexpr std::uint64_t kActionProbeStream = 1ull << 33;

using Histogram = std::map<int, double>;

double TotalVariation(const Histogram& a, const Histogram& b) {
  double ta = 0.0;
  double tb = 0.0;
  for (const auto& [k, v] : a) ta += v;
  for (const auto& [k, v] : b) tb += v;
  std::set<int> keys;
  for (const auto& [k, v] : a) keys.insert(k);
  for (const auto& [k, v] : b) keys.insert(k);
  double tv = 0.0;
  for (int key : keys) {
    const auto ia = a.find(key);
    const auto ib = b.find(key);
    const double pa = ia == a.end() ? 0.0 : ia->second / ta;
    const double pb = ib == b.end() ? 0.0 : ib->second / tb;
    tv += std::abs(pa - pb);
  }
  return 0.5 * tv;
}

std::vector<int> Counts(std::span<const double> probs, int draws, Rng& rng) {
  std::vector<int> counts(probs.size(), 0);
  for (int i = 0; i < draws; ++i) ++counts[SampleIndex(probs, rng)];
  return counts;
}

// Downstream behaviour of one codeword, keyed by the context it is compared
// in.
using Downstream = std::map<std::vector<int>, Histogram>;

// Max TV over shared contexts; codewords without downstream effect are at
// distance 0, codewords with disjoint contexts are never merged.
double Distance(const Downstream& a, const Downstream& b) {
  if (a.empty() || b.empty()) return a.empty() && b.empty() ? 0.0 : 1.0;
  double worst = -1.0;
  for (const auto& [ctx, hist] : a) {
    const auto it = b.find(ctx);
    if (it != b.end()) worst = std::max(worst, TotalVariation(hist, it->second));
  }
  return worst < 0.0 ? 1.0 : worst;
}

// Greedy clustering in ascending codeword order against cluster
// representatives. Returns raw -> representative for observed codewords.
std::map<int, int> Cluster(const std::map<int, Downstream>& downstream,
                           double tv_threshold, int& merges) {
  std::map<int, int> image;
  std::vector<int> reps;
  for (const auto& [code, ds] : downstream) {
    int target = code;
    for (int rep : reps) {
      if (Distance(downstream.at(rep), ds) <= tv_threshold) {
        target = rep;
        ++merges;
        break;
      }
    }
    if (target == code) reps.push_back(code);
    image[code] = target;
  }
  return image;
}

std::vector<int> TotalMap(const std::map<int, int>& image, int codebook_size) {
  const int fallback = image.empty() ? 0 : image.begin()->second;
  std::vector<int> map(codebook_size, fallback);
  for (const auto& [raw, rep] : image) map[raw] = rep;
  return map;
}

auto RowKey(const OperationRow& r) {
  return std::tie(r.kind, r.agent, r.joint_state, r.uplinks, r.downlink,
                  r.action, r.grant_free);
}

std::vector<OperationRow> Reaggregate(std::vector<OperationRow> rows) {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const OperationRow& a, const OperationRow& b) {
                     return RowKey(a) < RowKey(b);
                   });
  std::vector<OperationRow> out;
  for (OperationRow& r : rows) {
    if (!out.empty() && RowKey(out.back()) == RowKey(r)) {
      out.back().freq += r.freq;
    } else {
      out.push_back(std::move(r));
    }
  }
  return out;
}

bool UsesAction(const OperationRow& r) {
  return r.kind != RowKind::kDownlinkProbe;
}

Term UpTerm(int agent, int code) {
  return {Predicate::kUp, agent, MessageSymbol(code)};
}
Term DnTerm(int agent, int code) {
  return {Predicate::kDn, agent, MessageSymbol(code)};
}
Term StateTermOf(int agent, int level) {
  return {Predicate::kState, agent, std::to_string(level)};
}
Term ActionTerm(int agent, int action) {
  return {Predicate::kAction, agent,
          std::string(UeActionName(static_cast<UeAction>(action)))};
}

// Connections sharing a source: (head agent, head predicate, body).
using GroupKey = std::tuple<int, Predicate, std::vector<Term>>;
using Groups = std::map<GroupKey, std::map<Term, double>>;

GroupKey KeyFor(const Term& head, std::vector<Term> body) {
  return {head.agent, head.pred, std::move(body)};
}

// Sums grouped weights into connections with normalized contexts.
void EmitGroups(const Groups& groups, std::vector<Connection>& out) {
  for (const auto& [key, heads] : groups) {
    double total = 0.0;
    for (const auto& [head, w] : heads) total += w;
    for (const auto& [head, w] : heads) {
      if (w > 0.0) out.push_back({head, std::get<2>(key), w / total});
    }
  }
}

}  // namespace

std::string MessageSymbol(int codeword) {
  return "m" + std::to_string(codeword);
}

OperationTable ExtractTable(const TrainedProtocol& protocol, int rollouts,
                            std::uint64_t seed) {
  protocol.Validate();
  Require(rollouts >= 1, "extract_table: rollouts must be >= 1");
  const EnvConfig& env = protocol.env;
  const int n = env.num_ues;
  const int k = protocol.config.codebook_size;
  OperationTable table;
  table.num_agents = n;
  table.num_states = env.NumStatesPerUe();
  table.codebook_size = k;

  const auto states = EnumerateStates(env);
  // Observed uplinks per (agent, own level) and observed uplink vectors.
  std::vector<std::vector<std::set<int>>> uplinks_at(
      n, std::vector<std::set<int>>(table.num_states));
  std::set<std::vector<int>> seen_uplinks;
  std::vector<std::set<std::pair<int, int>>> seen_level_dn(n);
  std::vector<std::set<int>> downlinks_of(n);

  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto& buffers = states[i].buffers;
    Rng rng(DeriveSeed(seed, i));
    std::vector<std::map<std::tuple<std::vector<int>, int, int>, int>> counts(n);
    for (int r = 0; r < rollouts; ++r) {
      const ChainSample c =
          RunChain(protocol, buffers, SamplingMode::kStochastic, rng);
      seen_uplinks.insert(c.uplinks);
      for (int j = 0; j < n; ++j) {
        uplinks_at[j][buffers[j]].insert(c.uplinks[j]);
        ++counts[j][{c.uplinks, c.downlinks[j], static_cast<int>(c.actions[j])}];
      }
    }
    for (int j = 0; j < n; ++j) {
      for (const auto& [key, count] : counts[j]) {
        const auto& [ups, dn, action] = key;
        table.rows.push_back({RowKind::kChain, j, buffers, ups, dn, action,
                              static_cast<double>(count) / rollouts, false});
        seen_level_dn[j].insert({buffers[j], dn});
        downlinks_of[j].insert(dn);
      }
    }
  }

  // Uplink vectors reachable by combining per-level observations but never
  // drawn together.
  std::uint64_t probe = 0;
  for (const EnvState& s : states) {
    std::vector<std::vector<int>> options(n);
    for (int j = 0; j < n; ++j) {
      options[j].assign(uplinks_at[j][s.buffers[j]].begin(),
                        uplinks_at[j][s.buffers[j]].end());
    }
    std::vector<std::size_t> pick(n, 0);
    while (true) {
      std::vector<int> ups(n);
      for (int j = 0; j < n; ++j) ups[j] = options[j][pick[j]];
      if (seen_uplinks.insert(ups).second) {
        Rng rng(DeriveSeed(seed, kDownlinkProbeStream + probe++));
        const auto probs = DownlinkProbabilities(protocol, ups);
        for (int j = 0; j < n; ++j) {
          const auto counts = Counts(probs[j], rollouts, rng);
          for (int d = 0; d < k; ++d) {
            if (counts[d] == 0) continue;
            table.rows.push_back({RowKind::kDownlinkProbe, j, {}, ups, d,
                                  kUnset,
                                  static_cast<double>(counts[d]) / rollouts,
                                  false});
            downlinks_of[j].insert(d);
          }
        }
      }
      int j = n - 1;
      while (j >= 0 && ++pick[j] == options[j].size()) pick[j--] = 0;
      if (j < 0) break;
    }
  }

  // Own-level / downlink pairs never followed to an action.
  probe = 0;
  for (int j = 0; j < n; ++j) {
    for (int level = 0; level < table.num_states; ++level) {
      for (int d : downlinks_of[j]) {
        if (seen_level_dn[j].count({level, d})) continue;
        Rng rng(DeriveSeed(seed, kActionProbeStream + probe++));
        const auto counts =
            Counts(ActionProbabilities(protocol, j, level, d), rollouts, rng);
        std::vector<int> joint(n, kUnset);
        joint[j] = level;
        for (int a = 0; a < kNumUeActions; ++a) {
          if (counts[a] == 0) continue;
          table.rows.push_back({RowKind::kActionProbe, j, joint, {}, d, a,
                                static_cast<double>(counts[a]) / rollouts,
                                false});
        }
      }
    }
  }
  return table;
}

ClusterMap ClusterMap::Identity(int num_agents, int codebook_size) {
  ClusterMap map;
  std::vector<int> id(codebook_size);
  for (int c = 0; c < codebook_size; ++c) id[c] = c;
  map.uplink.assign(num_agents, id);
  map.downlink.assign(num_agents, id);
  return map;
}

int ClusterMap::ClusterCount(bool uplink_channel, int agent) const {
  const auto& m = uplink_channel ? uplink.at(agent) : downlink.at(agent);
  return static_cast<int>(std::set<int>(m.begin(), m.end()).size());
}

SimplifyResult Simplify(const OperationTable& input, double tv_threshold) {
  Require(tv_threshold >= 0.0 && tv_threshold < 1.0,
          "simplify: tv_threshold must lie in [0, 1)");
  SimplifyResult result;
  OperationTable& table = result.table;
  table = input;
  const int n = table.num_agents;
  const int k = table.codebook_size;

  // Grant-free collapse: one action across every observed message chain.
  std::map<std::pair<int, int>, std::set<int>> actions_at;
  for (const OperationRow& r : table.rows) {
    if (UsesAction(r)) actions_at[{r.agent, r.joint_state[r.agent]}].insert(r.action);
  }
  std::vector<bool> all_grant_free(n, true);
  for (OperationRow& r : table.rows) {
    if (!UsesAction(r)) continue;
    r.grant_free = actions_at[{r.agent, r.joint_state[r.agent]}].size() == 1;
    if (!r.grant_free) all_grant_free[r.agent] = false;
  }

  result.clusters = ClusterMap::Identity(n, k);
  ClusterMap& clusters = result.clusters;

  // Downlinks first: downstream = action given own level.
  for (int j = 0; j < n; ++j) {
    std::map<int, Downstream> downstream;
    for (const OperationRow& r : table.rows) {
      if (r.agent != j) continue;
      auto& ds = downstream[r.downlink];
      if (UsesAction(r) && !r.grant_free) {
        ds[{r.joint_state[j]}][r.action] += r.freq;
      }
    }
    clusters.downlink[j] =
        TotalMap(Cluster(downstream, tv_threshold, clusters.merges), k);
  }
  for (OperationRow& r : table.rows) {
    r.downlink = clusters.downlink[r.agent][r.downlink];
  }

  // Uplinks: downstream = downlink of each message-dependent agent given
  // the other uplinks.
  for (int j = 0; j < n; ++j) {
    std::map<int, Downstream> downstream;
    for (const OperationRow& r : table.rows) {
      if (r.uplinks.empty()) continue;
      auto& ds = downstream[r.uplinks[j]];
      if (all_grant_free[r.agent]) continue;
      std::vector<int> ctx = {r.agent};
      for (int i = 0; i < n; ++i) {
        if (i != j) ctx.push_back(r.uplinks[i]);
      }
      ds[ctx][r.downlink] += r.freq;
    }
    clusters.uplink[j] =
        TotalMap(Cluster(downstream, tv_threshold, clusters.merges), k);
  }
  for (OperationRow& r : table.rows) {
    for (int i = 0; i < static_cast<int>(r.uplinks.size()); ++i) {
      r.uplinks[i] = clusters.uplink[i][r.uplinks[i]];
    }
  }
  table.rows = Reaggregate(std::move(table.rows));
  return result;
}

ContextTable AssignContext(const OperationTable& table) {
  ContextTable out;
  out.table = table;
  const int n = table.num_agents;

  std::vector<bool> needs_messages(n, false);
  for (const OperationRow& r : table.rows) {
    if (UsesAction(r) && !r.grant_free) needs_messages[r.agent] = true;
  }
  const bool any_messages =
      std::find(needs_messages.begin(), needs_messages.end(), true) !=
      needs_messages.end();

  Groups up;
  Groups dn;
  Groups act;
  Groups grant_free;
  for (const OperationRow& r : table.rows) {
    const int j = r.agent;
    if (r.kind == RowKind::kChain && any_messages) {
      const Term head = UpTerm(j, r.uplinks[j]);
      up[KeyFor(head, {StateTermOf(j, r.joint_state[j])})][head] += r.freq;
    }
    if (r.kind != RowKind::kActionProbe && needs_messages[j]) {
      std::vector<Term> body;
      for (int i = 0; i < n; ++i) body.push_back(UpTerm(i, r.uplinks[i]));
      const Term head = DnTerm(j, r.downlink);
      dn[KeyFor(head, std::move(body))][head] += r.freq;
    }
    if (!UsesAction(r)) continue;
    const Term head = ActionTerm(j, r.action);
    if (r.grant_free) {
      grant_free[KeyFor(head, {StateTermOf(j, r.joint_state[j])})][head] +=
          r.freq;
    } else {
      act[KeyFor(head, {StateTermOf(j, r.joint_state[j]),
                        DnTerm(j, r.downlink)})][head] += r.freq;
    }
  }
  EmitGroups(up, out.connections);
  EmitGroups(dn, out.connections);
  EmitGroups(act, out.connections);
  EmitGroups(grant_free, out.connections);
  return out;
}

std::vector<double> InducedActionDistribution(
    const ContextTable& contexts, int agent, std::span<const int> joint_state) {
  const int n = static_cast<int>(joint_state.size());
  std::map<std::pair<std::vector<Term>, Term>, double> p;
  for (const Connection& c : contexts.connections) p[{c.body, c.head}] = c.context;
  auto lookup = [&](const std::vector<Term>& body, const Term& head) {
    const auto it = p.find({body, head});
    return it == p.end() ? 0.0 : it->second;
  };

  std::vector<double> dist(kNumUeActions, 0.0);
  const Term own_state = StateTermOf(agent, joint_state[agent]);
  bool grant_free = false;
  for (int a = 0; a < kNumUeActions; ++a) {
    dist[a] = lookup({own_state}, ActionTerm(agent, a));
    grant_free = grant_free || dist[a] > 0.0;
  }
  if (grant_free) return dist;

  // Uplink options with their probabilities, per agent.
  std::vector<std::vector<std::pair<int, double>>> ups(n);
  for (const Connection& c : contexts.connections) {
    if (c.head.pred != Predicate::kUp || c.body.size() != 1) continue;
    const int i = c.head.agent;
    if (i < n && c.body[0] == StateTermOf(i, joint_state[i])) {
      ups[i].push_back({std::stoi(c.head.symbol.substr(1)), c.context});
    }
  }
  for (const auto& u : ups) {
    if (u.empty()) return dist;
  }
  const int k = contexts.table.codebook_size;
  std::vector<std::size_t> pick(n, 0);
  while (true) {
    double pu = 1.0;
    std::vector<Term> body;
    for (int i = 0; i < n; ++i) {
      pu *= ups[i][pick[i]].second;
      body.push_back(UpTerm(i, ups[i][pick[i]].first));
    }
    for (int d = 0; d < k; ++d) {
      const double pd = lookup(body, DnTerm(agent, d));
      if (pd == 0.0) continue;
      for (int a = 0; a < kNumUeActions; ++a) {
        dist[a] += pu * pd *
                   lookup({own_state, DnTerm(agent, d)}, ActionTerm(agent, a));
      }
    }
    int i = n - 1;
    while (i >= 0 && ++pick[i] == ups[i].size()) pick[i--] = 0;
    if (i < 0) break;
  }
  return dist;
}

ProtocolGraph ProtocolGraphOf(const SymbolicProtocol& protocol) {
  std::vector<std::string> labels;
  std::map<std::pair<Predicate, std::string>, int> index;
  for (const auto& [pred, symbols] : protocol.vocabulary.symbols) {
    for (const std::string& s : symbols) {
      index[{pred, s}] = static_cast<int>(labels.size());
      labels.push_back(std::string(PredicateName(pred)) + ":" + s);
    }
  }
  ProtocolGraph graph(labels);
  for (const Clause& c : protocol.clauses) {
    const int head = index.at({c.head.pred, c.head.symbol});
    for (const Term& t : c.body) {
      graph.AddEdge(index.at({t.pred, t.symbol}), head, c.prob);
    }
  }
  return graph;
}

ExtractedProtocol BuildProtocol(const ContextTable& contexts,
                                const ClusterMap& clusters,
                                const std::string& provenance) {
  Require(!contexts.connections.empty(), "build_protocol: empty table");
  ExtractedProtocol out;
  SymbolicProtocol& p = out.protocol;
  p.provenance = provenance;
  for (int s = 0; s < contexts.table.num_states; ++s) {
    p.vocabulary.symbols[Predicate::kState].insert(std::to_string(s));
  }
  for (int a = 0; a < kNumUeActions; ++a) {
    p.vocabulary.symbols[Predicate::kAction].insert(
        std::string(UeActionName(static_cast<UeAction>(a))));
  }
  for (const auto& m : clusters.uplink) {
    for (int c : m) p.vocabulary.symbols[Predicate::kUp].insert(MessageSymbol(c));
  }
  for (const auto& m : clusters.downlink) {
    for (int c : m) p.vocabulary.symbols[Predicate::kDn].insert(MessageSymbol(c));
  }
  for (const Connection& c : contexts.connections) {
    p.clauses.push_back({c.context, c.head, c.body});
  }
  Canonicalize(p);
  out.graph = ProtocolGraphOf(p);
  return out;
}

}  // namespace maclab
