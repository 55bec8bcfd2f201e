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

#ifndef MACLAB_SYMBOLIC_EXTRACT_H_
#define MACLAB_SYMBOLIC_EXTRACT_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "maclab/graph_entropy.h"
#include "maclab/mac_env.h"
#include "maclab/protocol_learn.h"
#include "maclab/symbolic_protocol.h"

namespace maclab {

// Row kinds. Chain rows come from full rollouts of a joint state; probe
// rows fill in continuations the rollouts never reached so the extracted
// clauses cover every reachable chain.
enum class RowKind { kChain, kDownlinkProbe, kActionProbe };

inline constexpr int kUnset = -1;

struct OperationRow {
  RowKind kind = RowKind::kChain;
  int agent = 0;
  std::vector<int> joint_state;  // kActionProbe: only the agent's entry set
  std::vector<int> uplinks;      // empty for kActionProbe
  int downlink = kUnset;
  int action = kUnset;  // kUnset for kDownlinkProbe
  double freq = 0.0;
  bool grant_free = false;  // set by Simplify: action ignores the messages
};

// Chain-row frequencies sum to 1 per (agent, joint state); probe rows sum
// to 1 per probe condition.
struct OperationTable {
  int num_agents = 0;
  int num_states = 0;  // per agent
  int codebook_size = 0;
  std::vector<OperationRow> rows;
};

inline constexpr int kDefaultRollouts = 256;
inline constexpr double kDefaultTvThreshold = 0.05;

// Stochastic forward passes of `rollouts` samples for every joint state;
// state index i draws from DeriveSeed(seed, i).
OperationTable ExtractTable(const TrainedProtocol& protocol, int rollouts,
                            std::uint64_t seed);

// Per-channel codeword relabeling; channels are (uplink, agent) and
// (downlink, agent). Every raw codeword has an image.
struct ClusterMap {
  std::vector<std::vector<int>> uplink;    // [agent][raw] -> representative
  std::vector<std::vector<int>> downlink;  // [agent][raw] -> representative
  int merges = 0;  // observed codewords folded into another one

  static ClusterMap Identity(int num_agents, int codebook_size);
  int ClusterCount(bool uplink_channel, int agent) const;
};

struct SimplifyResult {
  OperationTable table;
  ClusterMap clusters;
};

// Grant-free collapse (exact action invariance for an agent state), then
// greedy per-channel merging of codewords whose downstream distributions
// are within total variation `tv_threshold` in every shared context.
SimplifyResult Simplify(const OperationTable& table, double tv_threshold);

// Connection A -> B with context p(B | A) over rows sharing A.
struct Connection {
  Term head;
  std::vector<Term> body;
  double context = 0.0;
};

struct ContextTable {
  OperationTable table;
  std::vector<Connection> connections;
};

ContextTable AssignContext(const OperationTable& table);

// Distribution over actions for `agent` in `joint_state` implied by chaining
// the connections (uplinks, then downlink, then action).
std::vector<double> InducedActionDistribution(const ContextTable& contexts,
                                              int agent,
                                              std::span<const int> joint_state);

struct ExtractedProtocol {
  SymbolicProtocol protocol;
  ProtocolGraph graph;
};

ExtractedProtocol BuildProtocol(const ContextTable& contexts,
                                const ClusterMap& clusters,
                                const std::string& provenance);

// Graph over the vocabulary: one vertex per (predicate, symbol) shared by
// all agents; every clause adds its context to the edge between each body
// term and the head.
ProtocolGraph ProtocolGraphOf(const SymbolicProtocol& protocol);

std::string MessageSymbol(int codeword);

}  // namespace maclab

#endif  // MACLAB_SYMBOLIC_EXTRACT_H_
