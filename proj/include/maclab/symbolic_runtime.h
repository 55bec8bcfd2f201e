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

#ifndef MACLAB_SYMBOLIC_RUNTIME_H_
#define MACLAB_SYMBOLIC_RUNTIME_H_

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "maclab/mac_env.h"
#include "maclab/protocol_learn.h"
#include "maclab/random.h"
#include "maclab/symbolic_protocol.h"

namespace maclab {

enum class ExecMode { kStochastic, kDeterministic };

struct StepResult {
  std::vector<UeAction> actions;
  std::vector<int> fired;      // clause ids, in firing order
  std::size_t comparisons = 0;  // body-term comparisons performed
};

// Forward-chains state -> up -> dn -> action for every agent. Grant-free
// action clauses (body = own state only) short-circuit the message chain.
// Deterministic mode picks the highest context, ties to the lowest id; the
// rng is untouched in that mode. No applicable action clause raises
// kCoverage.
StepResult ExecuteStep(const SymbolicProtocol& protocol,
                       std::span<const int> buffers, ExecMode mode, Rng& rng);

// Pair of action clause ids (first < second) of different agents, both
// heads "access", that can fire in the same joint state.
using Conflict = std::pair<int, int>;

std::vector<Conflict> FindConflicts(const SymbolicProtocol& protocol);

struct EditCommand {
  enum class Kind { kAdd, kRemove };
  Kind kind = Kind::kRemove;
  int clause_id = -1;  // for kRemove
  Clause clause;       // for kAdd
};

// Returns a new protocol; the input is unchanged. Unknown ids raise
// kNotFound; malformed or duplicate clauses raise kValidation.
SymbolicProtocol Edit(const SymbolicProtocol& protocol,
                      const EditCommand& command);

struct ConflictResolution {
  SymbolicProtocol protocol;
  std::vector<Clause> removed;
  std::vector<Clause> added;  // silence fallbacks for orphaned bodies
};

// Removes one clause per conflict: the lower-context one, ties to the
// higher agent. Bodies left without any action clause receive a silence
// clause with context 1.
ConflictResolution ResolveConflicts(const SymbolicProtocol& protocol);

// Index of the minimum semantic entropy; ties to the lowest index.
int SelectBest(std::span<const SymbolicProtocol> candidates);
double ProtocolSemanticEntropy(const SymbolicProtocol& protocol);

struct EvalStats {
  int episodes = 0;
  int slots = 0;
  double mean_return = 0.0;  // summed over UEs, averaged over episodes
  int collisions = 0;
  int successes = 0;
};

// Episode rollouts of the symbolic protocol; episode e uses environment
// seed DeriveSeed(env.seed, e).
EvalStats EvaluateSymbolic(const SymbolicProtocol& protocol,
                           const EnvConfig& env, int episodes, ExecMode mode,
                           std::uint64_t seed);
EvalStats EvaluateNeural(const TrainedProtocol& protocol, const EnvConfig& env,
                         int episodes, SamplingMode mode, std::uint64_t seed);

struct Fidelity {
  int steps = 0;
  int matching_steps = 0;  // every UE's action agrees
  double rate = 0.0;
};

// Rolls the neural protocol in argmax mode for `slots` slots and compares
// the deterministic symbolic actions on every visited joint state.
Fidelity NeuralSymbolicFidelity(const TrainedProtocol& neural,
                                const SymbolicProtocol& symbolic,
                                const EnvConfig& env, int slots,
                                std::uint64_t seed);

struct CostReport {
  std::size_t neural_flops = 0;
  double symbolic_comparisons = 0.0;  // mean over all joint states
  double compute_ratio = 0.0;
  std::size_t neural_bytes = 0;  // parameters x 8
  std::size_t symbolic_bytes = 0;
  double memory_ratio = 0.0;  // symbolic / neural
};

CostReport MakeCostReport(const TrainedProtocol& neural,
                          const SymbolicProtocol& symbolic);

}  // namespace maclab

#endif  // MACLAB_SYMBOLIC_RUNTIME_H_
