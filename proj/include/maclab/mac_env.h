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

#ifndef MACLAB_MAC_ENV_H_
#define MACLAB_MAC_ENV_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "maclab/random.h"

namespace maclab {

// Single-cell slotted uplink: each UE holds a packet buffer and picks one of
// three actions per slot. Exactly one successful access per slot earns +rho,
// every failed access earns -rho.
struct EnvConfig {
  int num_ues = 2;
  int buffer_cap = 2;
  double arrival_prob = 0.5;
  double reward_rho = 1.0;
  int episode_len = 20;
  std::uint64_t seed = 1;

  // Throws ErrorKind::kConfig naming the first offending field.
  void Validate() const;

  int NumStatesPerUe() const { return buffer_cap + 1; }
};

struct EnvState {
  std::vector<int> buffers;
  int slot = 0;

  bool operator==(const EnvState&) const = default;
};

enum class UeAction { kAccess = 0, kSilence = 1, kDiscard = 2 };
inline constexpr int kNumUeActions = 3;

std::string_view UeActionName(UeAction action);
// Parses "access" / "silence" / "discard"; nullopt otherwise.
std::optional<UeAction> UeActionFromName(std::string_view name);

struct StepOutcome {
  std::vector<double> rewards;
  std::optional<int> success_ue;
  bool collision = false;
  std::vector<bool> arrivals;
};

// Action resolution without arrivals. Pure; exposed so callers can reason
// about a slot before the random arrival draw.
std::pair<EnvState, StepOutcome> ResolveActions(
    const EnvConfig& config, const EnvState& state,
    std::span<const UeAction> actions);

// All (buffer_cap+1)^num_ues joint buffer configurations in lexicographic
// order (UE 0 is the most significant digit), slot 0.
std::vector<EnvState> EnumerateStates(const EnvConfig& config);

// Index of a joint state inside EnumerateStates order.
int JointStateIndex(const EnvConfig& config, std::span<const int> buffers);

class MacEnv {
 public:
  explicit MacEnv(EnvConfig config);

  // Empty buffers, slot 0; re-seeds the arrival stream from config.seed.
  EnvState Reset();

  std::pair<EnvState, StepOutcome> Step(const EnvState& state,
                                        std::span<const UeAction> actions);

  const EnvConfig& config() const { return config_; }

 private:
  EnvConfig config_;
  Rng rng_;
};

}  // namespace maclab

#endif  // MACLAB_MAC_ENV_H_
