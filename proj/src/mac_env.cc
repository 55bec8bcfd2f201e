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

#include "maclab/mac_env.h"

#include <cmath>
#include <string>

#include "maclab/error.h"

namespace maclab {

void EnvConfig::Validate() const {
  auto bad = [](const char* field, const std::string& why) {
    Fail(ErrorKind::kConfig, std::string("env.") + field + ": " + why);
  };
  if (num_ues < 1) bad("num_ues", "must be >= 1");
  if (buffer_cap < 1) bad("buffer_cap", "must be >= 1");
  if (!(arrival_prob >= 0.0 && arrival_prob <= 1.0)) {
    bad("arrival_prob", "must lie in [0, 1]");
  }
  if (!(reward_rho > 0.0) || !std::isfinite(reward_rho)) {
    bad("reward_rho", "must be a positive finite number");
  }
  if (episode_len < 1) bad("episode_len", "must be >= 1");
}

std::string_view UeActionName(UeAction action) {
  switch (action) {
    case UeAction::kAccess: return "access";
    case UeAction::kSilence: return "silence";
    case UeAction::kDiscard: return "discard";
  }
  return "?";
}

std::optional<UeAction> UeActionFromName(std::string_view name) {
  if (name == "access") return UeAction::kAccess;
  if (name == "silence") return UeAction::kSilence;
  if (name == "discard") return UeAction::kDiscard;
  return std::nullopt;
}

std::pair<EnvState, StepOutcome> ResolveActions(
    const EnvConfig& config, const EnvState& state,
    std::span<const UeAction> actions) {
  const auto n = static_cast<std::size_t>(config.num_ues);
  Require(actions.size() == n,
          "step: expected " + std::to_string(n) + " actions, got " +
              std::to_string(actions.size()));
  Require(state.buffers.size() == n, "step: state has wrong UE count");

  EnvState next = state;
  StepOutcome outcome;
  outcome.rewards.assign(n, 0.0);
  outcome.arrivals.assign(n, false);

  int accessors = 0;
  for (UeAction a : actions) accessors += (a == UeAction::kAccess);

  for (std::size_t j = 0; j < n; ++j) {
    switch (actions[j]) {
      case UeAction::kAccess:
        if (accessors >= 2 || state.buffers[j] == 0) {
          outcome.rewards[j] = -config.reward_rho;
        } else {
          outcome.rewards[j] = config.reward_rho;
          outcome.success_ue = static_cast<int>(j);
          --next.buffers[j];
        }
        break;
      case UeAction::kDiscard:
        if (next.buffers[j] > 0) --next.buffers[j];
        break;
      case UeAction::kSilence:
        break;
    }
  }
  outcome.collision = accessors >= 2;
  return {std::move(next), std::move(outcome)};
}

std::vector<EnvState> EnumerateStates(const EnvConfig& config) {
  config.Validate();
  const int base = config.NumStatesPerUe();
  std::size_t total = 1;
  for (int j = 0; j < config.num_ues; ++j) total *= base;

  std::vector<EnvState> states;
  states.reserve(total);
  for (std::size_t index = 0; index < total; ++index) {
    EnvState s;
    s.buffers.assign(config.num_ues, 0);
    std::size_t rest = index;
    for (int j = config.num_ues - 1; j >= 0; --j) {
      s.buffers[j] = static_cast<int>(rest % base);
      rest /= base;
    }
    states.push_back(std::move(s));
  }
  return states;
}

int JointStateIndex(const EnvConfig& config, std::span<const int> buffers) {
  Require(buffers.size() == static_cast<std::size_t>(config.num_ues),
          "JointStateIndex: wrong UE count");
  int index = 0;
  for (int b : buffers) {
    Require(b >= 0 && b <= config.buffer_cap, "JointStateIndex: out of range");
    index = index * config.NumStatesPerUe() + b;
  }
  return index;
}

MacEnv::MacEnv(EnvConfig config) : config_(std::move(config)) {
  config_.Validate();
  rng_.seed(config_.seed);
}

EnvState MacEnv::Reset() {
  rng_.seed(config_.seed);
  EnvState s;
  s.buffers.assign(config_.num_ues, 0);
  s.slot = 0;
  return s;
}

std::pair<EnvState, StepOutcome> MacEnv::Step(
    const EnvState& state, std::span<const UeAction> actions) {
  auto [next, outcome] = ResolveActions(config_, state, actions);
  for (int j = 0; j < config_.num_ues; ++j) {
    // One draw per UE per slot regardless of buffer level keeps the stream
    // aligned across action sequences.
    const bool arrived = Bernoulli(rng_, config_.arrival_prob);
    outcome.arrivals[j] = arrived;
    if (arrived && next.buffers[j] < config_.buffer_cap) ++next.buffers[j];
  }
  ++next.slot;
  return {std::move(next), std::move(outcome)};
}

}  // namespace maclab
