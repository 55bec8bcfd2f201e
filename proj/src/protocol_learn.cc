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

#include "maclab/protocol_learn.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>

#include "maclab/error.h"
#include "maclab/information.h"

namespace maclab {
namespace {

std::vector<double> OneHot(int index, int size) {
  std::vector<double> v(size, 0.0);
  v[index] = 1.0;
  return v;
}

std::vector<double> JointOneHot(std::span<const int> buffers,
                                int states_per_ue) {
  std::vector<double> v(buffers.size() * states_per_ue, 0.0);
  for (std::size_t j = 0; j < buffers.size(); ++j) {
    v[j * states_per_ue + buffers[j]] = 1.0;
  }
  return v;
}

int Argmax(std::span<const double> values) {
  return static_cast<int>(std::max_element(values.begin(), values.end()) -
                          values.begin());
}

int Choose(std::span<const double> probs, SamplingMode mode, Rng& rng) {
  return mode == SamplingMode::kArgmax ? Argmax(probs)
                                       : SampleIndex(probs, rng);
}

// Forward values of one joint step, kept for the policy-gradient update.
struct SlotPass {
  std::vector<std::vector<double>> lower_in;
  std::vector<std::vector<double>> up_probs;
  std::vector<double> bs_in;
  std::vector<std::vector<double>> dn_probs;
  std::vector<std::vector<double>> upper_in;
  std::vector<std::vector<double>> act_probs;
  ChainSample sample;
};

SlotPass ForwardPass(const TrainedProtocol& protocol,
                     std::span<const int> buffers, SamplingMode mode,
                     Rng& rng) {
  const int n = protocol.env.num_ues;
  const int k = protocol.config.codebook_size;
  const int latent = protocol.config.latent_dim;
  Require(buffers.size() == static_cast<std::size_t>(n),
          "RunChain: joint state has " + std::to_string(buffers.size()) +
              " UEs, protocol expects " + std::to_string(n));

  SlotPass pass;
  pass.lower_in.resize(n);
  pass.up_probs.resize(n);
  pass.dn_probs.resize(n);
  pass.upper_in.resize(n);
  pass.act_probs.resize(n);
  pass.sample.uplinks.resize(n);
  pass.sample.downlinks.resize(n);
  pass.sample.actions.resize(n);
  std::vector<std::vector<double>> latents(n);

  pass.bs_in.assign(static_cast<std::size_t>(n) * k, 0.0);
  for (int j = 0; j < n; ++j) {
    Require(buffers[j] >= 0 && buffers[j] <= protocol.env.buffer_cap,
            "RunChain: buffer level out of range");
    pass.lower_in[j] = OneHot(buffers[j], protocol.env.NumStatesPerUe());
    const auto out = Forward(protocol.lower_nets[j], pass.lower_in[j]);
    latents[j].assign(out.begin(), out.begin() + latent);
    pass.up_probs[j] =
        Softmax(std::span<const double>(out).subspan(latent, k));
    const int up = Choose(pass.up_probs[j], mode, rng);
    pass.sample.uplinks[j] = up;
    pass.bs_in[j * k + up] = 1.0;
  }

  const auto bs_out = Forward(protocol.bs_net, pass.bs_in);
  for (int j = 0; j < n; ++j) {
    pass.dn_probs[j] =
        Softmax(std::span<const double>(bs_out).subspan(j * k, k));
    const int dn = Choose(pass.dn_probs[j], mode, rng);
    pass.sample.downlinks[j] = dn;

    auto& in = pass.upper_in[j];
    in = latents[j];
    in.resize(latent + k, 0.0);
    in[latent + dn] = 1.0;
    pass.act_probs[j] = Softmax(Forward(protocol.upper_nets[j], in));
    pass.sample.actions[j] =
        static_cast<UeAction>(Choose(pass.act_probs[j], mode, rng));
  }
  return pass;
}

// Score-function gradient at the logits for minimizing -advantage * log pi.
std::vector<double> ScoreUpstream(std::span<const double> probs, int chosen,
                                  double advantage) {
  std::vector<double> g(probs.begin(), probs.end());
  g[chosen] -= 1.0;
  for (double& v : g) v *= advantage;
  return g;
}

double Surprisal(double p) { return -std::log2(p); }

// Previous-window estimates used to shape the returns of the next window.
struct Shaping {
  EntropyReport report;
  // p(uplink | state) per UE, smoothed, indexed [ue][state][codeword].
  std::vector<std::vector<std::vector<double>>> up_given_state;
  std::vector<double> ib_bits;  // per UE
};

Shaping BuildShaping(std::span<const Trace> traces, const EnvConfig& env,
                     const TrainConfig& config) {
  Shaping shaping;
  shaping.report = EstimateEntropies(traces, config.codebook_size,
                                     config.entropy_pseudocount);
  const int n = env.num_ues;
  const int k = config.codebook_size;
  const int s = env.NumStatesPerUe();
  const double alpha = config.entropy_pseudocount;
  shaping.up_given_state.assign(
      n, std::vector<std::vector<double>>(s, std::vector<double>(k, alpha)));
  std::vector<std::vector<std::pair<int, int>>> pairs(n);
  for (const Trace& trace : traces) {
    for (const UeRecord& r : trace.records) {
      shaping.up_given_state[r.ue][r.state][r.uplink] += 1.0;
      pairs[r.ue].emplace_back(r.state, r.uplink);
    }
  }
  for (auto& per_ue : shaping.up_given_state) {
    for (auto& row : per_ue) {
      double total = 0.0;
      for (double v : row) total += v;
      for (double& v : row) v /= total;
    }
  }
  shaping.ib_bits.assign(n, 0.0);
  for (int j = 0; j < n; ++j) {
    if (!pairs[j].empty()) shaping.ib_bits[j] = MutualInformation(pairs[j]);
  }
  return shaping;
}

std::string FormatDouble(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

void TrainConfig::Validate() const {
  auto bad = [](const char* field, const std::string& why) {
    Fail(ErrorKind::kConfig, std::string("train.") + field + ": " + why);
  };
  if (codebook_size < 2) bad("codebook_size", "must be >= 2");
  if (episodes < 1) bad("episodes", "must be >= 1");
  if (!(lr > 0.0) || !std::isfinite(lr)) bad("lr", "must be positive");
  if (!(reg_weight >= 0.0) || !std::isfinite(reg_weight)) {
    bad("reg_weight", "must be nonnegative");
  }
  if (reg_sign != -1 && reg_sign != 0 && reg_sign != 1) {
    bad("reg_sign", "must be one of -1, 0, +1");
  }
  if (!(ib_beta >= 0.0) || !std::isfinite(ib_beta)) {
    bad("ib_beta", "must be nonnegative");
  }
  if (!(entropy_pseudocount > 0.0)) {
    bad("entropy_pseudocount", "must be positive");
  }
  if (eval_window < 1) bad("eval_window", "must be >= 1");
  if (hidden_width < 1) bad("hidden_width", "must be >= 1");
  if (latent_dim < 1) bad("latent_dim", "must be >= 1");
  if (!(discount >= 0.0 && discount <= 1.0)) {
    bad("discount", "must lie in [0, 1]");
  }
}

TrainedProtocol TrainedProtocol::Initialize(const EnvConfig& env,
                                            const TrainConfig& config) {
  env.Validate();
  config.Validate();
  TrainedProtocol p;
  p.env = env;
  p.config = config;
  Rng rng(DeriveSeed(config.seed, 0x1417));
  const int n = env.num_ues;
  const int k = config.codebook_size;
  const int h = config.hidden_width;
  const int s = env.NumStatesPerUe();
  const int latent = config.latent_dim;
  for (int j = 0; j < n; ++j) {
    const int lower_dims[] = {s, h, h, latent + k};
    p.lower_nets.push_back(Mlp::Random(lower_dims, rng));
  }
  for (int j = 0; j < n; ++j) {
    const int upper_dims[] = {latent + k, h, h, kNumUeActions};
    p.upper_nets.push_back(Mlp::Random(upper_dims, rng));
  }
  const int bs_dims[] = {n * k, h, h, n * k};
  p.bs_net = Mlp::Random(bs_dims, rng);
  const int critic_dims[] = {n * s, h, h, 1};
  p.critic = Mlp::Random(critic_dims, rng);
  return p;
}

void TrainedProtocol::Validate() const {
  env.Validate();
  config.Validate();
  const int n = env.num_ues;
  const int k = config.codebook_size;
  const int s = env.NumStatesPerUe();
  const int latent = config.latent_dim;
  Require(lower_nets.size() == static_cast<std::size_t>(n) &&
              upper_nets.size() == static_cast<std::size_t>(n),
          "TrainedProtocol: expected one lower and one upper net per UE");
  for (int j = 0; j < n; ++j) {
    const auto& lower = lower_nets[j];
    const auto& upper = upper_nets[j];
    Require(!lower.layers().empty() && lower.InputDim() == s &&
                lower.OutputDim() == latent + k,
            "TrainedProtocol: lower net " + std::to_string(j) +
                " has the wrong shape");
    Require(!upper.layers().empty() && upper.InputDim() == latent + k &&
                upper.OutputDim() == kNumUeActions,
            "TrainedProtocol: upper net " + std::to_string(j) +
                " has the wrong shape");
  }
  Require(!bs_net.layers().empty() && bs_net.InputDim() == n * k &&
              bs_net.OutputDim() == n * k,
          "TrainedProtocol: BS net has the wrong shape");
  Require(!critic.layers().empty() && critic.InputDim() == n * s &&
              critic.OutputDim() == 1,
          "TrainedProtocol: critic has the wrong shape");
}

std::size_t TrainedProtocol::ExecutionParameterCount() const {
  std::size_t count = bs_net.ParameterCount();
  for (const auto& net : lower_nets) count += net.ParameterCount();
  for (const auto& net : upper_nets) count += net.ParameterCount();
  return count;
}

std::size_t TrainedProtocol::ExecutionFlopsPerStep() const {
  std::size_t flops = ForwardFlops(bs_net);
  for (const auto& net : lower_nets) flops += ForwardFlops(net);
  for (const auto& net : upper_nets) flops += ForwardFlops(net);
  return flops;
}

ChainSample RunChain(const TrainedProtocol& protocol,
                     std::span<const int> buffers, SamplingMode mode,
                     Rng& rng) {
  return ForwardPass(protocol, buffers, mode, rng).sample;
}

std::vector<std::vector<double>> DownlinkProbabilities(
    const TrainedProtocol& protocol, std::span<const int> uplinks) {
  const int n = protocol.env.num_ues;
  const int k = protocol.config.codebook_size;
  Require(uplinks.size() == static_cast<std::size_t>(n),
          "downlink_probabilities: one uplink per UE required");
  std::vector<double> in(static_cast<std::size_t>(n) * k, 0.0);
  for (int j = 0; j < n; ++j) {
    Require(uplinks[j] >= 0 && uplinks[j] < k,
            "downlink_probabilities: codeword outside codebook");
    in[j * k + uplinks[j]] = 1.0;
  }
  const auto out = Forward(protocol.bs_net, in);
  std::vector<std::vector<double>> probs;
  for (int j = 0; j < n; ++j) {
    probs.push_back(Softmax(std::span<const double>(out).subspan(j * k, k)));
  }
  return probs;
}

std::vector<double> ActionProbabilities(const TrainedProtocol& protocol, int ue,
                                        int level, int downlink) {
  const int k = protocol.config.codebook_size;
  const int latent = protocol.config.latent_dim;
  Require(ue >= 0 && ue < protocol.env.num_ues,
          "action_probabilities: UE out of range");
  Require(level >= 0 && level <= protocol.env.buffer_cap,
          "action_probabilities: buffer level out of range");
  Require(downlink >= 0 && downlink < k,
          "action_probabilities: codeword outside codebook");
  const auto lower = Forward(protocol.lower_nets[ue],
                             OneHot(level, protocol.env.NumStatesPerUe()));
  std::vector<double> in(lower.begin(), lower.begin() + latent);
  in.resize(latent + k, 0.0);
  in[latent + downlink] = 1.0;
  return Softmax(Forward(protocol.upper_nets[ue], in));
}

Trace RolloutEpisode(const TrainedProtocol& protocol, MacEnv& env, Rng& rng,
                     SamplingMode mode) {
  Require(env.config().num_ues == protocol.env.num_ues &&
              env.config().buffer_cap == protocol.env.buffer_cap,
          "rollout_episode: environment and protocol disagree on UE count "
          "or buffer capacity");
  Trace trace;
  trace.num_ues = env.config().num_ues;
  EnvState state = env.Reset();
  for (int t = 0; t < env.config().episode_len; ++t) {
    const ChainSample chain = RunChain(protocol, state.buffers, mode, rng);
    auto [next, outcome] = env.Step(state, chain.actions);
    for (int j = 0; j < trace.num_ues; ++j) {
      trace.records.push_back({t, j, state.buffers[j], chain.uplinks[j],
                               chain.downlinks[j], chain.actions[j],
                               outcome.rewards[j]});
      trace.episode_return += outcome.rewards[j];
    }
    trace.collisions += outcome.collision;
    trace.successes += outcome.success_ue.has_value();
    state = std::move(next);
  }
  return trace;
}

EntropyReport EstimateEntropies(std::span<const Trace> traces,
                                int codebook_size, double alpha) {
  Require(!traces.empty(), "estimate_entropies: no traces");
  Require(codebook_size >= 1, "estimate_entropies: empty codebook");
  const int n = traces.front().num_ues;
  std::vector<std::vector<double>> up(n, std::vector<double>(codebook_size));
  std::vector<std::vector<double>> dn(n, std::vector<double>(codebook_size));
  std::vector<std::map<int, std::vector<double>>> act(n);
  for (const Trace& trace : traces) {
    Require(trace.num_ues == n, "estimate_entropies: mixed UE counts");
    for (const UeRecord& r : trace.records) {
      Require(r.uplink >= 0 && r.uplink < codebook_size &&
                  r.downlink >= 0 && r.downlink < codebook_size,
              "estimate_entropies: codeword outside codebook");
      up[r.ue][r.uplink] += 1.0;
      dn[r.ue][r.downlink] += 1.0;
      auto& counts = act[r.ue][r.state];
      if (counts.empty()) counts.assign(kNumUeActions, 0.0);
      counts[static_cast<int>(r.action)] += 1.0;
    }
  }

  auto normalized = [alpha](std::vector<double> counts) {
    double total = 0.0;
    for (double& c : counts) total += (c += alpha);
    if (total > 0.0) {
      for (double& c : counts) c /= total;
    }
    return counts;
  };

  EntropyReport report;
  report.action_given_state_bits.resize(n);
  report.action_probs.resize(n);
  for (int j = 0; j < n; ++j) {
    report.uplink_bits.push_back(SmoothedEntropy(up[j], alpha));
    report.downlink_bits.push_back(SmoothedEntropy(dn[j], alpha));
    report.uplink_probs.push_back(normalized(up[j]));
    report.downlink_probs.push_back(normalized(dn[j]));
    double u = 0.0;
    for (const auto& [state, counts] : act[j]) {
      const double h = SmoothedEntropy(counts, alpha);
      report.action_given_state_bits[j][state] = h;
      report.action_probs[j][state] = normalized(counts);
      u += h;
    }
    report.u_bits.push_back(u);
  }
  return report;
}

int PartnerUe(int ue, int num_ues) { return (ue + 1) % num_ues; }

double EcTerm(double h_u, double h_m_up) { return std::max(h_u, h_m_up); }

double RegularizerEc(const EntropyReport& report) {
  const int n = static_cast<int>(report.u_bits.size());
  Require(n >= 1 && report.uplink_bits.size() == report.u_bits.size(),
          "regularizer_ec: incomplete entropy report");
  double total = 0.0;
  for (int j = 0; j < n; ++j) {
    total += EcTerm(report.u_bits[j], report.uplink_bits[PartnerUe(j, n)]);
  }
  return total;
}

int CountActive(std::span<const double> frequencies, double epsilon) {
  return static_cast<int>(std::count_if(
      frequencies.begin(), frequencies.end(),
      [epsilon](double f) { return f >= epsilon; }));
}

ActiveCodewords CodewordSparsity(std::span<const Trace> traces,
                                 int codebook_size, double epsilon) {
  Require(!traces.empty(), "codeword_sparsity: no traces");
  Require(epsilon > 0.0 && epsilon < 1.0,
          "codeword_sparsity: epsilon must lie in (0, 1)");
  const int n = traces.front().num_ues;
  std::vector<std::vector<double>> up(n, std::vector<double>(codebook_size));
  std::vector<std::vector<double>> dn(n, std::vector<double>(codebook_size));
  std::vector<double> totals(n, 0.0);
  for (const Trace& trace : traces) {
    for (const UeRecord& r : trace.records) {
      up[r.ue][r.uplink] += 1.0;
      dn[r.ue][r.downlink] += 1.0;
      totals[r.ue] += 1.0;
    }
  }
  ActiveCodewords active;
  for (int j = 0; j < n; ++j) {
    for (int c = 0; c < codebook_size; ++c) {
      up[j][c] /= std::max(totals[j], 1.0);
      dn[j][c] /= std::max(totals[j], 1.0);
    }
    active.uplink.push_back(CountActive(up[j], epsilon));
    active.downlink.push_back(CountActive(dn[j], epsilon));
  }
  return active;
}

double IbTerm(std::span<const Trace> traces) {
  Require(!traces.empty(), "ib_term: no traces");
  const int n = traces.front().num_ues;
  std::vector<std::vector<std::pair<int, int>>> pairs(n);
  for (const Trace& trace : traces) {
    for (const UeRecord& r : trace.records) {
      pairs[r.ue].emplace_back(r.state, r.uplink);
    }
  }
  double total = 0.0;
  for (const auto& p : pairs) {
    if (!p.empty()) total += MutualInformation(p);
  }
  return total / n;
}

TrainResult Train(const EnvConfig& env, const TrainConfig& config) {
  env.Validate();
  config.Validate();
  TrainResult result;
  TrainedProtocol& protocol = result.protocol;
  protocol = TrainedProtocol::Initialize(env, config);

  const int n = env.num_ues;
  const int k = config.codebook_size;
  const int latent = config.latent_dim;
  const int states_per_ue = env.NumStatesPerUe();
  const double reg_coef = -config.reg_sign * config.reg_weight;
  Rng rng(DeriveSeed(config.seed, 0x7a11));

  std::vector<Trace> window;
  std::optional<Shaping> shaping;
  int window_index = 0;

  for (int episode = 0; episode < config.episodes; ++episode) {
    EnvConfig episode_env = env;
    episode_env.seed = DeriveSeed(env.seed, static_cast<std::uint64_t>(episode));
    MacEnv mac(episode_env);
    EnvState state = mac.Reset();

    std::vector<SlotPass> passes;
    std::vector<EnvState> states;
    std::vector<double> team_rewards;
    Trace trace;
    trace.num_ues = n;
    for (int t = 0; t < env.episode_len; ++t) {
      SlotPass pass =
          ForwardPass(protocol, state.buffers, SamplingMode::kStochastic, rng);
      auto [next, outcome] = mac.Step(state, pass.sample.actions);
      double team = 0.0;
      for (int j = 0; j < n; ++j) {
        trace.records.push_back({t, j, state.buffers[j],
                                 pass.sample.uplinks[j],
                                 pass.sample.downlinks[j],
                                 pass.sample.actions[j], outcome.rewards[j]});
        team += outcome.rewards[j];
      }
      trace.episode_return += team;
      trace.collisions += outcome.collision;
      trace.successes += outcome.success_ue.has_value();
      states.push_back(state);
      passes.push_back(std::move(pass));
      team_rewards.push_back(team);
      state = std::move(next);
    }

    std::vector<double> returns(team_rewards.size());
    double running = 0.0;
    for (std::size_t t = team_rewards.size(); t-- > 0;) {
      running = team_rewards[t] + config.discount * running;
      returns[t] = running;
    }

    std::vector<Gradients> lower_grads;
    std::vector<Gradients> upper_grads;
    for (int j = 0; j < n; ++j) {
      lower_grads.push_back(Gradients::ZerosLike(protocol.lower_nets[j]));
      upper_grads.push_back(Gradients::ZerosLike(protocol.upper_nets[j]));
    }
    Gradients bs_grads = Gradients::ZerosLike(protocol.bs_net);
    Gradients critic_grads = Gradients::ZerosLike(protocol.critic);

    for (std::size_t t = 0; t < passes.size(); ++t) {
      const SlotPass& pass = passes[t];
      const auto& buffers = states[t].buffers;
      const auto critic_in = JointOneHot(buffers, states_per_ue);
      const double value = Forward(protocol.critic, critic_in)[0];
      const double advantage = returns[t] - value;
      const double critic_upstream[] = {value - returns[t]};
      critic_grads += Backward(protocol.critic, critic_in, critic_upstream);

      // Shaping terms: chain[j] applies to the message draws on UE j's
      // state -> action path, uplink[j] only to UE j's uplink draw.
      std::vector<double> chain(n, 0.0);
      std::vector<double> uplink(n, 0.0);
      if (shaping && reg_coef != 0.0) {
        const EntropyReport& rep = shaping->report;
        for (int j = 0; j < n; ++j) {
          const int partner = PartnerUe(j, n);
          const double h_u = rep.u_bits[j];
          const double h_m = rep.uplink_bits[partner];
          if (h_u >= h_m) {
            const auto it = rep.action_probs[j].find(buffers[j]);
            if (it != rep.action_probs[j].end()) {
              const int a = static_cast<int>(pass.sample.actions[j]);
              chain[j] += reg_coef *
                          (Surprisal(it->second[a]) -
                           rep.action_given_state_bits[j].at(buffers[j]));
            }
          } else {
            const int m = pass.sample.uplinks[partner];
            uplink[partner] +=
                reg_coef * (Surprisal(rep.uplink_probs[partner][m]) - h_m);
          }
        }
      }
      if (shaping && config.ib_beta > 0.0) {
        for (int j = 0; j < n; ++j) {
          const int m = pass.sample.uplinks[j];
          const double pointwise =
              std::log2(shaping->up_given_state[j][buffers[j]][m]) -
              std::log2(shaping->report.uplink_probs[j][m]);
          uplink[j] -= config.ib_beta * (pointwise - shaping->ib_bits[j]);
        }
      }

      std::vector<double> bs_upstream(static_cast<std::size_t>(n) * k, 0.0);
      for (int j = 0; j < n; ++j) {
        const double a_chain = advantage + chain[j];
        const auto action_up =
            ScoreUpstream(pass.act_probs[j],
                          static_cast<int>(pass.sample.actions[j]), advantage);
        Gradients upper = Backward(protocol.upper_nets[j], pass.upper_in[j],
                                   action_up);

        const auto dn_up =
            ScoreUpstream(pass.dn_probs[j], pass.sample.downlinks[j], a_chain);
        std::copy(dn_up.begin(), dn_up.end(), bs_upstream.begin() + j * k);

        std::vector<double> lower_up(latent + k, 0.0);
        std::copy(upper.input.begin(), upper.input.begin() + latent,
                  lower_up.begin());
        const auto up_score = ScoreUpstream(
            pass.up_probs[j], pass.sample.uplinks[j], a_chain + uplink[j]);
        std::copy(up_score.begin(), up_score.end(), lower_up.begin() + latent);
        lower_grads[j] +=
            Backward(protocol.lower_nets[j], pass.lower_in[j], lower_up);
        upper_grads[j] += upper;
      }
      bs_grads += Backward(protocol.bs_net, pass.bs_in, bs_upstream);
    }

    try {
      for (int j = 0; j < n; ++j) {
        protocol.lower_nets[j] = SgdStep(std::move(protocol.lower_nets[j]),
                                         lower_grads[j], config.lr);
        protocol.upper_nets[j] = SgdStep(std::move(protocol.upper_nets[j]),
                                         upper_grads[j], config.lr);
      }
      protocol.bs_net = SgdStep(std::move(protocol.bs_net), bs_grads, config.lr);
      protocol.critic =
          SgdStep(std::move(protocol.critic), critic_grads, config.lr);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kNumeric) throw;
      Fail(ErrorKind::kNumeric, "train: divergence at episode " +
                                    std::to_string(episode) + " (" +
                                    e.what() + ")");
    }

    window.push_back(std::move(trace));
    const bool window_done = static_cast<int>(window.size()) ==
                                 config.eval_window ||
                             episode + 1 == config.episodes;
    if (!window_done) continue;

    shaping = BuildShaping(window, env, config);
    const EntropyReport& rep = shaping->report;
    const ActiveCodewords active =
        CodewordSparsity(window, k, kDefaultActiveEpsilon);
    CurveRow row;
    row.window = window_index++;
    row.episode_end = episode + 1;
    for (const Trace& tr : window) row.mean_reward += tr.episode_return;
    row.mean_reward /= static_cast<double>(window.size());
    row.h_up = rep.uplink_bits;
    row.h_u = rep.u_bits;
    row.active_up = active.uplink;
    row.active_dn = active.downlink;
    row.l_ec = RegularizerEc(rep);
    row.i_zs = IbTerm(window);
    row.objective = row.mean_reward +
                    reg_coef * row.l_ec - config.ib_beta * row.i_zs;
    if (!std::isfinite(row.objective)) {
      Fail(ErrorKind::kNumeric, "train: non-finite objective at episode " +
                                    std::to_string(episode));
    }
    result.curves.push_back(std::move(row));
    window.clear();
  }
  return result;
}

std::string CurvesCsv(std::span<const CurveRow> rows, int num_ues) {
  std::ostringstream out;
  out << "episode_window,episode_end,mean_reward";
  for (int j = 1; j <= num_ues; ++j) out << ",H_m" << j << "_up";
  for (int j = 1; j <= num_ues; ++j) out << ",H_U" << j;
  for (int j = 1; j <= num_ues; ++j) out << ",active_up_ue" << j;
  for (int j = 1; j <= num_ues; ++j) out << ",active_dn_ue" << j;
  out << ",L_EC,I_ZS,objective\n";
  for (const CurveRow& row : rows) {
    out << row.window << ',' << row.episode_end << ','
        << FormatDouble(row.mean_reward);
    for (double h : row.h_up) out << ',' << FormatDouble(h);
    for (double h : row.h_u) out << ',' << FormatDouble(h);
    for (int a : row.active_up) out << ',' << a;
    for (int a : row.active_dn) out << ',' << a;
    out << ',' << FormatDouble(row.l_ec) << ',' << FormatDouble(row.i_zs)
        << ',' << FormatDouble(row.objective) << '\n';
  }
  return out.str();
}

}  // namespace maclab
