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

#ifndef MACLAB_PROTOCOL_LEARN_H_
#define MACLAB_PROTOCOL_LEARN_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "maclab/mac_env.h"
#include "maclab/mlp.h"
#include "maclab/random.h"

namespace maclab {

struct TrainConfig {
  int codebook_size = 8;
  int episodes = 3000;
  double lr = 3e-3;
  double reg_weight = 0.5;
  int reg_sign = 1;  // +1 minimizes L_EC, -1 maximizes it, 0 disables
  double ib_beta = 0.0;
  double entropy_pseudocount = 1.0;
  int eval_window = 100;
  std::uint64_t seed = 1;
  int hidden_width = 64;
  int latent_dim = 4;
  double discount = 0.9;

  void Validate() const;
};

// Split actors per UE, a shared BS message hub and a centralized critic.
//   lower_j : one-hot(s_j)               -> [z_j (latent_dim), uplink logits (K)]
//   bs      : concat_j one-hot(m^up_j)    -> concat_j downlink logits (K each)
//   upper_j : [z_j, one-hot(m^dn_j)]      -> action logits (3)
//   critic  : concat_j one-hot(s_j)       -> value
struct TrainedProtocol {
  EnvConfig env;
  TrainConfig config;
  std::vector<Mlp> lower_nets;
  std::vector<Mlp> upper_nets;
  Mlp bs_net;
  Mlp critic;

  // Random initialization drawn from config.seed.
  static TrainedProtocol Initialize(const EnvConfig& env,
                                    const TrainConfig& config);
  // Throws ErrorKind::kContract when net shapes disagree with the configs.
  void Validate() const;

  // Parameters used at execution time (actors + BS; the critic is a
  // training-only component).
  std::size_t ExecutionParameterCount() const;
  // Forward FLOPs for one joint step of all execution networks.
  std::size_t ExecutionFlopsPerStep() const;
};

enum class SamplingMode { kStochastic, kArgmax };

struct ChainSample {
  std::vector<int> uplinks;
  std::vector<int> downlinks;
  std::vector<UeAction> actions;
};

// One pass state -> uplink -> BS -> downlink -> action for every UE.
// The rng is untouched in argmax mode.
ChainSample RunChain(const TrainedProtocol& protocol,
                     std::span<const int> buffers, SamplingMode mode,
                     Rng& rng);

// Per-UE downlink distributions for a fixed vector of uplink codewords.
std::vector<std::vector<double>> DownlinkProbabilities(
    const TrainedProtocol& protocol, std::span<const int> uplinks);

// Action distribution of `ue` at buffer `level` after receiving `downlink`.
std::vector<double> ActionProbabilities(const TrainedProtocol& protocol, int ue,
                                        int level, int downlink);

struct UeRecord {
  int slot = 0;
  int ue = 0;
  int state = 0;
  int uplink = 0;
  int downlink = 0;
  UeAction action = UeAction::kSilence;
  double reward = 0.0;
};

struct Trace {
  int num_ues = 0;
  std::vector<UeRecord> records;  // slot-major, then UE
  double episode_return = 0.0;    // summed over UEs and slots
  int collisions = 0;
  int successes = 0;
};

// Resets `env` and plays one episode.
Trace RolloutEpisode(const TrainedProtocol& protocol, MacEnv& env, Rng& rng,
                     SamplingMode mode = SamplingMode::kStochastic);

// Window-level entropy estimates, all in bits, with symmetric Dirichlet
// pseudo-count smoothing alpha on every frequency table.
struct EntropyReport {
  std::vector<double> uplink_bits;    // H(m^up_j)
  std::vector<double> downlink_bits;  // H(m^dn_j)
  std::vector<std::map<int, double>> action_given_state_bits;  // H(a_j|s_j=i)
  std::vector<double> u_bits;  // H(U_j) = sum_i H(a_j | s_j = i)

  // Smoothed frequency tables behind the estimates.
  std::vector<std::vector<double>> uplink_probs;
  std::vector<std::vector<double>> downlink_probs;
  std::vector<std::map<int, std::vector<double>>> action_probs;
};

EntropyReport EstimateEntropies(std::span<const Trace> traces,
                                int codebook_size, double alpha);

// UE whose uplink entropy is paired with H(U_j) in the regularizer: the
// other UE of a pair, (j + 1) mod n in general.
int PartnerUe(int ue, int num_ues);

// max(H(U), H(m^up)); equals max(0, H(U) - H(m^up)) + H(m^up).
double EcTerm(double h_u, double h_m_up);

// L_EC summed over UEs j of EcTerm(H(U_j), H(m^up_partner(j))).
double RegularizerEc(const EntropyReport& report);

// Number of entries with frequency >= epsilon.
int CountActive(std::span<const double> frequencies, double epsilon);

struct ActiveCodewords {
  std::vector<int> uplink;    // per UE
  std::vector<int> downlink;  // per UE
};

ActiveCodewords CodewordSparsity(std::span<const Trace> traces,
                                 int codebook_size, double epsilon);

// Plug-in I(Z;S) in bits between UE state and uplink codeword, averaged
// over UEs.
double IbTerm(std::span<const Trace> traces);

struct CurveRow {
  int window = 0;
  int episode_end = 0;
  double mean_reward = 0.0;
  std::vector<double> h_up;
  std::vector<double> h_u;
  std::vector<int> active_up;
  std::vector<int> active_dn;
  double l_ec = 0.0;
  double i_zs = 0.0;
  double objective = 0.0;
};

struct TrainResult {
  TrainedProtocol protocol;
  std::vector<CurveRow> curves;
};

inline constexpr double kDefaultActiveEpsilon = 0.01;

// Policy-gradient training with the critic as baseline. The regularizer and
// IB terms enter as per-decision return shaping computed from the previous
// window's entropy estimates.
TrainResult Train(const EnvConfig& env, const TrainConfig& config);

std::string CurvesCsv(std::span<const CurveRow> rows, int num_ues);

}  // namespace maclab

#endif  // MACLAB_PROTOCOL_LEARN_H_
