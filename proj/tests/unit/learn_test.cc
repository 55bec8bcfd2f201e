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

#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "maclab/error.h"
#include "maclab/protocol_learn.h"

namespace maclab {
namespace {

TrainConfig SmallConfig() {
  TrainConfig t;
  t.episodes = 40;
  t.eval_window = 10;
  t.hidden_width = 8;
  return t;
}

std::vector<Trace> Rollouts(const TrainedProtocol& p, const EnvConfig& env, int n,
                            std::uint64_t seed) {
  std::vector<Trace> out;
  MacEnv mac(env);
  Rng rng(seed);
  for (int i = 0; i < n; ++i) out.push_back(RolloutEpisode(p, mac, rng));
  return out;
}

Trace SyntheticTrace(const std::vector<std::pair<int, int>>& state_uplink) {
  Trace t;
  t.num_ues = 1;
  int slot = 0;
  for (auto [s, m] : state_uplink) {
    UeRecord r;
    r.slot = slot++;
    r.state = s;
    r.uplink = m;
    t.records.push_back(r);
  }
  return t;
}

TEST_CASE("train config validation") {
  TrainConfig t;
  t.codebook_size = 1;
  CHECK_THROWS_AS(t.Validate(), Error);
  t = TrainConfig{};
  t.eval_window = 0;
  CHECK_THROWS_AS(t.Validate(), Error);
  t = TrainConfig{};
  t.reg_sign = 2;
  CHECK_THROWS_AS(t.Validate(), Error);
}

TEST_CASE("rollout shape and determinism") {
  const EnvConfig env;
  const TrainedProtocol p = TrainedProtocol::Initialize(env, SmallConfig());
  const auto a = Rollouts(p, env, 3, 5);
  const auto b = Rollouts(p, env, 3, 5);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].records.size() == 40);
    CHECK(a[i].episode_return == b[i].episode_return);
    for (std::size_t k = 0; k < a[i].records.size(); ++k) {
      const UeRecord& r = a[i].records[k];
      CHECK((r.uplink >= 0 && r.uplink < 8));
      CHECK((r.downlink >= 0 && r.downlink < 8));
      CHECK(r.action == b[i].records[k].action);
      CHECK(r.uplink == b[i].records[k].uplink);
    }
  }
}

TEST_CASE("config mismatch between protocol and environment") {
  const EnvConfig env;
  const TrainedProtocol p = TrainedProtocol::Initialize(env, SmallConfig());
  EnvConfig three = env;
  three.num_ues = 3;
  MacEnv mac(three);
  Rng rng(1);
  CHECK_THROWS_AS(RolloutEpisode(p, mac, rng), Error);
}

TEST_CASE("sampling distributions are normalized") {
  const EnvConfig env;
  const TrainedProtocol p = TrainedProtocol::Initialize(env, SmallConfig());
  for (int a = 0; a < 8; ++a) {
    for (int b = 0; b < 8; ++b) {
      const std::vector<int> up = {a, b};
      for (const auto& d : DownlinkProbabilities(p, up)) {
        CHECK(std::abs(std::accumulate(d.begin(), d.end(), 0.0) - 1.0) < 1e-9);
      }
    }
  }
  for (int ue = 0; ue < 2; ++ue)
    for (int s = 0; s < 3; ++s)
      for (int d = 0; d < 8; ++d) {
        const auto q = ActionProbabilities(p, ue, s, d);
        CHECK(std::abs(std::accumulate(q.begin(), q.end(), 0.0) - 1.0) < 1e-9);
      }
}

TEST_CASE("entropy estimates stay in range") {
  const EnvConfig env;
  const TrainedProtocol p = TrainedProtocol::Initialize(env, SmallConfig());
  const auto traces = Rollouts(p, env, 20, 8);
  for (double alpha : {1e-9, 1.0, 5.0}) {
    const EntropyReport r = EstimateEntropies(traces, 8, alpha);
    for (int j = 0; j < 2; ++j) {
      CHECK((r.uplink_bits[j] >= 0 && r.uplink_bits[j] <= 3 + 1e-12));
      CHECK((r.downlink_bits[j] >= 0 && r.downlink_bits[j] <= 3 + 1e-12));
      double total = 0.0;
      for (auto [s, h] : r.action_given_state_bits[j]) {
        CHECK((h >= 0 && h <= std::log2(3.0) + 1e-12));
        total += h;
      }
      CHECK(r.u_bits[j] == doctest::Approx(total));
    }
  }
  CHECK_THROWS_AS(EstimateEntropies(std::vector<Trace>{}, 8, 1.0), Error);
}

TEST_CASE("regularizer hinge") {
  CHECK(EcTerm(0.9, 1.4) == 1.4);
  CHECK(EcTerm(2.0, 1.0) == 2.0);
  Rng rng(17);
  for (int i = 0; i < 100; ++i) {
    const double u = 3 * Uniform01(rng), m = 3 * Uniform01(rng);
    CHECK(EcTerm(u, m) == doctest::Approx(std::max(0.0, u - m) + m).epsilon(1e-15));
  }
  CHECK(PartnerUe(0, 2) == 1);
  CHECK(PartnerUe(1, 2) == 0);
  EntropyReport r;
  r.u_bits = {0.9, 2.0};
  r.uplink_bits = {1.0, 1.4};
  CHECK(RegularizerEc(r) == doctest::Approx(1.4 + 2.0));
}

TEST_CASE("active codeword counting") {
  CHECK(CountActive(std::vector<double>{0.5, 0.5, 0, 0, 0, 0, 0, 0}, 0.01) == 2);
  CHECK(CountActive(std::vector<double>(8, 0.125), 0.01) == 8);
}

TEST_CASE("information bottleneck estimate") {
  std::vector<std::pair<int, int>> det, indep;
  Rng rng(4);
  for (int i = 0; i < 3000; ++i) det.push_back({i % 3, (i % 3) * 2});
  for (int i = 0; i < 10000; ++i) {
    indep.push_back({static_cast<int>(rng() % 3), static_cast<int>(rng() % 8)});
  }
  const std::vector<Trace> d = {SyntheticTrace(det)};
  const std::vector<Trace> u = {SyntheticTrace(indep)};
  CHECK(IbTerm(d) == doctest::Approx(std::log2(3.0)).epsilon(1e-12));
  CHECK(IbTerm(u) < 0.05);
}

TEST_CASE("training is deterministic and reports curves") {
  const EnvConfig env;
  const TrainConfig t = SmallConfig();
  const TrainResult a = Train(env, t);
  const TrainResult b = Train(env, t);
  REQUIRE(a.curves.size() == 4);
  CHECK(CurvesCsv(a.curves, 2) == CurvesCsv(b.curves, 2));
  CHECK(a.protocol.lower_nets == b.protocol.lower_nets);
  for (const CurveRow& row : a.curves) {
    for (double h : row.h_up) CHECK((h >= 0 && h <= 3 + 1e-12));
    for (int k : row.active_up) CHECK((k >= 1 && k <= 8));
  }
}

TEST_CASE("without regularizers the sign is irrelevant") {
  const EnvConfig env;
  TrainConfig t = SmallConfig();
  t.reg_weight = 0.0;
  t.ib_beta = 0.0;
  t.reg_sign = 1;
  const TrainResult pos = Train(env, t);
  t.reg_sign = -1;
  const TrainResult neg = Train(env, t);
  t.reg_sign = 0;
  const TrainResult off = Train(env, t);
  CHECK(CurvesCsv(pos.curves, 2) == CurvesCsv(neg.curves, 2));
  CHECK(CurvesCsv(pos.curves, 2) == CurvesCsv(off.curves, 2));
}

TEST_CASE("divergence raises a numeric error naming the episode") {
  const EnvConfig env;
  TrainConfig t = SmallConfig();
  t.lr = 1e12;
  try {
    Train(env, t);
    FAIL("expected divergence");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kNumeric);
    CHECK(std::string(e.what()).find("episode") != std::string::npos);
  }
}

}  // namespace
}  // namespace maclab
