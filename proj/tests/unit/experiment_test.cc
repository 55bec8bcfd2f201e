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

#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "maclab/error.h"
#include "maclab/experiment.h"

namespace maclab {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;

ErrorKind KindOf(const std::string& text) {
  try {
    ParseExperimentConfig(text);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::kContract;
}

fs::path FreshDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("maclab_unit_" + name);
  fs::remove_all(dir);
  return dir;
}

TEST_CASE("config parsing is strict") {
  const ExperimentConfig d = ParseExperimentConfig("{}");
  CHECK(d.seeds.size() == 5);
  CHECK(d.train.codebook_size == 8);

  const ExperimentConfig c = ParseExperimentConfig(
      R"({"env": {"arrival_prob": 0.3}, "train": {"episodes": 10}, "seeds": [4]})");
  CHECK(c.env.arrival_prob == 0.3);
  CHECK(c.train.episodes == 10);
  CHECK(c.seeds == std::vector<std::uint64_t>{4});

  CHECK(KindOf(R"({"env": {"arrival": 0.3}})") == ErrorKind::kConfig);
  CHECK(KindOf(R"({"train": {"episodes": "many"}})") == ErrorKind::kConfig);
  CHECK(KindOf(R"({"bogus": 1})") == ErrorKind::kConfig);
  CHECK(KindOf(R"({"env": {"num_ues": 0}})") == ErrorKind::kConfig);
  CHECK(KindOf(R"({"extract": {"tv_threshold": 1.0}})") == ErrorKind::kConfig);
  CHECK(KindOf("{not json") == ErrorKind::kConfig);
  CHECK_THROWS_AS(LoadExperimentConfig("/nonexistent/config.json"), Error);
}

TEST_CASE("config hash follows the canonical form") {
  const ExperimentConfig a = ParseExperimentConfig(R"({"seeds": [1, 2]})");
  const ExperimentConfig b = ParseExperimentConfig(ExperimentConfigJson(a));
  CHECK(ConfigHash(a) == ConfigHash(b));
  CHECK(ConfigHash(a).size() == 16);
  ExperimentConfig c = a;
  c.train.lr = 0.5;
  CHECK(ConfigHash(c) != ConfigHash(a));
}

TEST_CASE("arms") {
  CHECK(ArmSign(Arm::kPos) == 1);
  CHECK(ArmSign(Arm::kNeg) == -1);
  CHECK(ArmSign(Arm::kOff) == 0);
  CHECK(ArmFromName("neg") == Arm::kNeg);
  CHECK_FALSE(ArmFromName("plus").has_value());
  const auto [env, train] = RunConfigs(ExperimentConfig{}, Arm::kNeg, 9);
  CHECK(env.seed == 9);
  CHECK(train.seed == 9);
  CHECK(train.reg_sign == -1);
  CHECK(RunDir("runs", Arm::kOff, 3) == fs::path("runs/off/seed_3"));
}

TEST_CASE("trained protocol file round trip") {
  TrainConfig t;
  t.hidden_width = 6;
  const TrainedProtocol p = TrainedProtocol::Initialize(EnvConfig{}, t);
  const std::string text = TrainedProtocolJson(p);
  const TrainedProtocol q = ParseTrainedProtocol(text);
  CHECK(TrainedProtocolJson(q) == text);
  CHECK(q.bs_net == p.bs_net);
  CHECK_THROWS_AS(ParseTrainedProtocol("{}"), Error);
}

TEST_CASE("causality boost verdicts") {
  const BoostVerdict simple = CausalityBoost(0.9, std::nullopt, 0.4, std::nullopt);
  CHECK(simple.ordering);
  CHECK(simple.pass);
  const BoostVerdict strict = CausalityBoost(9.0, 8.0, 7.0, 5.0);
  CHECK(strict.pass);
  CHECK(*strict.required == doctest::Approx(0.5));
  CHECK_FALSE(CausalityBoost(9.0, 8.0, 8.9, 5.0).pass);  // margin 0.1 < 0.5
  CHECK_FALSE(CausalityBoost(9.0, 9.5, 7.0, 5.0).pass);  // off above pos
}

TEST_CASE("curve helpers") {
  CHECK(BaselineRange({{1, 5, 9}, {3, 7, 11}}) == doctest::Approx(8.0));
  CHECK(BaselineRange({{1, 5, 9}, {3, 7}}) == doctest::Approx(4.0));
  CurveRow row;
  row.h_up = {1.0, 2.0};
  row.h_u = {1.5, 1.2};
  CHECK(InequalityMargin(row) == doctest::Approx(-0.2));

  const std::vector<double> rewards = {1, 2, 3, 4};
  const double r = RandomSelectionReward(rewards, 5, 3);
  CHECK(r == RandomSelectionReward(rewards, 5, 3));
  CHECK((r >= 1.0 && r <= 4.0));
}

TEST_CASE("curves csv parses back") {
  EnvConfig env;
  TrainConfig t;
  t.episodes = 20;
  t.eval_window = 10;
  t.hidden_width = 6;
  const TrainResult res = Train(env, t);
  const std::string csv = CurvesCsv(res.curves, 2);
  const auto rows = ParseCurves(csv, 2);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].mean_reward == doctest::Approx(res.curves[1].mean_reward));
  CHECK(ParseFinalCurveRow(csv, 2).episode_end == 20);
}

TEST_CASE("report on an empty directory lists expected files") {
  const fs::path dir = FreshDir("empty");
  try {
    BuildReport(dir, ExperimentConfig{});
    FAIL("expected a missing-artifact error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kMissingArtifact);
    const std::string msg = e.what();
    CHECK(msg.find("protocol.json") != std::string::npos);
    CHECK(msg.find("curves.csv") != std::string::npos);
  }
  CHECK_THROWS_AS(ReadFile(dir / "nothing.txt"), Error);
}

TEST_CASE("report leaves absent metrics null") {
  const fs::path dir = FreshDir("partial");
  ExperimentConfig cfg;
  cfg.train.episodes = 20;
  cfg.train.eval_window = 10;
  cfg.train.hidden_width = 6;
  cfg.seeds = {1};
  const auto [env, train] = RunConfigs(cfg, Arm::kPos, 1);
  const TrainResult res = Train(env, train);
  const fs::path run = RunDir(dir, Arm::kPos, 1);
  WriteFile(run / files::kProtocol, TrainedProtocolJson(res.protocol));
  WriteFile(run / files::kCurves, CurvesCsv(res.curves, 2));

  const Json report = Json::parse(BuildReport(dir, cfg));
  CHECK(report["arms"]["neg"]["mean_final_reward"].is_null());
  CHECK(report["arms"]["pos"]["mean_final_reward"].is_number());
  CHECK(report["causality_boost"]["status"].is_null());
  CHECK(report["fidelity"]["status"].is_null());
  CHECK(report["missing"].size() > 0);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace maclab
