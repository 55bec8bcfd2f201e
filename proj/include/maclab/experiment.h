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

#ifndef MACLAB_EXPERIMENT_H_
#define MACLAB_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "maclab/mac_env.h"
#include "maclab/protocol_learn.h"
#include "maclab/symbolic_extract.h"
#include "maclab/symbolic_protocol.h"
#include "maclab/symbolic_runtime.h"

namespace maclab {

inline constexpr std::string_view kVersion = "maclab 0.1.0";

struct ExtractConfig {
  int rollouts = kDefaultRollouts;
  double tv_threshold = kDefaultTvThreshold;
  double active_epsilon = kDefaultActiveEpsilon;

  void Validate() const;
};

struct ExperimentConfig {
  EnvConfig env;
  TrainConfig train;
  ExtractConfig extract;
  std::string output_dir = "runs";
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};

  void Validate() const;
};

// Strict JSON: every section optional, unknown keys and wrong types raise
// kConfig.
ExperimentConfig ParseExperimentConfig(std::string_view json_text);
ExperimentConfig LoadExperimentConfig(const std::filesystem::path& path);
// Canonical JSON dump (sorted keys).
std::string ExperimentConfigJson(const ExperimentConfig& config);
// 64-bit FNV-1a over the canonical dump, as 16 hex digits.
std::string ConfigHash(const ExperimentConfig& config);

enum class Arm { kPos, kNeg, kOff };
inline constexpr Arm kAllArms[] = {Arm::kPos, Arm::kOff, Arm::kNeg};
std::string_view ArmName(Arm arm);
std::optional<Arm> ArmFromName(std::string_view name);
int ArmSign(Arm arm);

// Env and train seeds both set from the run seed, regularizer sign from the
// arm.
std::pair<EnvConfig, TrainConfig> RunConfigs(const ExperimentConfig& config,
                                             Arm arm, std::uint64_t seed);

std::string TrainedProtocolJson(const TrainedProtocol& protocol);
TrainedProtocol ParseTrainedProtocol(std::string_view json_text);

struct Extraction {
  SymbolicProtocol full;     // identity clusters, no grant-free collapse
  ProtocolGraph full_graph;
  SymbolicProtocol compact;  // simplified
  ProtocolGraph compact_graph;
  ClusterMap clusters;
};

Extraction ExtractSymbolic(const TrainedProtocol& protocol,
                           const ExtractConfig& config, std::uint64_t seed,
                           const std::string& provenance);

// JSON with vertex labels, adjacency, H_v and log2(n).
std::string GraphJson(const ProtocolGraph& graph);

// <root>/<arm>/seed_<seed>
std::filesystem::path RunDir(const std::filesystem::path& root, Arm arm,
                             std::uint64_t seed);

namespace files {
inline constexpr const char* kProtocol = "protocol.json";
inline constexpr const char* kCurves = "curves.csv";
inline constexpr const char* kManifest = "manifest.json";
inline constexpr const char* kSymbolic = "protocol.sproto";
inline constexpr const char* kSymbolicFull = "protocol_full.sproto";
inline constexpr const char* kGraph = "graph.json";
}  // namespace files

std::string ReadFile(const std::filesystem::path& path);  // kMissingArtifact
void WriteFile(const std::filesystem::path& path, std::string_view content);

// Final row of a curves CSV written by CurvesCsv.
CurveRow ParseFinalCurveRow(std::string_view csv, int num_ues);
std::vector<CurveRow> ParseCurves(std::string_view csv, int num_ues);

// Max minus min of the per-window mean over `curves` (one reward series per
// seed, truncated to the shortest).
double BaselineRange(const std::vector<std::vector<double>>& curves);

struct BoostVerdict {
  bool ordering = false;  // pos > off > neg (pos > neg without an off arm)
  double margin = 0.0;    // pos - neg
  std::optional<double> required;  // 10% of the baseline range
  bool pass = false;
};

BoostVerdict CausalityBoost(double pos, std::optional<double> off, double neg,
                            std::optional<double> baseline_range);

// min over UEs j of H(m^up_j) - H(U_{-j}) on one curve row.
double InequalityMargin(const CurveRow& row);

// Middle value; mean of the two middle values for even sizes.
double Median(std::vector<double> values);

// Mean of `draws` uniformly drawn entries of `rewards`.
double RandomSelectionReward(std::span<const double> rewards, int draws,
                             std::uint64_t seed);

inline constexpr int kEvalEpisodes = 200;
inline constexpr int kFidelitySlots = 1000;
inline constexpr int kRandomSelectionDraws = 5;

// Aggregated acceptance metrics over every run directory under `root`.
// Absent inputs become nulls; throws kMissingArtifact listing the expected
// files when no run directory exists at all.
std::string BuildReport(const std::filesystem::path& root,
                        const ExperimentConfig& config);

}  // namespace maclab

#endif  // MACLAB_EXPERIMENT_H_
