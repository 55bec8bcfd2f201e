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

#include "maclab/information.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "maclab/error.h"

namespace maclab {
namespace {

double PLogP(double p) { return p > 0.0 ? -p * std::log2(p) : 0.0; }

}  // namespace

Dist::Dist(std::vector<double> probabilities) : p_(std::move(probabilities)) {
  Require(!p_.empty(), "Dist: empty distribution");
  double total = 0.0;
  for (double v : p_) {
    Require(std::isfinite(v) && v >= 0.0,
            "Dist: probabilities must be finite and nonnegative");
    total += v;
  }
  Require(std::abs(total - 1.0) <= kSumTolerance,
          "Dist: probabilities sum to " + std::to_string(total) + ", not 1");
}

Dist Dist::FromCounts(std::span<const double> counts) {
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  Require(total > 0.0, "Dist::FromCounts: counts sum to zero");
  std::vector<double> p(counts.begin(), counts.end());
  for (double& v : p) {
    Require(v >= 0.0, "Dist::FromCounts: negative count");
    v /= total;
  }
  return Dist(std::move(p));
}

double ShannonEntropy(const Dist& d) {
  double h = 0.0;
  for (double p : d.probabilities()) h += PLogP(p);
  return h;
}

double SmoothedEntropy(std::span<const double> counts, double alpha) {
  Require(alpha >= 0.0, "SmoothedEntropy: alpha must be nonnegative");
  Require(!counts.empty(), "SmoothedEntropy: empty alphabet");
  double total = 0.0;
  for (double c : counts) total += c + alpha;
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (double c : counts) h += PLogP((c + alpha) / total);
  return h;
}

double BinaryEntropy(double p) {
  Require(p >= 0.0 && p <= 1.0,
          "semantic entropy: context " + std::to_string(p) +
              " outside [0, 1]");
  return PLogP(p) + PLogP(1.0 - p);
}

double ConditionalEntropy(std::span<const std::pair<int, int>> samples,
                          double alpha, std::optional<int> outcome_alphabet) {
  Require(!samples.empty(), "conditional_entropy: no samples");
  Require(alpha >= 0.0, "conditional_entropy: alpha must be nonnegative");
  int max_outcome = 0;
  for (const auto& [outcome, condition] : samples) {
    Require(outcome >= 0, "conditional_entropy: negative outcome index");
    max_outcome = std::max(max_outcome, outcome);
  }
  const int alphabet = outcome_alphabet.value_or(max_outcome + 1);
  Require(alphabet > max_outcome,
          "conditional_entropy: outcome outside declared alphabet");

  std::map<int, std::vector<double>> by_condition;
  for (const auto& [outcome, condition] : samples) {
    auto& counts = by_condition[condition];
    if (counts.empty()) counts.assign(alphabet, 0.0);
    counts[outcome] += 1.0;
  }
  const double n = static_cast<double>(samples.size());
  double h = 0.0;
  for (const auto& [condition, counts] : by_condition) {
    const double weight =
        std::accumulate(counts.begin(), counts.end(), 0.0) / n;
    h += weight * SmoothedEntropy(counts, alpha);
  }
  return h;
}

double MutualInformation(std::span<const std::pair<int, int>> samples) {
  Require(!samples.empty(), "mutual_information: no samples");
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> left;
  std::map<int, double> right;
  for (const auto& s : samples) {
    joint[s] += 1.0;
    left[s.first] += 1.0;
    right[s.second] += 1.0;
  }
  const double n = static_cast<double>(samples.size());
  double mi = 0.0;
  for (const auto& [key, count] : joint) {
    const double pxy = count / n;
    mi += pxy * std::log2(pxy * n * n / (left[key.first] * right[key.second]));
  }
  return std::max(0.0, mi);
}

double SemanticEntropy(std::span<const double> contexts) {
  Require(!contexts.empty(), "semantic entropy: no clauses");
  // Sort before summing so the floating result does not depend on order.
  std::vector<double> terms;
  terms.reserve(contexts.size());
  for (double p : contexts) terms.push_back(BinaryEntropy(p));
  std::sort(terms.begin(), terms.end());
  double total = 0.0;
  for (double t : terms) total += t;
  return total / static_cast<double>(contexts.size());
}

}  // namespace maclab
