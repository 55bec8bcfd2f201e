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

#ifndef MACLAB_INFORMATION_H_
#define MACLAB_INFORMATION_H_

#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace maclab {

// Discrete probability vector. Construction validates nonnegativity and a
// unit sum (within 1e-9).
class Dist {
 public:
  static constexpr double kSumTolerance = 1e-9;

  Dist() = default;
  explicit Dist(std::vector<double> probabilities);

  // Normalizes nonnegative counts; all-zero counts are a contract error.
  static Dist FromCounts(std::span<const double> counts);

  std::size_t size() const { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }
  const std::vector<double>& probabilities() const { return p_; }

 private:
  std::vector<double> p_;
};

// All entropies are in bits; 0 log 0 = 0.
double ShannonEntropy(const Dist& d);

// Entropy of (counts + alpha) normalized. alpha >= 0.
double SmoothedEntropy(std::span<const double> counts, double alpha);

// -p log p - (1-p) log (1-p); p outside [0,1] is a contract error.
double BinaryEntropy(double p);

// Sum over observed conditions i of p(i) * H(outcome | condition = i). Each
// observed condition's outcome counts get `alpha` pseudo-counts over an
// alphabet of `outcome_alphabet` symbols (default: max outcome + 1).
// Samples are (outcome, condition) pairs.
double ConditionalEntropy(std::span<const std::pair<int, int>> samples,
                          double alpha = 0.0,
                          std::optional<int> outcome_alphabet = std::nullopt);

// I(A;B) in bits from (a, b) samples, plug-in estimate.
double MutualInformation(std::span<const std::pair<int, int>> samples);

// Mean binary entropy of clause context values. Order-independent.
double SemanticEntropy(std::span<const double> contexts);

}  // namespace maclab

#endif  // MACLAB_INFORMATION_H_
