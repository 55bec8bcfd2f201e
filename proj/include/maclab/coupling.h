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

#ifndef MACLAB_COUPLING_H_
#define MACLAB_COUPLING_H_

#include <span>
#include <utility>
#include <vector>

#include "maclab/information.h"

namespace maclab {

// Sparse joint distribution over the product of its marginals' supports.
struct CouplingTable {
  struct Cell {
    std::vector<int> index;  // one coordinate per marginal
    double mass = 0.0;
  };

  std::vector<int> shape;
  std::vector<Cell> cells;

  double Entropy() const;
  // Row/column sums, one vector per axis.
  std::vector<std::vector<double>> Marginals() const;
  // Largest absolute deviation from the given marginals.
  double MarginalError(std::span<const Dist> marginals) const;
};

// Greedy coupling: repeatedly match the largest remaining mass of every
// marginal, allocate their minimum to that joint cell, subtract. Joint
// entropy is within one bit of the optimum.
CouplingTable MinEntropyCoupling(std::span<const Dist> marginals);

// Exact minimum-entropy coupling of two marginals with support <= 3 each.
// Entropy is concave, so the minimum over the transportation polytope sits
// on a vertex; every vertex is enumerated as a basic feasible solution.
CouplingTable MecBruteForce(const Dist& rows, const Dist& cols);

// Joint entropy of the minimum entropy coupling of the conditionals
// {Y | X = i}: the smallest exogenous entropy consistent with them.
double CausalLowerBound(std::span<const Dist> conditionals);

enum class CausalDirection { kXCausesY, kYCausesX, kUndecided };

struct CausalVerdict {
  CausalDirection direction = CausalDirection::kUndecided;
  double forward_bits = 0.0;   // H(X) + lower bound of {Y | X = i}
  double backward_bits = 0.0;  // H(Y) + lower bound of {X | Y = j}
};

inline constexpr double kCausalMarginBits = 0.01;

// Samples are (x, y) pairs with nonnegative integer values.
CausalVerdict InferCausalDirection(
    std::span<const std::pair<int, int>> samples);

}  // namespace maclab

#endif  // MACLAB_COUPLING_H_
