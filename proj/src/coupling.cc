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

#include "maclab/coupling.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "maclab/error.h"

namespace maclab {
namespace {

constexpr double kMassFloor = 1e-15;

double EntropyOfMasses(const std::vector<CouplingTable::Cell>& cells) {
  double h = 0.0;
  for (const auto& cell : cells) {
    if (cell.mass > 0.0) h -= cell.mass * std::log2(cell.mass);
  }
  return h;
}

// Solves A x = b for x when A has full column rank and the system is
// consistent; returns false otherwise. A is rows x cols, row-major.
bool SolveExact(std::vector<double> a, std::vector<double> b, int rows,
                int cols, std::vector<double>& x) {
  std::vector<int> pivot_row_of_col(cols, -1);
  int row = 0;
  for (int col = 0; col < cols; ++col) {
    int best = -1;
    double best_abs = 1e-12;
    for (int r = row; r < rows; ++r) {
      const double v = std::abs(a[r * cols + col]);
      if (v > best_abs) {
        best_abs = v;
        best = r;
      }
    }
    if (best < 0) return false;  // dependent column
    for (int c = 0; c < cols; ++c) std::swap(a[row * cols + c], a[best * cols + c]);
    std::swap(b[row], b[best]);
    for (int r = 0; r < rows; ++r) {
      if (r == row) continue;
      const double factor = a[r * cols + col] / a[row * cols + col];
      if (factor == 0.0) continue;
      for (int c = 0; c < cols; ++c) a[r * cols + c] -= factor * a[row * cols + c];
      b[r] -= factor * b[row];
    }
    pivot_row_of_col[col] = row;
    ++row;
  }
  for (int r = row; r < rows; ++r) {
    if (std::abs(b[r]) > 1e-9) return false;  // inconsistent
  }
  x.assign(cols, 0.0);
  for (int col = 0; col < cols; ++col) {
    const int r = pivot_row_of_col[col];
    x[col] = b[r] / a[r * cols + col];
  }
  return true;
}

}  // namespace

double CouplingTable::Entropy() const { return EntropyOfMasses(cells); }

std::vector<std::vector<double>> CouplingTable::Marginals() const {
  std::vector<std::vector<double>> out;
  for (int size : shape) out.emplace_back(size, 0.0);
  for (const Cell& cell : cells) {
    for (std::size_t axis = 0; axis < shape.size(); ++axis) {
      out[axis][cell.index[axis]] += cell.mass;
    }
  }
  return out;
}

double CouplingTable::MarginalError(std::span<const Dist> marginals) const {
  Require(marginals.size() == shape.size(), "MarginalError: axis mismatch");
  const auto sums = Marginals();
  double worst = 0.0;
  for (std::size_t axis = 0; axis < shape.size(); ++axis) {
    for (std::size_t i = 0; i < marginals[axis].size(); ++i) {
      worst = std::max(worst, std::abs(sums[axis][i] - marginals[axis][i]));
    }
  }
  return worst;
}

CouplingTable MinEntropyCoupling(std::span<const Dist> marginals) {
  Require(marginals.size() >= 2, "min_entropy_coupling: need >= 2 marginals");
  CouplingTable table;
  std::vector<std::vector<double>> remaining;
  std::size_t max_steps = 1;
  for (const Dist& d : marginals) {
    Require(d.size() > 0, "min_entropy_coupling: empty marginal");
    table.shape.push_back(static_cast<int>(d.size()));
    remaining.push_back(d.probabilities());
    max_steps += d.size();
  }

  std::map<std::vector<int>, double> cells;
  std::vector<int> index(marginals.size());
  for (std::size_t step = 0; step < max_steps; ++step) {
    double allocation = std::numeric_limits<double>::infinity();
    for (std::size_t axis = 0; axis < remaining.size(); ++axis) {
      const auto& r = remaining[axis];
      const auto top = std::max_element(r.begin(), r.end());
      index[axis] = static_cast<int>(top - r.begin());
      allocation = std::min(allocation, *top);
    }
    if (allocation <= kMassFloor) break;
    cells[index] += allocation;
    for (std::size_t axis = 0; axis < remaining.size(); ++axis) {
      double& slot = remaining[axis][index[axis]];
      slot = std::max(0.0, slot - allocation);
    }
  }
  for (auto& [idx, mass] : cells) table.cells.push_back({idx, mass});
  return table;
}

CouplingTable MecBruteForce(const Dist& rows, const Dist& cols) {
  const int m = static_cast<int>(rows.size());
  const int n = static_cast<int>(cols.size());
  if (m > 3 || n > 3) {
    Fail(ErrorKind::kUnsupported,
         "mec_brute_force: supports larger than 3 are not supported (got " +
             std::to_string(m) + "x" + std::to_string(n) + ")");
  }
  const int num_cells = m * n;
  const int equations = m + n;
  std::vector<double> rhs(equations);
  for (int i = 0; i < m; ++i) rhs[i] = rows[i];
  for (int k = 0; k < n; ++k) rhs[m + k] = cols[k];

  CouplingTable best;
  best.shape = {m, n};
  double best_entropy = std::numeric_limits<double>::infinity();

  // Basic feasible solutions have at most m + n - 1 nonzero cells.
  for (unsigned mask = 1; mask < (1u << num_cells); ++mask) {
    const int support = __builtin_popcount(mask);
    if (support > m + n - 1) continue;
    std::vector<int> chosen;
    for (int c = 0; c < num_cells; ++c) {
      if (mask & (1u << c)) chosen.push_back(c);
    }
    std::vector<double> a(static_cast<std::size_t>(equations) * support, 0.0);
    for (int s = 0; s < support; ++s) {
      const int i = chosen[s] / n;
      const int k = chosen[s] % n;
      a[i * support + s] = 1.0;
      a[(m + k) * support + s] = 1.0;
    }
    std::vector<double> x;
    if (!SolveExact(a, rhs, equations, support, x)) continue;
    if (std::any_of(x.begin(), x.end(), [](double v) { return v < -1e-12; })) {
      continue;
    }
    std::vector<CouplingTable::Cell> cells;
    for (int s = 0; s < support; ++s) {
      if (x[s] > 0.0) cells.push_back({{chosen[s] / n, chosen[s] % n}, x[s]});
    }
    const double h = EntropyOfMasses(cells);
    if (h < best_entropy - 1e-15) {
      best_entropy = h;
      best.cells = std::move(cells);
    }
  }
  Require(!best.cells.empty(), "mec_brute_force: no feasible vertex found");
  return best;
}

double CausalLowerBound(std::span<const Dist> conditionals) {
  Require(!conditionals.empty(), "causal_lower_bound: no conditionals");
  if (conditionals.size() == 1) return ShannonEntropy(conditionals[0]);
  return MinEntropyCoupling(conditionals).Entropy();
}

CausalVerdict InferCausalDirection(
    std::span<const std::pair<int, int>> samples) {
  Require(!samples.empty(), "infer_causal_direction: no samples");
  int x_size = 0;
  int y_size = 0;
  for (const auto& [x, y] : samples) {
    Require(x >= 0 && y >= 0, "infer_causal_direction: negative value");
    x_size = std::max(x_size, x + 1);
    y_size = std::max(y_size, y + 1);
  }
  std::vector<double> joint(static_cast<std::size_t>(x_size) * y_size, 0.0);
  for (const auto& [x, y] : samples) joint[x * y_size + y] += 1.0;

  // Conditionals of `target` given each observed value of `given`, and the
  // entropy of `given`.
  auto side = [&](bool x_is_cause, std::vector<Dist>& conditionals) {
    const int cause_size = x_is_cause ? x_size : y_size;
    const int effect_size = x_is_cause ? y_size : x_size;
    std::vector<double> cause_counts(cause_size, 0.0);
    for (int c = 0; c < cause_size; ++c) {
      std::vector<double> counts(effect_size, 0.0);
      for (int e = 0; e < effect_size; ++e) {
        counts[e] = x_is_cause ? joint[c * y_size + e] : joint[e * y_size + c];
      }
      double total = 0.0;
      for (double v : counts) total += v;
      cause_counts[c] = total;
      if (total > 0.0) conditionals.push_back(Dist::FromCounts(counts));
    }
    return ShannonEntropy(Dist::FromCounts(cause_counts));
  };

  std::vector<Dist> y_given_x;
  std::vector<Dist> x_given_y;
  const double hx = side(true, y_given_x);
  const double hy = side(false, x_given_y);

  CausalVerdict verdict;
  if (y_given_x.size() < 2 || x_given_y.size() < 2) return verdict;
  verdict.forward_bits = hx + CausalLowerBound(y_given_x);
  verdict.backward_bits = hy + CausalLowerBound(x_given_y);
  const double gap = verdict.backward_bits - verdict.forward_bits;
  if (gap > kCausalMarginBits) {
    verdict.direction = CausalDirection::kXCausesY;
  } else if (gap < -kCausalMarginBits) {
    verdict.direction = CausalDirection::kYCausesX;
  }
  return verdict;
}

}  // namespace maclab
