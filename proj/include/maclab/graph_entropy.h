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

#ifndef MACLAB_GRAPH_ENTROPY_H_
#define MACLAB_GRAPH_ENTROPY_H_

#include <span>
#include <string>
#include <vector>

namespace maclab {

// Weighted undirected graph over protocol symbols.
class ProtocolGraph {
 public:
  ProtocolGraph() = default;
  explicit ProtocolGraph(std::vector<std::string> labels);

  // Adds `weight` to the symmetric edge (a, b); a != b.
  void AddEdge(int a, int b, double weight);
  int IndexOf(const std::string& label) const;  // -1 when absent

  int size() const { return static_cast<int>(labels_.size()); }
  const std::vector<std::string>& labels() const { return labels_; }
  double weight(int a, int b) const { return adjacency_[a * size() + b]; }
  const std::vector<double>& adjacency() const { return adjacency_; }
  std::size_t EdgeCount() const;

  // L = D - A, row-major.
  std::vector<double> Laplacian() const;

 private:
  std::vector<std::string> labels_;
  std::vector<double> adjacency_;
};

struct JacobiResult {
  std::vector<double> eigenvalues;  // ascending
  int sweeps = 0;
  double off_diagonal_norm = 0.0;
};

// Cyclic Jacobi rotations on a symmetric n x n row-major matrix until the
// off-diagonal Frobenius norm drops below `tolerance` (or `max_sweeps`).
JacobiResult JacobiEigenvalues(std::vector<double> matrix, int n,
                               double tolerance = 1e-10, int max_sweeps = 100);

// -sum (l_i / tr L) log2 (l_i / tr L) over Laplacian eigenvalues. Requires
// at least one edge. Bounded above by log2(n).
double VonNeumannEntropy(const ProtocolGraph& graph);

}  // namespace maclab

#endif  // MACLAB_GRAPH_ENTROPY_H_
