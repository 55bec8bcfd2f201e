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

#include "maclab/graph_entropy.h"

#include <algorithm>
#include <cmath>

#include "maclab/error.h"

namespace maclab {
namespace {

double OffDiagonalNorm(const std::vector<double>& a, int n) {
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) sum += a[i * n + j] * a[i * n + j];
    }
  }
  return std::sqrt(sum);
}

}  // namespace

ProtocolGraph::ProtocolGraph(std::vector<std::string> labels)
    : labels_(std::move(labels)),
      adjacency_(labels_.size() * labels_.size(), 0.0) {}

void ProtocolGraph::AddEdge(int a, int b, double weight) {
  Require(a >= 0 && a < size() && b >= 0 && b < size(),
          "ProtocolGraph: vertex out of range");
  Require(a != b, "ProtocolGraph: self loops are not allowed");
  Require(weight >= 0.0, "ProtocolGraph: negative edge weight");
  adjacency_[a * size() + b] += weight;
  adjacency_[b * size() + a] += weight;
}

int ProtocolGraph::IndexOf(const std::string& label) const {
  const auto it = std::find(labels_.begin(), labels_.end(), label);
  return it == labels_.end() ? -1 : static_cast<int>(it - labels_.begin());
}

std::size_t ProtocolGraph::EdgeCount() const {
  std::size_t count = 0;
  for (int i = 0; i < size(); ++i) {
    for (int j = i + 1; j < size(); ++j) count += weight(i, j) > 0.0;
  }
  return count;
}

std::vector<double> ProtocolGraph::Laplacian() const {
  const int n = size();
  std::vector<double> l(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    double degree = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      l[i * n + j] = -weight(i, j);
      degree += weight(i, j);
    }
    l[i * n + i] = degree;
  }
  return l;
}

JacobiResult JacobiEigenvalues(std::vector<double> a, int n, double tolerance,
                               int max_sweeps) {
  Require(n >= 1 && a.size() == static_cast<std::size_t>(n) * n,
          "JacobiEigenvalues: matrix shape mismatch");
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      Require(std::abs(a[i * n + j] - a[j * n + i]) <= 1e-12,
              "JacobiEigenvalues: matrix is not symmetric");
    }
  }
  JacobiResult result;
  result.off_diagonal_norm = OffDiagonalNorm(a, n);
  while (result.off_diagonal_norm >= tolerance && result.sweeps < max_sweeps) {
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double app = a[p * n + p];
        const double aqq = a[q * n + q];
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a[k * n + p];
          const double akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a[p * n + k];
          const double aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        a[p * n + q] = 0.0;
        a[q * n + p] = 0.0;
      }
    }
    ++result.sweeps;
    result.off_diagonal_norm = OffDiagonalNorm(a, n);
  }
  result.eigenvalues.resize(n);
  for (int i = 0; i < n; ++i) result.eigenvalues[i] = a[i * n + i];
  std::sort(result.eigenvalues.begin(), result.eigenvalues.end());
  return result;
}

double VonNeumannEntropy(const ProtocolGraph& graph) {
  Require(graph.size() > 0 && graph.EdgeCount() > 0,
          "von_neumann_entropy: graph has no edges");
  const auto jacobi = JacobiEigenvalues(graph.Laplacian(), graph.size());
  double trace = 0.0;
  for (double l : jacobi.eigenvalues) trace += l;
  double h = 0.0;
  for (double l : jacobi.eigenvalues) {
    // Eigenvalues of a PSD Laplacian can come back as -1e-16.
    const double q = std::max(0.0, l) / trace;
    if (q > 0.0) h -= q * std::log2(q);
  }
  return h;
}

}  // namespace maclab
