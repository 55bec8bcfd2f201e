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

#include "maclab/error.h"

#include <numeric>

#include "maclab/random.h"

namespace maclab {

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kContract: return "contract";
    case ErrorKind::kNumeric: return "numeric";
    case ErrorKind::kUnsupported: return "unsupported";
    case ErrorKind::kSyntax: return "syntax";
    case ErrorKind::kVocabulary: return "vocabulary";
    case ErrorKind::kCoverage: return "coverage";
    case ErrorKind::kNotFound: return "not_found";
    case ErrorKind::kValidation: return "validation";
    case ErrorKind::kMissingArtifact: return "missing_artifact";
  }
  return "unknown";
}

SyntaxError::SyntaxError(int line, int column, const std::string& message)
    : Error(ErrorKind::kSyntax, "line " + std::to_string(line) + ", column " +
                                    std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

int SampleIndex(std::span<const double> weights, Rng& rng) {
  Require(!weights.empty(), "SampleIndex: empty weight vector");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  Require(total > 0.0, "SampleIndex: weights sum to zero");
  const double target = Uniform01(rng) * total;
  double cumulative = 0.0;
  int last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    last_positive = static_cast<int>(i);
    cumulative += weights[i];
    if (target < cumulative) return static_cast<int>(i);
  }
  return last_positive;
}

}  // namespace maclab
