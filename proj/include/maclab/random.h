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

#ifndef MACLAB_RANDOM_H_
#define MACLAB_RANDOM_H_

#include <cstdint>
#include <random>
#include <span>

namespace maclab {

// All randomness flows through 64-bit Mersenne Twister streams. Sampling
// helpers avoid std::*_distribution so streams are bit-identical across
// standard library implementations.
using Rng = std::mt19937_64;

// SplitMix64 finalizer; derives independent child seeds.
constexpr std::uint64_t MixSeed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t stream) {
  return MixSeed(seed ^ MixSeed(stream + 0x632BE59BD9B4E019ull));
}

// Uniform in [0, 1) with 53 bits of resolution.
inline double Uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool Bernoulli(Rng& rng, double p) { return Uniform01(rng) < p; }

// Index drawn proportionally to nonnegative weights. Falls back to the last
// positive entry when rounding leaves the cumulative sum short.
int SampleIndex(std::span<const double> weights, Rng& rng);

}  // namespace maclab

#endif  // MACLAB_RANDOM_H_
