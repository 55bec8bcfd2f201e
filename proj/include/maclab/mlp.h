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

#ifndef MACLAB_MLP_H_
#define MACLAB_MLP_H_

#include <cstddef>
#include <span>
#include <vector>

#include "maclab/random.h"

namespace maclab {

// Dense layer, weights stored row-major as [out][in].
struct DenseLayer {
  int in = 0;
  int out = 0;
  std::vector<double> weights;
  std::vector<double> biases;

  bool operator==(const DenseLayer&) const = default;
};

// Feed-forward network: tanh on hidden layers, identity on the output.
class Mlp {
 public:
  Mlp() = default;

  // Zero-initialized network with the given layer widths (>= 2 entries).
  static Mlp Zeros(std::span<const int> layer_dims);
  // Weights and biases uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)].
  static Mlp Random(std::span<const int> layer_dims, Rng& rng);
  // Builds from explicit layers; checks shapes and finiteness.
  static Mlp FromLayers(std::vector<DenseLayer> layers);

  std::vector<int> LayerDims() const;
  int InputDim() const { return layers_.front().in; }
  int OutputDim() const { return layers_.back().out; }
  std::size_t ParameterCount() const;

  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& mutable_layers() { return layers_; }

  bool operator==(const Mlp&) const = default;

 private:
  std::vector<DenseLayer> layers_;
};

// Same shape as an Mlp's parameters, plus the gradient with respect to the
// network input (used to chain networks).
struct Gradients {
  std::vector<DenseLayer> layers;
  std::vector<double> input;

  static Gradients ZerosLike(const Mlp& net);
  Gradients& operator+=(const Gradients& other);
  Gradients& operator*=(double scale);
  bool AllFinite() const;
};

std::vector<double> Forward(const Mlp& net, std::span<const double> input);

// Gradient of <upstream, Forward(net, input)> with respect to every
// parameter and to the input.
Gradients Backward(const Mlp& net, std::span<const double> input,
                   std::span<const double> upstream);

// net - lr * grads. Non-finite gradients raise ErrorKind::kNumeric.
Mlp SgdStep(Mlp net, const Gradients& grads, double lr);

// Forward FLOPs: two per weight (multiply-add) plus one per hidden
// activation. Biases and the output layer's identity are not counted.
std::size_t ForwardFlops(const Mlp& net);

// Numerically stable softmax.
std::vector<double> Softmax(std::span<const double> logits);

}  // namespace maclab

#endif  // MACLAB_MLP_H_
