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

#include "maclab/mlp.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "maclab/error.h"

namespace maclab {
namespace {

bool Finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(),
                     [](double v) { return std::isfinite(v); });
}

void CheckDims(std::span<const int> dims) {
  Require(dims.size() >= 2, "Mlp: need at least input and output widths");
  for (int d : dims) Require(d >= 1, "Mlp: layer widths must be positive");
}

// Pre-activation of one layer into `out`.
void Affine(const DenseLayer& layer, std::span<const double> x,
            std::vector<double>& out) {
  out.assign(layer.biases.begin(), layer.biases.end());
  const double* w = layer.weights.data();
  for (int o = 0; o < layer.out; ++o, w += layer.in) {
    double acc = 0.0;
    for (int i = 0; i < layer.in; ++i) acc += w[i] * x[i];
    out[o] += acc;
  }
}

}  // namespace

Mlp Mlp::Zeros(std::span<const int> layer_dims) {
  CheckDims(layer_dims);
  Mlp net;
  for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
    DenseLayer layer;
    layer.in = layer_dims[l];
    layer.out = layer_dims[l + 1];
    layer.weights.assign(static_cast<std::size_t>(layer.in) * layer.out, 0.0);
    layer.biases.assign(layer.out, 0.0);
    net.layers_.push_back(std::move(layer));
  }
  return net;
}

Mlp Mlp::Random(std::span<const int> layer_dims, Rng& rng) {
  Mlp net = Zeros(layer_dims);
  for (DenseLayer& layer : net.layers_) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in));
    for (double& w : layer.weights) w = (2.0 * Uniform01(rng) - 1.0) * bound;
    for (double& b : layer.biases) b = (2.0 * Uniform01(rng) - 1.0) * bound;
  }
  return net;
}

Mlp Mlp::FromLayers(std::vector<DenseLayer> layers) {
  Require(!layers.empty(), "Mlp: no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const DenseLayer& layer = layers[l];
    Require(layer.in >= 1 && layer.out >= 1, "Mlp: empty layer");
    Require(layer.weights.size() ==
                static_cast<std::size_t>(layer.in) * layer.out,
            "Mlp: weight matrix shape mismatch in layer " + std::to_string(l));
    Require(layer.biases.size() == static_cast<std::size_t>(layer.out),
            "Mlp: bias shape mismatch in layer " + std::to_string(l));
    if (l > 0) {
      Require(layers[l - 1].out == layer.in,
              "Mlp: consecutive layer dims disagree at layer " +
                  std::to_string(l));
    }
    if (!Finite(layer.weights) || !Finite(layer.biases)) {
      Fail(ErrorKind::kNumeric, "Mlp: non-finite parameter in layer " +
                                    std::to_string(l));
    }
  }
  Mlp net;
  net.layers_ = std::move(layers);
  return net;
}

std::vector<int> Mlp::LayerDims() const {
  std::vector<int> dims;
  if (layers_.empty()) return dims;
  dims.push_back(layers_.front().in);
  for (const DenseLayer& layer : layers_) dims.push_back(layer.out);
  return dims;
}

std::size_t Mlp::ParameterCount() const {
  std::size_t count = 0;
  for (const DenseLayer& layer : layers_) {
    count += layer.weights.size() + layer.biases.size();
  }
  return count;
}

Gradients Gradients::ZerosLike(const Mlp& net) {
  Gradients g;
  g.layers = net.layers();
  for (DenseLayer& layer : g.layers) {
    std::fill(layer.weights.begin(), layer.weights.end(), 0.0);
    std::fill(layer.biases.begin(), layer.biases.end(), 0.0);
  }
  g.input.assign(net.InputDim(), 0.0);
  return g;
}

Gradients& Gradients::operator+=(const Gradients& other) {
  Require(layers.size() == other.layers.size() &&
              input.size() == other.input.size(),
          "Gradients: shape mismatch");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto& w = layers[l].weights;
    const auto& ow = other.layers[l].weights;
    Require(w.size() == ow.size(), "Gradients: shape mismatch");
    for (std::size_t i = 0; i < w.size(); ++i) w[i] += ow[i];
    auto& b = layers[l].biases;
    const auto& ob = other.layers[l].biases;
    for (std::size_t i = 0; i < b.size(); ++i) b[i] += ob[i];
  }
  for (std::size_t i = 0; i < input.size(); ++i) input[i] += other.input[i];
  return *this;
}

Gradients& Gradients::operator*=(double scale) {
  for (DenseLayer& layer : layers) {
    for (double& w : layer.weights) w *= scale;
    for (double& b : layer.biases) b *= scale;
  }
  for (double& v : input) v *= scale;
  return *this;
}

bool Gradients::AllFinite() const {
  for (const DenseLayer& layer : layers) {
    if (!Finite(layer.weights) || !Finite(layer.biases)) return false;
  }
  return Finite(input);
}

std::vector<double> Forward(const Mlp& net, std::span<const double> input) {
  Require(!net.layers().empty(), "forward: empty network");
  Require(input.size() == static_cast<std::size_t>(net.InputDim()),
          "forward: input length " + std::to_string(input.size()) +
              " != " + std::to_string(net.InputDim()));
  std::vector<double> x(input.begin(), input.end());
  std::vector<double> y;
  const auto& layers = net.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Affine(layers[l], x, y);
    if (l + 1 < layers.size()) {
      for (double& v : y) v = std::tanh(v);
    }
    x.swap(y);
  }
  return x;
}

Gradients Backward(const Mlp& net, std::span<const double> input,
                   std::span<const double> upstream) {
  Require(!net.layers().empty(), "backward: empty network");
  Require(input.size() == static_cast<std::size_t>(net.InputDim()),
          "backward: input length mismatch");
  Require(upstream.size() == static_cast<std::size_t>(net.OutputDim()),
          "backward: upstream length " + std::to_string(upstream.size()) +
              " != " + std::to_string(net.OutputDim()));

  const auto& layers = net.layers();
  const std::size_t depth = layers.size();
  // activations[l] is the input to layer l; activations[depth] the output.
  std::vector<std::vector<double>> activations(depth + 1);
  activations[0].assign(input.begin(), input.end());
  for (std::size_t l = 0; l < depth; ++l) {
    Affine(layers[l], activations[l], activations[l + 1]);
    if (l + 1 < depth) {
      for (double& v : activations[l + 1]) v = std::tanh(v);
    }
  }

  Gradients grads;
  grads.layers.resize(depth);
  std::vector<double> delta(upstream.begin(), upstream.end());
  for (std::size_t l = depth; l-- > 0;) {
    const DenseLayer& layer = layers[l];
    DenseLayer& g = grads.layers[l];
    g.in = layer.in;
    g.out = layer.out;
    g.biases = delta;
    g.weights.assign(layer.weights.size(), 0.0);
    const std::vector<double>& x = activations[l];
    for (int o = 0; o < layer.out; ++o) {
      double* row = g.weights.data() + static_cast<std::size_t>(o) * layer.in;
      const double d = delta[o];
      if (d == 0.0) continue;
      for (int i = 0; i < layer.in; ++i) row[i] = d * x[i];
    }
    std::vector<double> prev(layer.in, 0.0);
    for (int o = 0; o < layer.out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      const double* w =
          layer.weights.data() + static_cast<std::size_t>(o) * layer.in;
      for (int i = 0; i < layer.in; ++i) prev[i] += w[i] * d;
    }
    if (l > 0) {
      // x holds tanh outputs of the previous layer.
      for (int i = 0; i < layer.in; ++i) prev[i] *= 1.0 - x[i] * x[i];
    }
    delta.swap(prev);
  }
  grads.input = std::move(delta);
  return grads;
}

Mlp SgdStep(Mlp net, const Gradients& grads, double lr) {
  Require(grads.layers.size() == net.layers().size(),
          "sgd_step: gradient shape mismatch");
  if (!grads.AllFinite()) {
    Fail(ErrorKind::kNumeric, "sgd_step: non-finite gradient entry");
  }
  auto& layers = net.mutable_layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto& w = layers[l].weights;
    const auto& gw = grads.layers[l].weights;
    auto& b = layers[l].biases;
    const auto& gb = grads.layers[l].biases;
    Require(w.size() == gw.size() && b.size() == gb.size(),
            "sgd_step: gradient shape mismatch");
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * gw[i];
    for (std::size_t i = 0; i < b.size(); ++i) b[i] -= lr * gb[i];
  }
  return net;
}

std::size_t ForwardFlops(const Mlp& net) {
  std::size_t flops = 0;
  const auto& layers = net.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    flops += 2 * layers[l].weights.size();
    if (l + 1 < layers.size()) flops += layers[l].out;
  }
  return flops;
}

std::vector<double> Softmax(std::span<const double> logits) {
  Require(!logits.empty(), "softmax: empty logits");
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - top);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

}  // namespace maclab
