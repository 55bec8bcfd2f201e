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

#include <cmath>
#include <vector>

#include "doctest.h"
#include "maclab/error.h"
#include "maclab/mlp.h"
#include "maclab/random.h"

namespace maclab {
namespace {

double Dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double RelErr(double a, double b) {
  return std::abs(a - b) / std::max(1e-6, std::abs(a) + std::abs(b));
}

TEST_CASE("hand matrix multiply") {
  DenseLayer l{2, 2, {1, 2, 3, 4}, {0, 0}};
  const Mlp net = Mlp::FromLayers({l});
  const std::vector<double> x = {1, 1};
  CHECK(Forward(net, x) == std::vector<double>{3, 7});
  CHECK(Forward(net, x) == Forward(net, x));
}

TEST_CASE("zero network gives uniform softmax") {
  const std::vector<int> dims = {3, 5, 4};
  const Mlp net = Mlp::Zeros(dims);
  const auto p = Softmax(Forward(net, std::vector<double>{0.3, -2, 9}));
  for (double v : p) CHECK(v == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("dimension mismatch is a contract error") {
  const std::vector<int> dims = {3, 2};
  const Mlp net = Mlp::Zeros(dims);
  CHECK_THROWS_AS(Forward(net, std::vector<double>{1, 2}), Error);
  CHECK_THROWS_AS(Backward(net, std::vector<double>{1, 2, 3}, std::vector<double>{1}),
                  Error);
}

TEST_CASE("zero upstream gives zero gradients") {
  Rng rng(3);
  const std::vector<int> dims = {3, 4, 2};
  const Mlp net = Mlp::Random(dims, rng);
  const Gradients g = Backward(net, std::vector<double>{0.1, 0.2, 0.3},
                               std::vector<double>{0, 0});
  for (const auto& l : g.layers) {
    for (double w : l.weights) CHECK(w == 0.0);
    for (double b : l.biases) CHECK(b == 0.0);
  }
}

TEST_CASE("analytic gradients match central differences") {
  constexpr double kStep = 1e-5;
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<int> dims;
    const int depth = 2 + static_cast<int>(rng() % 3);
    for (int d = 0; d < depth; ++d) dims.push_back(1 + static_cast<int>(rng() % 8));
    const Mlp net = Mlp::Random(dims, rng);
    std::vector<double> x(dims.front()), up(dims.back());
    for (double& v : x) v = 2 * Uniform01(rng) - 1;
    for (double& v : up) v = 2 * Uniform01(rng) - 1;
    const Gradients g = Backward(net, x, up);

    for (std::size_t li = 0; li < net.layers().size(); ++li) {
      const std::size_t nw = net.layers()[li].weights.size();
      for (std::size_t k = 0; k < nw + net.layers()[li].biases.size(); ++k) {
        Mlp plus = net, minus = net;
        auto& lp = plus.mutable_layers()[li];
        auto& lm = minus.mutable_layers()[li];
        double& wp = k < nw ? lp.weights[k] : lp.biases[k - nw];
        double& wm = k < nw ? lm.weights[k] : lm.biases[k - nw];
        wp += kStep;
        wm -= kStep;
        const double numeric =
            (Dot(Forward(plus, x), up) - Dot(Forward(minus, x), up)) / (2 * kStep);
        const double analytic =
            k < nw ? g.layers[li].weights[k] : g.layers[li].biases[k - nw];
        CHECK(RelErr(analytic, numeric) < 1e-4);
      }
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      auto xp = x, xm = x;
      xp[i] += kStep;
      xm[i] -= kStep;
      const double numeric =
          (Dot(Forward(net, xp), up) - Dot(Forward(net, xm), up)) / (2 * kStep);
      CHECK(RelErr(g.input[i], numeric) < 1e-4);
    }
  }
}

TEST_CASE("softmax cross-entropy gradient is probabilities minus one-hot") {
  constexpr double kStep = 1e-5;
  const std::vector<double> logits = {0.3, -1.2, 2.0, 0.0};
  const int target = 2;
  auto loss = [&](std::vector<double> z) { return -std::log(Softmax(z)[target]); };
  const auto p = Softmax(logits);
  for (std::size_t i = 0; i < logits.size(); ++i) {
    auto zp = logits, zm = logits;
    zp[i] += kStep;
    zm[i] -= kStep;
    const double numeric = (loss(zp) - loss(zm)) / (2 * kStep);
    const double analytic = p[i] - (static_cast<int>(i) == target ? 1.0 : 0.0);
    CHECK(RelErr(analytic, numeric) < 1e-4);
  }
}

TEST_CASE("softmax stays normalized for extreme logits") {
  Rng rng(5);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> z(8);
    for (double& v : z) v = (Uniform01(rng) - 0.5) * 2000;
    double s = 0.0;
    for (double v : Softmax(z)) s += v;
    CHECK(std::abs(s - 1.0) < 1e-9);
  }
}

TEST_CASE("sgd on a scalar quadratic") {
  DenseLayer l{1, 1, {1.0}, {0.0}};
  const Mlp net = Mlp::FromLayers({l});
  Gradients g = Gradients::ZerosLike(net);
  g.layers[0].weights[0] = 2.0 * 1.0;  // d(w^2)/dw at w = 1
  const Mlp stepped = SgdStep(net, g, 0.1);
  CHECK(stepped.layers()[0].weights[0] == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(SgdStep(net, g, 0.0) == net);
  CHECK(SgdStep(net, g, 0.1) == stepped);

  g.layers[0].weights[0] = std::nan("");
  try {
    SgdStep(net, g, 0.1);
    FAIL("expected a numeric error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kNumeric);
  }
}

TEST_CASE("forward flop count for a 3-16-16-8 head") {
  const std::vector<int> dims = {3, 16, 16, 8};
  CHECK(ForwardFlops(Mlp::Zeros(dims)) == 896);
}

}  // namespace
}  // namespace maclab
