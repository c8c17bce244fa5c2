/*
 * Copyright 2026 The skelmap Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <doctest.h>

#include <cmath>

#include "skelmap/optim.hpp"
#include "skelmap/rng.hpp"

using namespace skelmap;

namespace {

// Hand-rolled scalar re-derivation of one MADGRAD step, kept independent of
// the production code path.
double scalar_madgrad_once(double x0, double g, double lr, double c, double eps) {
  const double lambda = lr * std::sqrt(1.0);
  const double s = lambda * g;
  const double nu = lambda * g * g;
  const double z = x0 - s / (std::cbrt(nu) + eps);
  return (1.0 - c) * x0 + c * z;
}

}  // namespace

TEST_CASE("madgrad leaves parameters alone on zero gradient") {
  Tensor<double> params({3});
  params.data = {1.0, -2.0, 0.5};
  Tensor<double> grads({3});
  MadgradState<double> state;
  for (int k = 0; k < 5; ++k) madgrad_step(params, grads, 0.1, state);
  CHECK(params.data == std::vector<double>{1.0, -2.0, 0.5});
}

TEST_CASE("madgrad scalar step matches the hand-derived 0.7846") {
  Tensor<double> params({1});
  params[0] = 1.0;
  Tensor<double> grads({1});
  grads[0] = 1.0;
  MadgradState<double> state;
  state.momentum = 1.0;
  state.eps = 0.0;
  madgrad_step(params, grads, 0.1, state);
  CHECK(params[0] == doctest::Approx(0.7846).epsilon(1e-4 / 0.7846));
  CHECK(params[0] == doctest::Approx(scalar_madgrad_once(1.0, 1.0, 0.1, 1.0, 0.0)).epsilon(1e-15));
}

TEST_CASE("madgrad trajectories are bit-identical across runs") {
  auto run = [] {
    Tensor<double> params({4});
    params.data = {1.0, -1.0, 2.0, -2.0};
    MadgradState<double> state;
    CounterRng rng(55);
    for (int k = 0; k < 50; ++k) {
      Tensor<double> grads({4});
      for (auto& g : grads.data) g = rng.uniform(-1.0, 1.0);
      madgrad_step(params, grads, 0.05, state);
    }
    return params.data;
  };
  CHECK(run() == run());
}

TEST_CASE("plain sgd takes the exact gradient step") {
  Tensor<double> params({2});
  params.data = {1.0, -3.0};
  Tensor<double> grads({2});
  grads.data = {0.5, -0.25};
  SgdState<double> state;
  sgd_step(params, grads, 0.1, state);
  CHECK(params[0] == doctest::Approx(1.0 - 0.1 * 0.5).epsilon(1e-15));
  CHECK(params[1] == doctest::Approx(-3.0 + 0.1 * 0.25).epsilon(1e-15));

  Tensor<double> zero({2});
  sgd_step(params, zero, 0.1, state);  // momentum 0, decay 0: no movement
  CHECK(params[0] == doctest::Approx(1.0 - 0.1 * 0.5).epsilon(1e-15));
}

TEST_CASE("sgd contracts the quadratic bowl geometrically") {
  // f(x) = x^2, grad 2x, lr 0.1, 50 steps: x = (1 - 0.2)^50.
  Tensor<double> params({1});
  params[0] = 1.0;
  SgdState<double> state;
  for (int k = 0; k < 50; ++k) {
    Tensor<double> grads({1});
    grads[0] = 2.0 * params[0];
    sgd_step(params, grads, 0.1, state);
  }
  CHECK(std::abs(params[0]) < 1e-4);
  CHECK(params[0] == doctest::Approx(std::pow(0.8, 50)).epsilon(1e-10));
}

TEST_CASE("both optimizers reach the bowl bottom within 200 steps") {
  for (const bool use_madgrad : {false, true}) {
    Tensor<double> params({8});
    for (std::size_t i = 0; i < 8; ++i) params[i] = (i % 2 ? -1.0 : 1.0) * (0.25 + 0.1 * i);
    SgdState<double> sgd;
    MadgradState<double> madgrad;
    for (int k = 0; k < 200; ++k) {
      Tensor<double> grads({8});
      for (std::size_t i = 0; i < 8; ++i) grads[i] = 2.0 * params[i];
      if (use_madgrad) {
        madgrad_step(params, grads, kDefaultLearningRate, madgrad);
      } else {
        sgd_step(params, grads, kDefaultLearningRate, sgd);
      }
    }
    double norm = 0.0;
    for (const double v : params.data) norm += v * v;
    CHECK(std::sqrt(norm) < 1e-3);
  }
}

TEST_CASE("cosine schedule hits its endpoints and midpoint exactly") {
  CHECK(cosine_lr(0, 100, 0.001, 0.1) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(cosine_lr(100, 100, 0.001, 0.1) == doctest::Approx(0.001).epsilon(1e-12));
  CHECK(cosine_lr(50, 100, 0.001, 0.1) == doctest::Approx((0.1 + 0.001) / 2.0).epsilon(1e-12));
}

TEST_CASE("cosine schedule is bounded and non-increasing") {
  double previous = 1e300;
  for (int t = 0; t <= 250; ++t) {
    const double lr = cosine_lr(t, 250, 1e-4, 1e-2);
    CHECK(lr <= 1e-2 + 1e-15);
    CHECK(lr >= 1e-4 - 1e-15);
    CHECK(lr <= previous + 1e-15);
    previous = lr;
  }
}

TEST_CASE("plateau trace on a constant metric matches hand enumeration") {
  PlateauState state;
  state.factor = 0.5;
  state.patience = 3;
  // Epoch-by-epoch multipliers for a flat metric, worked out by hand:
  // epoch 0 sets the baseline, reductions land after epochs 3 and 6.
  const double expected[] = {1.0, 1.0, 1.0, 0.5, 0.5, 0.5, 0.25, 0.25, 0.25, 0.125};
  for (int epoch = 0; epoch < 10; ++epoch) {
    plateau_update(state, 0.7);
    CHECK(state.multiplier == doctest::Approx(expected[epoch]).epsilon(1e-15));
  }
}

TEST_CASE("improving metric keeps the multiplier at 1") {
  PlateauState state;
  state.patience = 2;
  for (int epoch = 0; epoch < 20; ++epoch) {
    plateau_update(state, 0.1 * epoch);
    CHECK(state.multiplier == 1.0);
  }
}

TEST_CASE("improvement exactly at the patience boundary blocks the reduction") {
  PlateauState state;
  state.factor = 0.5;
  state.patience = 3;
  // Hand enumeration: baseline, two flat epochs (counter 1, 2), improvement
  // resets the counter before it can reach 3.
  plateau_update(state, 0.5);
  plateau_update(state, 0.5);
  plateau_update(state, 0.5);
  plateau_update(state, 0.9);
  CHECK(state.multiplier == 1.0);
  CHECK(state.epochs_since_improve == 0);
  // Three more flat epochs now do trigger it.
  plateau_update(state, 0.9);
  plateau_update(state, 0.9);
  plateau_update(state, 0.9);
  CHECK(state.multiplier == 0.5);
}

TEST_CASE("minimize mode reduces on rising loss") {
  PlateauState state;
  state.maximize = false;
  state.patience = 2;
  state.factor = 0.1;
  plateau_update(state, 1.0);   // baseline
  plateau_update(state, 0.5);   // improvement
  plateau_update(state, 0.6);   // worse: 1
  plateau_update(state, 0.7);   // worse: 2 -> reduce
  CHECK(state.multiplier == doctest::Approx(0.1));
}

TEST_CASE("plateau multiplier is non-increasing and positive") {
  CounterRng rng(77);
  PlateauState state;
  state.patience = 2;
  double previous = 1.0;
  for (int epoch = 0; epoch < 100; ++epoch) {
    plateau_update(state, rng.uniform());
    CHECK(state.multiplier <= previous + 1e-18);
    CHECK(state.multiplier > 0.0);
    previous = state.multiplier;
  }
}

TEST_CASE("shape mismatches are rejected") {
  Tensor<double> params({3}), grads({4});
  SgdState<double> sgd;
  MadgradState<double> madgrad;
  CHECK_THROWS_AS(sgd_step(params, grads, 0.1, sgd), Error);
  CHECK_THROWS_AS(madgrad_step(params, grads, 0.1, madgrad), Error);
}
