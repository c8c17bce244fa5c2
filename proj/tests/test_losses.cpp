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
#include <functional>

#include "skelmap/gradcheck.hpp"
#include "skelmap/losses.hpp"

using namespace skelmap;

namespace {

Tensor<double> random_tensor(std::vector<int> shape, CounterRng& rng, double scale = 1.0) {
  Tensor<double> t(std::move(shape));
  for (auto& v : t.data) v = scale * rng.uniform(-1.0, 1.0);
  return t;
}

// Richardson-extrapolated central differences: two step sizes cancel the
// eps^2 truncation term, sharp enough for a 1e-8 bar.
double refined_max_rel_error(Tensor<double>& x, const Tensor<double>& analytic,
                             const std::function<double()>& loss, double eps = 1e-3) {
  auto central = [&](std::size_t i, double h) {
    const double saved = x[i];
    x[i] = saved + h;
    const double plus = loss();
    x[i] = saved - h;
    const double minus = loss();
    x[i] = saved;
    return (plus - minus) / (2.0 * h);
  };
  double worst = 0.0;
  for (std::size_t i = 0; i < x.numel(); ++i) {
    const double coarse = central(i, eps);
    const double fine = central(i, eps / 2.0);
    const double numeric = (4.0 * fine - coarse) / 3.0;
    const double a = analytic[i];
    const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
    worst = std::max(worst, rel);
  }
  return worst;
}

// Finite differences need a well-conditioned test point: cosines clear of the
// clamp and of the easy-margin branch (both are derivative discontinuities),
// a moderate scale (s^3 drives the FD truncation term), larger weight rows,
// and smoothed targets so no gradient component vanishes under the saturated
// softmax. The code path is the same one production (s=30) runs.
struct ArcFaceCheckPoint {
  ArcFaceHead<double> head{5, 7, 12.0, 0.5};
  Tensor<double> embeddings{{3, 7}};
  std::vector<int> labels;
  Tensor<double> targets;

  explicit ArcFaceCheckPoint(std::uint64_t seed) {
    CounterRng rng(seed);
    head.init(rng);
    for (auto& v : head.weight.data) v *= 3.0;
    labels = {static_cast<int>(seed % 5), 2, 4};
    for (int tries = 0; tries < 500; ++tries) {
      for (auto& v : embeddings.data) v = rng.uniform(-1.0, 1.0);
      for (auto& v : embeddings.data) v += v >= 0 ? 0.05 : -0.05;
      const Tensor<double> logits = head.forward(embeddings, {});
      bool ok = true;
      for (int n = 0; n < 3; ++n) {
        for (int k = 0; k < 5; ++k) {
          const double c = logits[logits.off2(n, k)] / head.scale;
          if (std::abs(c) > 0.9) ok = false;
          if (k == labels[n] && c < -0.6) ok = false;
        }
      }
      if (ok) break;
    }
    targets = smooth_label_batch<double>(labels, 5, 0.1);
  }

  double loss() {
    return cross_entropy(head.forward(embeddings, labels), targets).loss;
  }
};

}  // namespace

TEST_CASE("label smoothing formula and normalization") {
  const Tensor<double> onehot = smooth_labels<double>(2, 4, 0.0);
  CHECK(onehot.data == std::vector<double>{0.0, 0.0, 1.0, 0.0});

  const Tensor<double> smoothed = smooth_labels<double>(2, 4, 0.2);
  CHECK(smoothed[0] == doctest::Approx(0.05));
  CHECK(smoothed[1] == doctest::Approx(0.05));
  CHECK(smoothed[2] == doctest::Approx(0.85));
  CHECK(smoothed[3] == doctest::Approx(0.05));

  CounterRng rng(1);
  for (int round = 0; round < 50; ++round) {
    const int k_count = 2 + static_cast<int>(rng.uniform_index(20));
    const int label = static_cast<int>(rng.uniform_index(k_count));
    const double eps = rng.uniform(0.0, 0.99);
    const Tensor<double> t = smooth_labels<double>(label, k_count, eps);
    double sum = 0.0;
    for (const double v : t.data) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }

  CHECK_THROWS_AS(smooth_labels<double>(4, 4, 0.1), Error);
}

TEST_CASE("uniform logits with one-hot target give ln K") {
  const int k_count = 7;
  Tensor<double> logits({1, k_count});
  logits.fill(3.25);
  const Tensor<double> targets = smooth_label_batch<double>({4}, k_count, 0.0);
  const auto result = cross_entropy(logits, targets);
  CHECK(result.loss == doctest::Approx(std::log(static_cast<double>(k_count))).epsilon(1e-12));
}

TEST_CASE("saturated correct logit drives the loss to zero") {
  Tensor<double> logits({1, 5});
  logits.fill(0.0);
  logits[2] = 50.0;
  const Tensor<double> targets = smooth_label_batch<double>({2}, 5, 0.0);
  const auto result = cross_entropy(logits, targets);
  CHECK(result.loss >= 0.0);
  CHECK(result.loss < 1e-9);
}

TEST_CASE("cross entropy is stable for extreme logits and always >= 0") {
  CounterRng rng(2);
  Tensor<double> logits({2, 4});
  logits.data = {1e30, -1e30, 500.0, -500.0, 3.0, 2.0, 1.0, 0.0};
  const Tensor<double> targets = smooth_label_batch<double>({0, 1}, 4, 0.1);
  const auto result = cross_entropy(logits, targets);
  CHECK(std::isfinite(result.loss));
  CHECK(result.loss >= 0.0);
}

TEST_CASE("cross entropy gradient matches finite differences to 1e-8") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    CounterRng rng(100 + seed);
    Tensor<double> logits = random_tensor({3, 6}, rng, 2.0);
    std::vector<int> labels = {1, 4, 0};
    const Tensor<double> targets = smooth_label_batch<double>(labels, 6, 0.1);
    const auto result = cross_entropy(logits, targets);
    auto loss = [&] { return cross_entropy(logits, targets).loss; };
    CHECK(refined_max_rel_error(logits, result.grad_logits, loss) < 1e-8);
  }
}

TEST_CASE("arcface with zero margin reduces to normalized softmax") {
  CounterRng rng(3);
  const int num_classes = 5, dim = 8, batch = 4;
  ArcFaceHead<double> with_margin(num_classes, dim, 30.0, 0.0);
  with_margin.init(rng);
  Tensor<double> embeddings = random_tensor({batch, dim}, rng);
  const std::vector<int> labels = {0, 2, 4, 1};

  const Tensor<double> train_logits = with_margin.forward(embeddings, labels);
  const Tensor<double> infer_logits = with_margin.forward(embeddings, {});
  for (std::size_t i = 0; i < train_logits.numel(); ++i) {
    CHECK(std::abs(train_logits[i] - infer_logits[i]) < 1e-10);
  }

  const Tensor<double> targets = smooth_label_batch<double>(labels, num_classes, 0.0);
  const double a = cross_entropy(train_logits, targets).loss;
  const double b = cross_entropy(infer_logits, targets).loss;
  CHECK(std::abs(a - b) < 1e-10);
}

TEST_CASE("aligned embedding with s=30 m=0.5 yields the worked logit") {
  const int num_classes = 3, dim = 4;
  ArcFaceHead<double> head(num_classes, dim, 30.0, 0.5);
  head.weight.zero();
  head.weight[head.weight.off2(0, 1)] = 2.0;  // class 0 along +e1
  head.weight[head.weight.off2(1, 2)] = 1.0;
  head.weight[head.weight.off2(2, 3)] = 1.0;

  Tensor<double> embeddings({1, dim});
  embeddings[1] = 5.0;  // aligned with class 0, cos(theta) = 1 before clamping

  const Tensor<double> logits = head.forward(embeddings, {0});
  // 30*cos(0.5) = 26.3275; the cosine clamp moves it by < 1e-2.
  CHECK(logits[0] == doctest::Approx(30.0 * std::cos(0.5)).epsilon(4e-4));
  // Exact value under the clamped formula.
  const double c = 1.0 - 1e-7;
  const double expected =
      30.0 * (c * std::cos(0.5) - std::sqrt(1.0 - c * c) * std::sin(0.5));
  CHECK(logits[0] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("margin monotonicity: larger margin, smaller target logit, larger loss") {
  CounterRng rng(5);
  const int num_classes = 6, dim = 10, batch = 3;
  Tensor<double> embeddings = random_tensor({batch, dim}, rng);
  const std::vector<int> labels = {1, 3, 5};
  Tensor<double> weight = random_tensor({num_classes, dim}, rng);

  double previous_loss = -1.0;
  double previous_logit = 1e300;
  for (const double margin : {0.0, 0.2, 0.4, 0.6}) {
    ArcFaceHead<double> head(num_classes, dim, 30.0, margin);
    head.weight = weight;
    const Tensor<double> logits = head.forward(embeddings, labels);
    const double target_logit = logits[logits.off2(0, labels[0])];
    CHECK(target_logit < previous_logit);
    previous_logit = target_logit;

    const Tensor<double> targets = smooth_label_batch<double>(labels, num_classes, 0.0);
    const double loss = cross_entropy(logits, targets).loss;
    CHECK(loss > previous_loss);
    previous_loss = loss;
  }
}

TEST_CASE("arcface logits are invariant to embedding scale") {
  CounterRng rng(7);
  const int num_classes = 4, dim = 6;
  ArcFaceHead<double> head(num_classes, dim, 30.0, 0.5);
  head.init(rng);
  Tensor<double> embeddings = random_tensor({2, dim}, rng);
  const std::vector<int> labels = {0, 3};
  const Tensor<double> base = head.forward(embeddings, labels);
  for (auto& v : embeddings.data) v *= 37.5;
  const Tensor<double> scaled = head.forward(embeddings, labels);
  for (std::size_t i = 0; i < base.numel(); ++i) {
    CHECK(std::abs(base[i] - scaled[i]) < 1e-6);
  }
}

TEST_CASE("zero embedding rows are rejected") {
  ArcFaceHead<double> head(3, 4, 30.0, 0.5);
  CounterRng rng(9);
  head.init(rng);
  Tensor<double> embeddings({2, 4});
  embeddings[0] = 1.0;  // row 0 fine, row 1 all zero
  CHECK_THROWS_AS(head.forward(embeddings, {0, 1}), Error);
}

TEST_CASE("full arcface loss gradient matches finite differences over 10 seeds") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    ArcFaceCheckPoint point(200 + seed);
    point.head.grad_weight.zero();
    const Tensor<double> logits = point.head.forward(point.embeddings, point.labels);
    const auto ce = cross_entropy(logits, point.targets);
    const Tensor<double> dembed = point.head.backward(ce.grad_logits);

    auto loss = [&] { return point.loss(); };
    CHECK(grad_check_tensor(point.embeddings, dembed, loss, 3e-5).max_rel_error < 1e-6);
    CHECK(grad_check_tensor(point.head.weight, point.head.grad_weight, loss, 3e-5).max_rel_error <
          1e-6);
  }
}

TEST_CASE("easy-margin fallback activates past theta + m = pi") {
  // Embedding pointing nearly opposite its class weight: cos(theta) below
  // -cos(m), so the logit must follow s*(cos(theta) - m*sin(m)).
  const double margin = 0.5;
  ArcFaceHead<double> head(2, 4, 30.0, margin);
  head.weight.zero();
  head.weight[head.weight.off2(0, 0)] = 1.0;
  head.weight[head.weight.off2(1, 1)] = 1.0;
  Tensor<double> embeddings({1, 4});
  embeddings[0] = -1.0;
  embeddings[2] = 0.1;  // keeps cos(theta) just above -1, clear of the clamp

  const Tensor<double> logits = head.forward(embeddings, {0});
  const double c = -1.0 / std::sqrt(1.01);
  REQUIRE(c < -std::cos(margin));
  CHECK(logits[0] == doctest::Approx(30.0 * (c - margin * std::sin(margin))).epsilon(1e-12));
  // Non-labeled class is untouched by the margin.
  CHECK(logits[1] == doctest::Approx(30.0 * 0.0).epsilon(1e-9));
}
