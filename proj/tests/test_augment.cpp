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

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "skelmap/augment.hpp"
#include "skelmap/error.hpp"
#include "test_helpers.hpp"

using namespace skelmap;

namespace {

SkeletonImage noisy_image(int h, int w, std::uint64_t seed) {
  SkeletonImage img = SkeletonImage::zeros(h, w, 255.0);
  CounterRng rng(seed);
  for (double& v : img.data) v = std::floor(rng.uniform(1.0, 255.0));
  return img;
}

// Per-frame multiset of coordinates, the BoneShuffle invariant currency.
std::multiset<double> frame_multiset(const SkeletonFrame& frame) {
  std::multiset<double> values;
  for (const auto& body : frame.bodies) {
    for (const auto& j : body) {
      values.insert(j.x);
      values.insert(j.y);
      values.insert(j.z);
    }
  }
  return values;
}

}  // namespace

TEST_CASE("flip-h mirrors a 1x2 image") {
  SkeletonImage img = SkeletonImage::zeros(1, 2, 255.0);
  for (int c = 0; c < 3; ++c) {
    img.at(0, 0, c) = 10.0 + c;
    img.at(0, 1, c) = 200.0 + c;
  }
  CounterRng rng(1);
  const SkeletonImage out = apply_image_op(img, {AugmentKind::FlipH, 1.0}, rng);
  for (int c = 0; c < 3; ++c) {
    CHECK(out.at(0, 0, c) == 200.0 + c);
    CHECK(out.at(0, 1, c) == 10.0 + c);
  }
}

TEST_CASE("rotate at magnitude zero is the identity") {
  const SkeletonImage img = noisy_image(9, 13, 5);
  CounterRng rng(2);
  const SkeletonImage out = apply_image_op(img, {AugmentKind::Rotate, 0.0}, rng);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    CHECK(std::abs(out.data[i] - img.data[i]) < 1e-9);
  }
}

TEST_CASE("cutout zeroes exactly side*side pixels away from borders") {
  // Brute-force scan counts the zeroed pixels.
  const int trials = 40;
  int interior_hits = 0;
  for (int trial = 0; trial < trials; ++trial) {
    const SkeletonImage img = noisy_image(100, 100, 100 + trial);
    CounterRng rng(1000 + trial);
    const SkeletonImage out = apply_image_op(img, {AugmentKind::Cutout, 0.5}, rng);
    std::size_t zeroed = 0;
    for (std::size_t p = 0; p < out.num_pixels(); ++p) {
      bool all_zero = true;
      for (int c = 0; c < 3; ++c) all_zero &= out.data[p * 3 + c] == 0.0;
      zeroed += all_zero;
    }
    // Clipping can only shrink the square.
    CHECK(zeroed <= 2500);
    CHECK(zeroed >= 25 * 25);  // at least a quarter survives any clipping
    if (zeroed == 2500) ++interior_hits;
  }
  CHECK(interior_hits > 0);  // unclipped case exercised
}

TEST_CASE("salt-pepper flips a binomial fraction to the extremes") {
  const std::size_t h = 25, w = 40;  // 1000 pixels
  const SkeletonImage img = noisy_image(h, w, 17);
  CounterRng rng(18);
  const SkeletonImage out = apply_noise_op(img, {AugmentKind::SaltPepper, 1.0}, rng);
  std::size_t flipped = 0, salt = 0, pepper = 0;
  for (std::size_t p = 0; p < out.num_pixels(); ++p) {
    if (out.data[p * 3] != img.data[p * 3]) {
      ++flipped;
      if (out.data[p * 3] == 255.0) ++salt;
      if (out.data[p * 3] == 0.0) ++pepper;
    }
  }
  CHECK(salt + pepper == flipped);
  const double n = static_cast<double>(h * w);
  const double p_expect = 0.05;
  const double sigma = std::sqrt(p_expect * (1 - p_expect) / n);
  CHECK(std::abs(static_cast<double>(flipped) / n - p_expect) <= 3.0 * sigma);
}

TEST_CASE("salt and pepper variants write only their own extreme") {
  const SkeletonImage img = noisy_image(30, 30, 19);
  CounterRng rng_a(20), rng_b(21);
  const SkeletonImage salted = apply_noise_op(img, {AugmentKind::Salt, 1.0}, rng_a);
  const SkeletonImage peppered = apply_noise_op(img, {AugmentKind::Pepper, 1.0}, rng_b);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    if (salted.data[i] != img.data[i]) CHECK(salted.data[i] == 255.0);
    if (peppered.data[i] != img.data[i]) CHECK(peppered.data[i] == 0.0);
  }
}

TEST_CASE("gaussian noise preserves the mean within 3 sigma") {
  SkeletonImage img = SkeletonImage::zeros(40, 40, 255.0);
  for (double& v : img.data) v = 128.0;
  CounterRng rng(23);
  const AugmentOp op{AugmentKind::Gaussian, 1.0};
  const SkeletonImage out = apply_noise_op(img, op, rng);
  double mean = 0.0;
  for (const double v : out.data) mean += v;
  mean /= static_cast<double>(out.data.size());
  const double sigma_pixel = 0.1 * 255.0;
  const double bound = 3.0 * sigma_pixel / std::sqrt(static_cast<double>(out.data.size()));
  CHECK(std::abs(mean - 128.0) < bound);
}

TEST_CASE("noise ops at magnitude zero are the identity") {
  const SkeletonImage img = noisy_image(8, 8, 29);
  for (const AugmentKind kind : {AugmentKind::SaltPepper, AugmentKind::Salt,
                                 AugmentKind::Pepper, AugmentKind::Gaussian,
                                 AugmentKind::Speckle, AugmentKind::Localvars}) {
    CounterRng rng(31);
    const SkeletonImage out = apply_noise_op(img, {kind, 0.0}, rng);
    CHECK(out.data == img.data);
  }
}

TEST_CASE("bone shuffle preserves the per-frame coordinate multiset") {
  CounterRng data_rng(37);
  const SkeletonSequence seq = test::random_sequence(data_rng, 6);
  CounterRng rng(41);
  const SkeletonSequence out = apply_skeleton_op(seq, {AugmentKind::BoneShuffle, 1.0}, rng);
  for (std::size_t t = 0; t < seq.frames.size(); ++t) {
    CHECK(frame_multiset(seq.frames[t]) == frame_multiset(out.frames[t]));
  }
  // Same permutation on every frame: joint j moved to the same source at all t.
  std::map<int, int> source;
  for (int j = 0; j < kJointsPerBody; ++j) {
    const Joint3D& moved = out.frames[0].bodies[0][j];
    for (int k = 0; k < kJointsPerBody; ++k) {
      const Joint3D& orig = seq.frames[0].bodies[0][k];
      if (orig.x == moved.x && orig.y == moved.y && orig.z == moved.z) {
        source[j] = k;
        break;
      }
    }
  }
  REQUIRE(source.size() == kJointsPerBody);
  for (std::size_t t = 1; t < seq.frames.size(); ++t) {
    for (const auto& [j, k] : source) {
      CHECK(out.frames[t].bodies[0][j].x == seq.frames[t].bodies[0][k].x);
    }
  }
}

TEST_CASE("bone mask zeroes exactly ceil(m*J*0.2) joint trajectories") {
  CounterRng data_rng(43);
  const SkeletonSequence seq = test::random_sequence(data_rng, 5);
  CounterRng rng(47);
  const SkeletonSequence out = apply_skeleton_op(seq, {AugmentKind::BoneMask, 1.0}, rng);
  // Scan for all-zero joint trajectories.
  int zero_columns = 0;
  for (int j = 0; j < kJointsPerBody; ++j) {
    bool all_zero = true;
    for (const auto& frame : out.frames) {
      const Joint3D& joint = frame.bodies[0][j];
      all_zero &= joint.x == 0.0 && joint.y == 0.0 && joint.z == 0.0;
    }
    zero_columns += all_zero;
  }
  CHECK(zero_columns == 5);  // ceil(1.0 * 25 * 0.2)
}

TEST_CASE("frame mask zeroes whole frames only") {
  CounterRng data_rng(53);
  SkeletonSequence seq = test::random_sequence(data_rng, 10);
  // Shift everything so no joint is zero by accident.
  for (auto& frame : seq.frames) {
    for (auto& body : frame.bodies) {
      for (auto& j : body) {
        j.x += 3.0;
        j.y += 3.0;
        j.z += 3.0;
      }
    }
  }
  CounterRng rng(59);
  const SkeletonSequence out = apply_skeleton_op(seq, {AugmentKind::FrameMask, 1.0}, rng);
  int zeroed = 0;
  for (std::size_t t = 0; t < out.frames.size(); ++t) {
    bool all_zero = true, any_zero = false;
    for (const auto& body : out.frames[t].bodies) {
      for (const auto& j : body) {
        const bool z = j.x == 0.0 && j.y == 0.0 && j.z == 0.0;
        all_zero &= z;
        any_zero |= z;
      }
    }
    if (all_zero) {
      ++zeroed;
    } else {
      CHECK_FALSE(any_zero);  // masking never touches part of a frame
    }
  }
  CHECK(zeroed == 2);  // ceil(1.0 * 10 * 0.2)
}

TEST_CASE("skeleton flip negates x and swaps left/right") {
  CounterRng data_rng(61);
  const SkeletonSequence seq = test::random_sequence(data_rng, 2);
  CounterRng rng(67);
  const SkeletonSequence out = apply_skeleton_op(seq, {AugmentKind::FlipH, 1.0}, rng);
  const Body& orig = seq.frames[0].bodies[0];
  const Body& flip = out.frames[0].bodies[0];
  CHECK(flip[kShoulderLeft].x == -orig[kShoulderRight].x);
  CHECK(flip[kShoulderLeft].y == orig[kShoulderRight].y);
  CHECK(flip[kHipRight].x == -orig[kHipLeft].x);
  CHECK(flip[kSpineMid].x == -orig[kSpineMid].x);
  CHECK(flip[kSpineMid].y == orig[kSpineMid].y);
}

TEST_CASE("wrong-domain ops are rejected") {
  const SkeletonImage img = noisy_image(4, 4, 71);
  CounterRng rng(73);
  CHECK_THROWS_AS(apply_image_op(img, {AugmentKind::BoneShuffle, 0.5}, rng), Error);
  CounterRng data_rng(79);
  const SkeletonSequence seq = test::random_sequence(data_rng, 2);
  CHECK_THROWS_AS(apply_skeleton_op(seq, {AugmentKind::Zoom, 0.5}, rng), Error);
}

TEST_CASE("catalog-wide properties at both tiers") {
  CounterRng data_rng(83);
  const SkeletonSequence seq = test::random_sequence(data_rng, 8);
  const SkeletonImage img = noisy_image(16, 50, 89);

  for (const double magnitude : {0.3, 0.7}) {
    for (const AugmentKind kind : AugmentPolicy::full_catalog()) {
      const AugmentOp op{kind, magnitude};
      const AugmentDomain domain = op_domain(kind);
      const bool strong_applies = !(is_noise_op(kind) && magnitude > 0.3);

      if (domain != AugmentDomain::SkeletonSpace && strong_applies) {
        CounterRng rng_a(1000), rng_b(1000);
        const SkeletonImage out_a = apply_image_op(img, op, rng_a);
        const SkeletonImage out_b = apply_image_op(img, op, rng_b);
        // Determinism: bit-identical under the same stream.
        CHECK(out_a.data == out_b.data);
        // Shape and range preservation.
        CHECK(out_a.height == img.height);
        CHECK(out_a.width == img.width);
        for (const double v : out_a.data) {
          CHECK(v >= 0.0);
          CHECK(v <= img.max_value);
        }
      }

      if (domain != AugmentDomain::ImageSpace) {
        CounterRng rng_a(2000), rng_b(2000);
        const SkeletonSequence out_a = apply_skeleton_op(seq, op, rng_a);
        const SkeletonSequence out_b = apply_skeleton_op(seq, op, rng_b);
        CHECK(out_a.frames.size() == seq.frames.size());
        for (std::size_t t = 0; t < seq.frames.size(); ++t) {
          REQUIRE(out_a.frames[t].bodies.size() == seq.frames[t].bodies.size());
          for (std::size_t b = 0; b < out_a.frames[t].bodies.size(); ++b) {
            REQUIRE(out_a.frames[t].bodies[b].size() == seq.frames[t].bodies[b].size());
            for (std::size_t j = 0; j < out_a.frames[t].bodies[b].size(); ++j) {
              CHECK(out_a.frames[t].bodies[b][j].x == out_b.frames[t].bodies[b][j].x);
              CHECK(out_a.frames[t].bodies[b][j].y == out_b.frames[t].bodies[b][j].y);
              CHECK(out_a.frames[t].bodies[b][j].z == out_b.frames[t].bodies[b][j].z);
            }
          }
        }
      }
    }
  }
}

TEST_CASE("policy with zero ops is the identity pipeline") {
  CounterRng data_rng(97);
  const SkeletonSequence seq = test::random_sequence(data_rng, 5);
  AugmentPolicy policy;
  policy.num_ops = 0;
  CounterRng rng(101);
  const SkeletonImage out = rand_augment(seq, policy, rng);
  const SkeletonImage plain = encode(seq, compute_channel_range(seq));
  CHECK(out.data == plain.data);
}

TEST_CASE("singleton catalog applies deterministically") {
  CounterRng data_rng(103);
  const SkeletonSequence seq = test::random_sequence(data_rng, 5);
  AugmentPolicy policy;
  policy.catalog = {AugmentKind::FlipV};
  policy.num_ops = 1;
  CounterRng rng_a(107), rng_b(107);
  const SkeletonImage out_a = rand_augment(seq, policy, rng_a);
  const SkeletonImage out_b = rand_augment(seq, policy, rng_b);
  CHECK(out_a.data == out_b.data);
  // FlipV is image-space vertical mirror of the plain encoding.
  const SkeletonImage plain = encode(seq, compute_channel_range(seq));
  for (int y = 0; y < plain.height; ++y) {
    for (int x = 0; x < plain.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        CHECK(out_a.at(y, x, c) == plain.at(plain.height - 1 - y, x, c));
      }
    }
  }
}

TEST_CASE("different seeds usually differ, same seed always agrees") {
  CounterRng data_rng(109);
  const SkeletonSequence seq = test::random_sequence(data_rng, 6);
  AugmentPolicy policy;
  policy.catalog = AugmentPolicy::full_catalog();
  policy.num_ops = 2;

  CounterRng rng_a(1), rng_b(2), rng_c(1);
  const SkeletonImage out_a = rand_augment(seq, policy, rng_a);
  const SkeletonImage out_b = rand_augment(seq, policy, rng_b);
  const SkeletonImage out_c = rand_augment(seq, policy, rng_c);
  CHECK(out_a.data == out_c.data);
  CHECK(out_a.data != out_b.data);
}

TEST_CASE("strong tier forces noise ops back to weak magnitude") {
  AugmentPolicy policy;
  policy.tier = AugmentPolicy::Tier::Strong;
  CHECK(policy.magnitude_for(AugmentKind::Gaussian) == policy.weak_magnitude);
  CHECK(policy.magnitude_for(AugmentKind::Rotate) == policy.strong_magnitude);
  policy.noise_weak_only = false;
  CHECK(policy.magnitude_for(AugmentKind::Gaussian) == policy.strong_magnitude);
}
