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

#include "skelmap/error.hpp"
#include "skelmap/normalize.hpp"
#include "test_helpers.hpp"

using namespace skelmap;

namespace {

double max_coord_diff(const SkeletonSequence& a, const SkeletonSequence& b) {
  double worst = 0.0;
  for (std::size_t t = 0; t < a.frames.size(); ++t) {
    for (std::size_t bi = 0; bi < a.frames[t].bodies.size(); ++bi) {
      for (std::size_t j = 0; j < a.frames[t].bodies[bi].size(); ++j) {
        const Joint3D& x = a.frames[t].bodies[bi][j];
        const Joint3D& y = b.frames[t].bodies[bi][j];
        worst = std::max({worst, std::abs(x.x - y.x), std::abs(x.y - y.y),
                          std::abs(x.z - y.z)});
      }
    }
  }
  return worst;
}

SkeletonFrame canonical_frame() {
  // Hips along x, spine along y, spine-mid at the origin, unit spine.
  Body body = test::standing_body();
  body[kSpineMid] = {0.0, 0.0, 0.0};
  body[kSpineBase] = {0.0, -1.0, 0.0};
  body[kHipLeft] = {-0.1, -0.9, 0.0};
  body[kHipRight] = {0.1, -0.9, 0.0};
  SkeletonFrame frame;
  frame.bodies.push_back(body);
  return frame;
}

}  // namespace

TEST_CASE("canonical pose yields the identity basis") {
  const CanonicalBasis basis = compute_basis(canonical_frame());
  CHECK(basis.origin.x == doctest::Approx(0.0));
  CHECK(basis.origin.y == doctest::Approx(0.0));
  CHECK(basis.scale == doctest::Approx(1.0));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      CHECK(basis.rotation.m[i][j] == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("basis inverts a 90-degree yaw") {
  // Rotate the canonical frame about the vertical axis; the recovered basis
  // applied to any rotated vector must reproduce the unrotated one. The oracle
  // is the brute-force rotation matrix itself.
  const double angle = 3.14159265358979323846 / 2.0;
  const Mat3 q = Mat3::axis_angle({0.0, 1.0, 0.0}, angle);
  SkeletonFrame frame = canonical_frame();
  for (auto& j : frame.bodies[0]) j = (q * Vec3(j)).joint();

  const CanonicalBasis basis = compute_basis(frame);
  CounterRng rng(5);
  for (int i = 0; i < 20; ++i) {
    const Vec3 v(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    const Vec3 rotated = q * v;
    const Vec3 recovered = basis.rotation * rotated;
    CHECK(recovered.x == doctest::Approx(v.x).epsilon(1e-9));
    CHECK(recovered.y == doctest::Approx(v.y).epsilon(1e-9));
    CHECK(recovered.z == doctest::Approx(v.z).epsilon(1e-9));
  }
}

TEST_CASE("basis is orthonormal with det +1") {
  CounterRng rng(21);
  for (int i = 0; i < 50; ++i) {
    const SkeletonSequence seq = test::random_sequence(rng, 1);
    const CanonicalBasis basis = compute_basis(seq.frames[0]);
    const Mat3 should_be_identity = basis.rotation * basis.rotation.transposed();
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        CHECK(std::abs(should_be_identity.m[r][c] - (r == c ? 1.0 : 0.0)) < 1e-9);
      }
    }
    CHECK(std::abs(basis.rotation.det() - 1.0) < 1e-9);
  }
}

TEST_CASE("coincident joints degenerate") {
  SkeletonFrame frame;
  frame.bodies.emplace_back(kJointsPerBody, Joint3D{1.0, 2.0, 3.0});
  CHECK_THROWS_AS(compute_basis(frame), Error);
}

TEST_CASE("degenerate frames fall back to translation only") {
  SkeletonSequence seq;
  seq.frames.resize(1);
  seq.frames[0].bodies.emplace_back(kJointsPerBody, Joint3D{1.0, 2.0, 3.0});
  const SkeletonSequence out = normalize_sequence(seq, NormalizeMode::SequenceBased);
  for (const auto& j : out.frames[0].bodies[0]) {
    CHECK(j.x == doctest::Approx(0.0));
    CHECK(j.y == doctest::Approx(0.0));
    CHECK(j.z == doctest::Approx(0.0));
  }
}

TEST_CASE("sequence-based normalization is view invariant") {
  CounterRng rng(31);
  for (int round = 0; round < 100; ++round) {
    const SkeletonSequence seq = test::random_sequence(rng, 3 + static_cast<int>(rng.uniform_index(5)));
    const Vec3 axis(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    const Mat3 q = Mat3::axis_angle(axis.norm() > 1e-6 ? axis : Vec3{0, 1, 0},
                                    rng.uniform(-3.0, 3.0));
    const Vec3 t(rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0));
    const SkeletonSequence moved = test::rigid_transform(seq, q, t);

    const SkeletonSequence norm_a = normalize_sequence(seq, NormalizeMode::SequenceBased);
    const SkeletonSequence norm_b = normalize_sequence(moved, NormalizeMode::SequenceBased);
    CHECK(max_coord_diff(norm_a, norm_b) < 1e-6);
  }
}

TEST_CASE("normalization is idempotent") {
  CounterRng rng(37);
  for (const NormalizeMode mode : {NormalizeMode::SequenceBased, NormalizeMode::FrameBased}) {
    for (int round = 0; round < 20; ++round) {
      const SkeletonSequence seq = test::random_sequence(rng, 4);
      const SkeletonSequence once = normalize_sequence(seq, mode);
      const SkeletonSequence twice = normalize_sequence(once, mode);
      CHECK(max_coord_diff(once, twice) < 1e-9);
    }
  }
}

TEST_CASE("rigidity: inter-joint distances scale by one factor") {
  CounterRng rng(41);
  const SkeletonSequence seq = test::random_sequence(rng, 3);
  const SkeletonSequence out = normalize_sequence(seq, NormalizeMode::SequenceBased);

  const Body& in0 = seq.frames[1].bodies[0];
  const Body& out0 = out.frames[1].bodies[0];

  // Reference scale from the sequence's first frame spine length.
  const Body& ref = seq.frames[0].bodies[0];
  const double spine = (Vec3(ref[kSpineMid]) - Vec3(ref[kSpineBase])).norm();
  for (int a = 0; a < kJointsPerBody; ++a) {
    for (int b = a + 1; b < kJointsPerBody; ++b) {
      const double before = (Vec3(in0[a]) - Vec3(in0[b])).norm();
      const double after = (Vec3(out0[a]) - Vec3(out0[b])).norm();
      CHECK(std::abs(after - before / spine) < 1e-9);
    }
  }
}

TEST_CASE("frame-based mode produces the treadmill effect") {
  // A body translating forward: frame-based normalization pins every frame's
  // spine-mid to the origin, sequence-based keeps the forward displacement.
  SkeletonSequence seq;
  const Body base = test::standing_body();
  const int frames = 5;
  for (int t = 0; t < frames; ++t) {
    Body body = base;
    for (auto& j : body) j.z += 0.5 * t;
    SkeletonFrame frame;
    frame.bodies.push_back(body);
    seq.frames.push_back(frame);
  }

  const SkeletonSequence per_frame = normalize_sequence(seq, NormalizeMode::FrameBased);
  for (const auto& frame : per_frame.frames) {
    const Joint3D& mid = frame.bodies[0][kSpineMid];
    CHECK(std::abs(mid.x) < 1e-9);
    CHECK(std::abs(mid.y) < 1e-9);
    CHECK(std::abs(mid.z) < 1e-9);
  }

  const SkeletonSequence per_seq = normalize_sequence(seq, NormalizeMode::SequenceBased);
  const double spine =
      (Vec3(base[kSpineMid]) - Vec3(base[kSpineBase])).norm();
  const Joint3D& last_mid = per_seq.frames[frames - 1].bodies[0][kSpineMid];
  const double displacement =
      std::sqrt(last_mid.x * last_mid.x + last_mid.y * last_mid.y + last_mid.z * last_mid.z);
  CHECK(displacement == doctest::Approx(0.5 * (frames - 1) / spine).epsilon(1e-9));
}

TEST_CASE("static canonical sequence is unchanged up to spine scaling") {
  SkeletonFrame frame = canonical_frame();
  SkeletonSequence seq;
  seq.frames = {frame, frame};
  const SkeletonSequence out = normalize_sequence(seq, NormalizeMode::SequenceBased);
  // Spine length is already 1, so this is a fixed point.
  CHECK(max_coord_diff(seq, out) < 1e-12);
}
