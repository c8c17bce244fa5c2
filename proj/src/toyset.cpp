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

#include "skelmap/toyset.hpp"

#include <cmath>
#include <cstdio>

#include "skelmap/geometry.hpp"
#include "skelmap/rng.hpp"

namespace skelmap {

namespace {

constexpr double kTau = 6.28318530717958647692;

// Standing rest pose, meters, centered at the spine base. +y is up, +z is the
// facing direction.
Body rest_pose() {
  Body body(kJointsPerBody);
  auto set = [&](int j, double x, double y, double z) { body[j] = {x, y, z}; };
  set(kSpineBase, 0.00, 0.00, 0.00);
  set(kSpineMid, 0.00, 0.30, 0.00);
  set(kSpineShoulder, 0.00, 0.52, 0.00);
  set(kNeck, 0.00, 0.60, 0.00);
  set(kHead, 0.00, 0.74, 0.00);
  set(kShoulderLeft, -0.20, 0.50, 0.00);
  set(kElbowLeft, -0.26, 0.26, 0.00);
  set(kWristLeft, -0.28, 0.04, 0.00);
  set(kHandLeft, -0.29, -0.03, 0.00);
  set(kHandTipLeft, -0.295, -0.09, 0.00);
  set(kThumbLeft, -0.26, -0.02, 0.03);
  set(kShoulderRight, 0.20, 0.50, 0.00);
  set(kElbowRight, 0.26, 0.26, 0.00);
  set(kWristRight, 0.28, 0.04, 0.00);
  set(kHandRight, 0.29, -0.03, 0.00);
  set(kHandTipRight, 0.295, -0.09, 0.00);
  set(kThumbRight, 0.26, -0.02, 0.03);
  set(kHipLeft, -0.09, -0.06, 0.00);
  set(kKneeLeft, -0.10, -0.50, 0.03);
  set(kAnkleLeft, -0.10, -0.92, 0.00);
  set(kFootLeft, -0.10, -0.97, 0.12);
  set(kHipRight, 0.09, -0.06, 0.00);
  set(kKneeRight, 0.10, -0.50, 0.03);
  set(kAnkleRight, 0.10, -0.92, 0.00);
  set(kFootRight, 0.10, -0.97, 0.12);
  return body;
}

constexpr int kRightArm[] = {kElbowRight, kWristRight, kHandRight, kHandTipRight, kThumbRight};
constexpr int kLeftLeg[] = {kKneeLeft, kAnkleLeft, kFootLeft};
constexpr int kRightLeg[] = {kKneeRight, kAnkleRight, kFootRight};
constexpr int kLeftArm[] = {kElbowLeft, kWristLeft, kHandLeft, kHandTipLeft, kThumbLeft};

void rotate_about(Body& body, const int* joints, int count, const Vec3& pivot,
                  const Vec3& axis, double angle) {
  const Mat3 rot = Mat3::axis_angle(axis, angle);
  for (int i = 0; i < count; ++i) {
    Joint3D& j = body[joints[i]];
    j = (rot * (Vec3(j) - pivot) + pivot).joint();
  }
}

// phase in [0, 1) over the sequence.
Body pose_for_class(int label, double phase, const Body& rest, CounterRng& jitter,
                    double amp, double freq) {
  Body body = rest;
  switch (label) {
    case 0: {  // lateral arm raise
      const double angle = amp * 1.2 * std::sin(kTau * freq * phase);
      rotate_about(body, kRightArm, 5, Vec3(rest[kShoulderRight]), {0.0, 0.0, 1.0}, angle);
      break;
    }
    case 1: {  // walk along +z with antiphase leg/arm swing
      const double stride = amp * 0.35 * std::sin(kTau * freq * 2.0 * phase);
      const double travel = amp * 2.0 * phase;
      rotate_about(body, kLeftLeg, 3, Vec3(rest[kHipLeft]), {1.0, 0.0, 0.0}, stride);
      rotate_about(body, kRightLeg, 3, Vec3(rest[kHipRight]), {1.0, 0.0, 0.0}, -stride);
      rotate_about(body, kLeftArm, 4, Vec3(rest[kShoulderLeft]), {1.0, 0.0, 0.0}, -stride * 0.7);
      rotate_about(body, kRightArm, 5, Vec3(rest[kShoulderRight]), {1.0, 0.0, 0.0}, stride * 0.7);
      for (auto& j : body) j.z += travel;
      break;
    }
    case 2: {  // rotation in place about the vertical axis
      const double angle = amp * kTau * 0.5 * phase * freq;
      const Mat3 rot = Mat3::axis_angle({0.0, 1.0, 0.0}, angle);
      for (auto& j : body) j = (rot * Vec3(j)).joint();
      break;
    }
    case 3: {  // squat oscillation: everything above the ankles dips
      const double dip = amp * 0.28 * (0.5 - 0.5 * std::cos(kTau * freq * phase));
      for (int j = 0; j < kJointsPerBody; ++j) {
        const double height = body[j].y + 0.97;  // 0 at the ankles
        body[j].y -= dip * std::min(1.0, std::max(0.0, height));
        if (j == kKneeLeft || j == kKneeRight) body[j].z += dip * 0.6;
      }
      break;
    }
    default: {  // still pose; only the per-frame jitter below moves it
      break;
    }
  }
  const double sigma = label == 4 ? 0.012 : 0.004;
  for (auto& j : body) {
    j.x += sigma * jitter.normal();
    j.y += sigma * jitter.normal();
    j.z += sigma * jitter.normal();
  }
  return body;
}

}  // namespace

std::vector<ToySample> generate_toy_dataset(const ToyConfig& config) {
  std::vector<ToySample> samples;
  const Body rest = rest_pose();
  for (int label = 0; label < config.num_classes; ++label) {
    for (int i = 0; i < config.samples_per_class; ++i) {
      CounterRng rng = CounterRng::substream(config.seed, 0x746f79, label, i);
      const int frames =
          config.min_frames +
          static_cast<int>(rng.uniform_index(config.max_frames - config.min_frames + 1));
      const double amp = rng.uniform(0.8, 1.2);
      const double freq = rng.uniform(0.9, 1.6);

      // Random rigid world placement; normalization is expected to undo it.
      const double yaw = rng.uniform(-0.8, 0.8);
      const Mat3 world = Mat3::axis_angle({0.0, 1.0, 0.0}, yaw);
      const Vec3 translation(rng.uniform(-2.0, 2.0), rng.uniform(-0.3, 0.3),
                             rng.uniform(2.0, 4.0));
      const double scale = rng.uniform(0.9, 1.1);

      SkeletonSequence seq;
      seq.frames.resize(frames);
      for (int t = 0; t < frames; ++t) {
        const double phase = static_cast<double>(t) / frames;
        Body body = pose_for_class(label, phase, rest, rng, amp, freq);
        for (auto& j : body) {
          j = (world * (Vec3(j) * scale) + translation).joint();
        }
        seq.frames[t].bodies.push_back(std::move(body));
      }

      SampleMeta meta;
      meta.setup_id = (i % 17) + 1;
      meta.camera_id = (i % 3) + 1;
      meta.subject_id = (i % 20) + 1;
      meta.replication_id = (i / 20) + 1;
      meta.action_id = label + 1;
      seq.meta = meta;

      ToySample sample;
      sample.name = format_sample_name(meta);
      sample.seq = std::move(seq);
      samples.push_back(std::move(sample));
    }
  }
  return samples;
}

std::string serialize_skeleton_file(const SkeletonSequence& seq) {
  std::string out = std::to_string(seq.num_frames()) + "\n";
  char buf[192];
  for (const auto& frame : seq.frames) {
    out += std::to_string(frame.bodies.size()) + "\n";
    int body_id = 1;
    for (const auto& body : frame.bodies) {
      // tracking id + 8 state fields + tracking state
      std::snprintf(buf, sizeof buf, "%d 0 0 0 0 0 0 0 0 2\n", body_id++);
      out += buf;
      out += std::to_string(body.size()) + "\n";
      for (const auto& j : body) {
        std::snprintf(buf, sizeof buf, "%.6f %.6f %.6f 0 0 0 0 1 0 0 0 2\n", j.x, j.y, j.z);
        out += buf;
      }
    }
  }
  return out;
}

}  // namespace skelmap
