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

#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace skelmap {

// Kinect-v2 skeleton layout used by the NTU capture files.
inline constexpr int kJointsPerBody = 25;
inline constexpr int kMaxBodies = 2;

// Joint indices of the 25-joint layout that the geometry code relies on.
enum JointIndex : int {
  kSpineBase = 0,
  kSpineMid = 1,
  kNeck = 2,
  kHead = 3,
  kShoulderLeft = 4,
  kElbowLeft = 5,
  kWristLeft = 6,
  kHandLeft = 7,
  kShoulderRight = 8,
  kElbowRight = 9,
  kWristRight = 10,
  kHandRight = 11,
  kHipLeft = 12,
  kKneeLeft = 13,
  kAnkleLeft = 14,
  kFootLeft = 15,
  kHipRight = 16,
  kKneeRight = 17,
  kAnkleRight = 18,
  kFootRight = 19,
  kSpineShoulder = 20,
  kHandTipLeft = 21,
  kThumbLeft = 22,
  kHandTipRight = 23,
  kThumbRight = 24,
};

// (left, right) joint pairs swapped by a horizontal skeleton flip.
inline constexpr std::array<std::array<int, 2>, 10> kLeftRightPairs = {{
    {kShoulderLeft, kShoulderRight},
    {kElbowLeft, kElbowRight},
    {kWristLeft, kWristRight},
    {kHandLeft, kHandRight},
    {kHipLeft, kHipRight},
    {kKneeLeft, kKneeRight},
    {kAnkleLeft, kAnkleRight},
    {kFootLeft, kFootRight},
    {kHandTipLeft, kHandTipRight},
    {kThumbLeft, kThumbRight},
}};

struct Joint3D {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

using Body = std::vector<Joint3D>;  // one entry per joint

struct SkeletonFrame {
  std::vector<Body> bodies;  // 0..kMaxBodies entries

  bool has_body() const { return !bodies.empty(); }
};

struct SampleMeta {
  int setup_id = 1;
  int camera_id = 1;
  int subject_id = 1;
  int replication_id = 1;
  int action_id = 1;
};

struct SkeletonSequence {
  std::vector<SkeletonFrame> frames;
  SampleMeta meta;

  std::size_t num_frames() const { return frames.size(); }

  // Joints per body; uniform across the sequence. Parsed data always has 25,
  // synthetic sequences may use fewer.
  int joints_per_body() const;

  // Largest body count over all frames (0..kMaxBodies).
  int max_bodies() const;
};

// --- parsing ---------------------------------------------------------------

// Parses the text skeleton capture format: frame count, then per frame a body
// count, and per body an info line, a joint count and one 12-field line per
// joint of which only x y z are kept. Bodies beyond kMaxBodies are dropped,
// keeping the two with the highest total frame-to-frame motion energy.
// Throws Error{MalformedHeader | JointCountMismatch | EmptySequence}.
SkeletonSequence parse_skeleton_file(std::string_view bytes);

// "S001C002P003R002A013" -> meta; throws Error{PatternMismatch}.
SampleMeta parse_sample_name(std::string_view name);

// Canonical name string; inverse of parse_sample_name.
std::string format_sample_name(const SampleMeta& meta);

// --- dataset splits ---------------------------------------------------------

enum class Protocol { CrossSubject, CrossView, CrossSetup };

struct SplitConfig {
  // IDs of the protocol key (subject/camera/setup) that go to the train side.
  std::vector<int> train_ids;
};

struct Split {
  std::vector<std::size_t> train;  // indices into the input sample list
  std::vector<std::size_t> test;
};

// Partitions samples by the protocol's key field. Every sample lands in
// exactly one side. Throws Error{EmptyPartition} when a side is empty.
Split split_dataset(const std::vector<SampleMeta>& samples, Protocol protocol,
                    const SplitConfig& config);

// The key field the protocol partitions on.
int protocol_key(const SampleMeta& meta, Protocol protocol);

}  // namespace skelmap
