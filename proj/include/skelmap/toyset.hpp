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

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "skelmap/skeleton.hpp"

namespace skelmap {

// Synthetic 5-class motion benchmark, generated (never shipped as data):
//   action 1: sinusoidal lateral arm raise
//   action 2: walk with swinging limbs
//   action 3: rotation in place
//   action 4: squat oscillation
//   action 5: still pose with jitter
// Every sample gets a random rigid world placement, so the view-normalization
// stage has real work to do. Pure function of the config.
struct ToyConfig {
  int num_classes = 5;
  int samples_per_class = 60;
  int min_frames = 40;
  int max_frames = 80;
  std::uint64_t seed = 7;
};

struct ToySample {
  std::string name;  // canonical S...C...P...R...A... sample name
  SkeletonSequence seq;
};

std::vector<ToySample> generate_toy_dataset(const ToyConfig& config);

// Renders a sequence in the text capture format understood by
// parse_skeleton_file; byte-stable across runs.
std::string serialize_skeleton_file(const SkeletonSequence& seq);

}  // namespace skelmap
