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
#include <cstdint>
#include <string>
#include <vector>

#include "skelmap/skeleton.hpp"

namespace skelmap {

// Spatiotemporal map of one sequence: rows index frames, columns index joints
// (body 0 then body 1), channels hold (x, y, z). Pixels are stored as doubles;
// max_value says which range they live in: 255 straight out of the encoder
// (integer-valued), 1 after resizing to the unit interval.
struct SkeletonImage {
  int height = 0;
  int width = 0;
  std::vector<double> data;  // row-major [height][width][3]
  double max_value = 255.0;

  static constexpr int kChannels = 3;

  static SkeletonImage zeros(int h, int w, double max_value = 255.0) {
    SkeletonImage img;
    img.height = h;
    img.width = w;
    img.max_value = max_value;
    img.data.assign(static_cast<std::size_t>(h) * w * kChannels, 0.0);
    return img;
  }

  double& at(int y, int x, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * kChannels + c];
  }
  double at(int y, int x, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * kChannels + c];
  }

  std::size_t num_pixels() const {
    return static_cast<std::size_t>(height) * width;
  }
};

// Per-channel (x, y, z) extrema over every retained joint of a sequence.
struct ChannelRange {
  std::array<double, 3> c_min{0.0, 0.0, 0.0};
  std::array<double, 3> c_max{0.0, 0.0, 0.0};
};

// Min/max per channel over all present joints of all frames and bodies;
// missing-body slots contribute nothing.
ChannelRange compute_channel_range(const SkeletonSequence& seq);

// pixel(t, j, c) = floor(255 * (coord - c_min[c]) / (c_max[c] - c_min[c])).
// Row t is frame t; columns [0, J) hold body 0, [J, 2J) body 1; absent bodies
// fill with 0, as does any channel with c_max == c_min.
SkeletonImage encode(const SkeletonSequence& seq, const ChannelRange& range);

// Corner-aligned bilinear resize. Input is first rescaled to [0, 1] by
// dividing by its max_value; output has max_value = 1.
SkeletonImage resize_bilinear(const SkeletonImage& img, int out_h, int out_w);

// Binary PPM (P6, maxval 255). Unit-range images are scaled back to 0..255
// with round-to-nearest. write returns the encoded bytes; the file variants
// go through the atomic writer in io.hpp.
std::vector<std::uint8_t> ppm_encode(const SkeletonImage& img);
SkeletonImage ppm_decode(const std::vector<std::uint8_t>& bytes);

}  // namespace skelmap
