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

#include "skelmap/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>

#include "skelmap/error.hpp"

namespace skelmap {

ChannelRange compute_channel_range(const SkeletonSequence& seq) {
  ChannelRange range;
  range.c_min = {std::numeric_limits<double>::infinity(),
                 std::numeric_limits<double>::infinity(),
                 std::numeric_limits<double>::infinity()};
  range.c_max = {-std::numeric_limits<double>::infinity(),
                 -std::numeric_limits<double>::infinity(),
                 -std::numeric_limits<double>::infinity()};
  bool any = false;
  for (const auto& frame : seq.frames) {
    for (const auto& body : frame.bodies) {
      for (const auto& joint : body) {
        range.c_min[0] = std::min(range.c_min[0], joint.x);
        range.c_min[1] = std::min(range.c_min[1], joint.y);
        range.c_min[2] = std::min(range.c_min[2], joint.z);
        range.c_max[0] = std::max(range.c_max[0], joint.x);
        range.c_max[1] = std::max(range.c_max[1], joint.y);
        range.c_max[2] = std::max(range.c_max[2], joint.z);
        any = true;
      }
    }
  }
  if (!any) {
    range.c_min = {0.0, 0.0, 0.0};
    range.c_max = {0.0, 0.0, 0.0};
  }
  return range;
}

SkeletonImage encode(const SkeletonSequence& seq, const ChannelRange& range) {
  const int joints = seq.joints_per_body();
  const int height = static_cast<int>(seq.num_frames());
  const int width = joints * kMaxBodies;
  SkeletonImage img = SkeletonImage::zeros(height, width, 255.0);

  std::array<double, 3> span;
  for (int c = 0; c < 3; ++c) span[c] = range.c_max[c] - range.c_min[c];

  for (int t = 0; t < height; ++t) {
    const SkeletonFrame& frame = seq.frames[t];
    const int bodies = std::min<int>(static_cast<int>(frame.bodies.size()), kMaxBodies);
    for (int b = 0; b < bodies; ++b) {
      const Body& body = frame.bodies[b];
      for (int j = 0; j < joints && j < static_cast<int>(body.size()); ++j) {
        const double coord[3] = {body[j].x, body[j].y, body[j].z};
        for (int c = 0; c < 3; ++c) {
          double pixel = 0.0;
          if (span[c] > 0.0) {
            pixel = std::floor(255.0 * (coord[c] - range.c_min[c]) / span[c]);
            pixel = std::clamp(pixel, 0.0, 255.0);
          }
          img.at(t, b * joints + j, c) = pixel;
        }
      }
    }
  }
  return img;
}

namespace {

// Corner-aligned source coordinate for output index i; a single output sample
// takes the source midpoint.
inline double src_coord(int i, int out_n, int in_n) {
  if (out_n <= 1) return (in_n - 1) * 0.5;
  return static_cast<double>(i) * (in_n - 1) / (out_n - 1);
}

}  // namespace

SkeletonImage resize_bilinear(const SkeletonImage& img, int out_h, int out_w) {
  SkeletonImage out = SkeletonImage::zeros(out_h, out_w, 1.0);
  const double inv_max = 1.0 / img.max_value;
  for (int y = 0; y < out_h; ++y) {
    const double sy = src_coord(y, out_h, img.height);
    const int y0 = static_cast<int>(sy);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double fy = sy - y0;
    for (int x = 0; x < out_w; ++x) {
      const double sx = src_coord(x, out_w, img.width);
      const int x0 = static_cast<int>(sx);
      const int x1 = std::min(x0 + 1, img.width - 1);
      const double fx = sx - x0;
      for (int c = 0; c < 3; ++c) {
        const double top = img.at(y0, x0, c) * (1.0 - fx) + img.at(y0, x1, c) * fx;
        const double bot = img.at(y1, x0, c) * (1.0 - fx) + img.at(y1, x1, c) * fx;
        out.at(y, x, c) = (top * (1.0 - fy) + bot * fy) * inv_max;
      }
    }
  }
  return out;
}

std::vector<std::uint8_t> ppm_encode(const SkeletonImage& img) {
  char header[64];
  const int n = std::snprintf(header, sizeof header, "P6\n%d %d\n255\n", img.width, img.height);
  std::vector<std::uint8_t> bytes(header, header + n);
  bytes.reserve(bytes.size() + img.data.size());
  const double scale = 255.0 / img.max_value;
  for (const double v : img.data) {
    const double scaled = img.max_value == 255.0 ? v : std::round(v * scale);
    bytes.push_back(static_cast<std::uint8_t>(std::clamp(scaled, 0.0, 255.0)));
  }
  return bytes;
}

SkeletonImage ppm_decode(const std::vector<std::uint8_t>& bytes) {
  char header[65] = {};
  std::memcpy(header, bytes.data(), std::min<std::size_t>(bytes.size(), 64));
  int w = 0, h = 0, maxval = 0, offset = 0;
  if (std::sscanf(header, "P6\n%d %d\n%d\n%n", &w, &h, &maxval, &offset) != 3 ||
      maxval != 255 || w <= 0 || h <= 0) {
    throw Error(ErrorCode::IoError, "not a P6 ppm with maxval 255");
  }
  const std::size_t need = static_cast<std::size_t>(w) * h * 3;
  if (bytes.size() < static_cast<std::size_t>(offset) + need) {
    throw Error(ErrorCode::IoError, "truncated ppm payload");
  }
  SkeletonImage img = SkeletonImage::zeros(h, w, 255.0);
  for (std::size_t i = 0; i < need; ++i) {
    img.data[i] = static_cast<double>(bytes[offset + i]);
  }
  return img;
}

}  // namespace skelmap
