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

#include "skelmap/augment.hpp"

#include <algorithm>
#include <cmath>

#include "skelmap/error.hpp"
#include "skelmap/geometry.hpp"

namespace skelmap {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct KindInfo {
  AugmentKind kind;
  const char* name;
  AugmentDomain domain;
  bool noise;
};

constexpr KindInfo kKinds[] = {
    {AugmentKind::FlipH, "flip-h", AugmentDomain::Both, false},
    {AugmentKind::FlipV, "flip-v", AugmentDomain::ImageSpace, false},
    {AugmentKind::Rotate, "rotate", AugmentDomain::Both, false},
    {AugmentKind::Zoom, "zoom", AugmentDomain::ImageSpace, false},
    {AugmentKind::ShearX, "shear-x", AugmentDomain::ImageSpace, false},
    {AugmentKind::ShearY, "shear-y", AugmentDomain::ImageSpace, false},
    {AugmentKind::TranslateX, "translate-x", AugmentDomain::ImageSpace, false},
    {AugmentKind::TranslateY, "translate-y", AugmentDomain::ImageSpace, false},
    {AugmentKind::Cutout, "cutout", AugmentDomain::ImageSpace, false},
    {AugmentKind::SaltPepper, "salt-pepper", AugmentDomain::ImageSpace, true},
    {AugmentKind::Salt, "salt", AugmentDomain::ImageSpace, true},
    {AugmentKind::Pepper, "pepper", AugmentDomain::ImageSpace, true},
    {AugmentKind::Gaussian, "gaussian", AugmentDomain::ImageSpace, true},
    {AugmentKind::Speckle, "speckle", AugmentDomain::ImageSpace, true},
    {AugmentKind::Localvars, "localvars", AugmentDomain::ImageSpace, true},
    {AugmentKind::BoneShuffle, "bone-shuffle", AugmentDomain::SkeletonSpace, false},
    {AugmentKind::BoneMask, "bone-mask", AugmentDomain::SkeletonSpace, false},
    {AugmentKind::FrameMask, "frame-mask", AugmentDomain::Both, false},
};

const KindInfo& info(AugmentKind kind) {
  return kKinds[static_cast<int>(kind)];
}

// Inverse-mapped affine resample with bilinear weights and zero padding.
// The inverse map sends an output pixel (y, x) to its source position.
template <typename InverseMap>
SkeletonImage resample(const SkeletonImage& img, InverseMap inverse) {
  SkeletonImage out = SkeletonImage::zeros(img.height, img.width, img.max_value);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      double sy, sx;
      inverse(y, x, sy, sx);
      const int y0 = static_cast<int>(std::floor(sy));
      const int x0 = static_cast<int>(std::floor(sx));
      const double fy = sy - y0;
      const double fx = sx - x0;
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int dy = 0; dy < 2; ++dy) {
          for (int dx = 0; dx < 2; ++dx) {
            const int yy = y0 + dy;
            const int xx = x0 + dx;
            if (yy < 0 || yy >= img.height || xx < 0 || xx >= img.width) continue;
            const double w = (dy ? fy : 1.0 - fy) * (dx ? fx : 1.0 - fx);
            acc += w * img.at(yy, xx, c);
          }
        }
        out.at(y, x, c) = acc;
      }
    }
  }
  return out;
}

SkeletonImage flip_image(const SkeletonImage& img, bool horizontal) {
  SkeletonImage out = SkeletonImage::zeros(img.height, img.width, img.max_value);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const int sy = horizontal ? y : img.height - 1 - y;
      const int sx = horizontal ? img.width - 1 - x : x;
      for (int c = 0; c < 3; ++c) out.at(y, x, c) = img.at(sy, sx, c);
    }
  }
  return out;
}

// Draws k distinct indices from [0, n).
std::vector<std::size_t> draw_subset(CounterRng& rng, std::size_t n, std::size_t k) {
  std::vector<std::size_t> perm = rng.permutation(n);
  perm.resize(std::min(k, n));
  return perm;
}

}  // namespace

AugmentDomain op_domain(AugmentKind kind) { return info(kind).domain; }
bool is_noise_op(AugmentKind kind) { return info(kind).noise; }
const char* augment_kind_name(AugmentKind kind) { return info(kind).name; }

std::optional<AugmentKind> augment_kind_from_name(std::string_view name) {
  for (const auto& k : kKinds) {
    if (name == k.name) return k.kind;
  }
  return std::nullopt;
}

std::vector<AugmentKind> AugmentPolicy::full_catalog() {
  std::vector<AugmentKind> all;
  for (const auto& k : kKinds) all.push_back(k.kind);
  return all;
}

SkeletonImage apply_image_op(const SkeletonImage& img, const AugmentOp& op,
                             CounterRng& rng, const AugmentRanges& ranges) {
  if (op_domain(op.kind) == AugmentDomain::SkeletonSpace) {
    throw Error(ErrorCode::WrongDomain,
                std::string(augment_kind_name(op.kind)) + " is a skeleton-space op");
  }
  if (is_noise_op(op.kind)) return apply_noise_op(img, op, rng, ranges);

  const double cy = (img.height - 1) * 0.5;
  const double cx = (img.width - 1) * 0.5;

  switch (op.kind) {
    case AugmentKind::FlipH:
      return flip_image(img, true);
    case AugmentKind::FlipV:
      return flip_image(img, false);
    case AugmentKind::Rotate: {
      const double angle =
          op.magnitude * ranges.rotate_deg * (kPi / 180.0) * rng.uniform(-1.0, 1.0);
      const double c = std::cos(angle), s = std::sin(angle);
      return resample(img, [&](int y, int x, double& sy, double& sx) {
        const double dy = y - cy, dx = x - cx;
        sy = c * dy - s * dx + cy;
        sx = s * dy + c * dx + cx;
      });
    }
    case AugmentKind::Zoom: {
      const double factor = 1.0 + op.magnitude * ranges.zoom * rng.uniform(-1.0, 1.0);
      return resample(img, [&](int y, int x, double& sy, double& sx) {
        sy = (y - cy) / factor + cy;
        sx = (x - cx) / factor + cx;
      });
    }
    case AugmentKind::ShearX: {
      const double shear = op.magnitude * ranges.shear * rng.uniform(-1.0, 1.0);
      return resample(img, [&](int y, int x, double& sy, double& sx) {
        sy = y;
        sx = x - shear * (y - cy);
      });
    }
    case AugmentKind::ShearY: {
      const double shear = op.magnitude * ranges.shear * rng.uniform(-1.0, 1.0);
      return resample(img, [&](int y, int x, double& sy, double& sx) {
        sy = y - shear * (x - cx);
        sx = x;
      });
    }
    case AugmentKind::TranslateX: {
      const double shift = op.magnitude * ranges.translate * img.width * rng.uniform(-1.0, 1.0);
      return resample(img, [&](int y, int x, double& sy, double& sx) {
        sy = y;
        sx = x - shift;
      });
    }
    case AugmentKind::TranslateY: {
      const double shift = op.magnitude * ranges.translate * img.height * rng.uniform(-1.0, 1.0);
      return resample(img, [&](int y, int x, double& sy, double& sx) {
        sy = y - shift;
        sx = x;
      });
    }
    case AugmentKind::Cutout: {
      const int side = static_cast<int>(
          std::floor(op.magnitude * ranges.cutout * std::min(img.height, img.width)));
      SkeletonImage out = img;
      if (side <= 0) return out;
      const int center_y = static_cast<int>(rng.uniform_index(img.height));
      const int center_x = static_cast<int>(rng.uniform_index(img.width));
      const int y_begin = std::max(0, center_y - side / 2);
      const int x_begin = std::max(0, center_x - side / 2);
      const int y_end = std::min(img.height, center_y - side / 2 + side);
      const int x_end = std::min(img.width, center_x - side / 2 + side);
      for (int y = y_begin; y < y_end; ++y) {
        for (int x = x_begin; x < x_end; ++x) {
          for (int c = 0; c < 3; ++c) out.at(y, x, c) = 0.0;
        }
      }
      return out;
    }
    case AugmentKind::FrameMask: {
      const std::size_t count = static_cast<std::size_t>(
          std::ceil(op.magnitude * ranges.mask_fraction * img.height));
      SkeletonImage out = img;
      for (const std::size_t row : draw_subset(rng, img.height, count)) {
        for (int x = 0; x < img.width; ++x) {
          for (int c = 0; c < 3; ++c) out.at(static_cast<int>(row), x, c) = 0.0;
        }
      }
      return out;
    }
    default:
      throw Error(ErrorCode::WrongDomain,
                  std::string("unhandled image op ") + augment_kind_name(op.kind));
  }
}

SkeletonImage apply_noise_op(const SkeletonImage& img, const AugmentOp& op,
                             CounterRng& rng, const AugmentRanges& ranges) {
  if (!is_noise_op(op.kind)) {
    throw Error(ErrorCode::WrongDomain,
                std::string(augment_kind_name(op.kind)) + " is not a noise op");
  }
  SkeletonImage out = img;
  if (op.magnitude <= 0.0) return out;
  const double max = img.max_value;

  switch (op.kind) {
    case AugmentKind::SaltPepper:
    case AugmentKind::Salt:
    case AugmentKind::Pepper: {
      const double p = op.magnitude * ranges.salt_pepper;
      const std::size_t pixels = img.num_pixels();
      for (std::size_t i = 0; i < pixels; ++i) {
        if (rng.uniform() >= p) continue;
        double value;
        if (op.kind == AugmentKind::Salt) {
          value = max;
        } else if (op.kind == AugmentKind::Pepper) {
          value = 0.0;
        } else {
          value = rng.coin() ? max : 0.0;
        }
        for (int c = 0; c < 3; ++c) out.data[i * 3 + c] = value;
      }
      return out;
    }
    case AugmentKind::Gaussian: {
      const double sigma = op.magnitude * ranges.gaussian_sigma * max;
      for (double& v : out.data) {
        v = std::clamp(v + sigma * rng.normal(), 0.0, max);
      }
      return out;
    }
    case AugmentKind::Speckle: {
      // Factor Poisson(lambda)/lambda has mean 1; variance grows with
      // magnitude through a shrinking lambda.
      const double lambda = 1.0 / (op.magnitude * ranges.speckle);
      const std::size_t pixels = img.num_pixels();
      for (std::size_t i = 0; i < pixels; ++i) {
        const double factor = static_cast<double>(rng.poisson(lambda)) / lambda;
        for (int c = 0; c < 3; ++c) {
          out.data[i * 3 + c] = std::clamp(out.data[i * 3 + c] * factor, 0.0, max);
        }
      }
      return out;
    }
    case AugmentKind::Localvars: {
      const double var_cap = op.magnitude * ranges.localvars;
      for (double& v : out.data) {
        const double sigma = std::sqrt(rng.uniform() * var_cap) * max;
        v = std::clamp(v + sigma * rng.normal(), 0.0, max);
      }
      return out;
    }
    default:
      throw Error(ErrorCode::WrongDomain, "unreachable noise kind");
  }
}

SkeletonSequence apply_skeleton_op(const SkeletonSequence& seq, const AugmentOp& op,
                                   CounterRng& rng, const AugmentRanges& ranges) {
  if (op_domain(op.kind) == AugmentDomain::ImageSpace) {
    throw Error(ErrorCode::WrongDomain,
                std::string(augment_kind_name(op.kind)) + " is an image-space op");
  }
  SkeletonSequence out = seq;
  const int joints = seq.joints_per_body();
  const std::size_t frames = seq.num_frames();

  switch (op.kind) {
    case AugmentKind::FlipH: {
      // Mirror across the vertical plane: negate x, swap left/right joints.
      for (auto& frame : out.frames) {
        for (auto& body : frame.bodies) {
          for (auto& joint : body) joint.x = -joint.x;
          for (const auto& pair : kLeftRightPairs) {
            if (pair[1] < static_cast<int>(body.size())) {
              std::swap(body[pair[0]], body[pair[1]]);
            }
          }
        }
      }
      return out;
    }
    case AugmentKind::Rotate: {
      const double angle =
          op.magnitude * ranges.rotate_deg * (kPi / 180.0) * rng.uniform(-1.0, 1.0);
      const Mat3 rot = Mat3::axis_angle({0.0, 1.0, 0.0}, angle);
      // Fixed rotation center: centroid of the first frame with a body.
      Vec3 center;
      std::size_t count = 0;
      for (const auto& frame : seq.frames) {
        if (!frame.has_body()) continue;
        for (const auto& body : frame.bodies) {
          for (const auto& joint : body) {
            center = center + Vec3(joint);
            ++count;
          }
        }
        break;
      }
      if (count > 0) center = center * (1.0 / static_cast<double>(count));
      for (auto& frame : out.frames) {
        for (auto& body : frame.bodies) {
          for (auto& joint : body) {
            joint = (rot * (Vec3(joint) - center) + center).joint();
          }
        }
      }
      return out;
    }
    case AugmentKind::BoneShuffle: {
      const std::vector<std::size_t> perm = rng.permutation(joints);
      for (auto& frame : out.frames) {
        for (auto& body : frame.bodies) {
          const Body original = body;
          for (int j = 0; j < joints && j < static_cast<int>(body.size()); ++j) {
            body[j] = original[perm[j]];
          }
        }
      }
      return out;
    }
    case AugmentKind::BoneMask: {
      const std::size_t count = static_cast<std::size_t>(
          std::ceil(op.magnitude * ranges.mask_fraction * joints));
      const std::vector<std::size_t> masked = draw_subset(rng, joints, count);
      for (auto& frame : out.frames) {
        for (auto& body : frame.bodies) {
          for (const std::size_t j : masked) {
            if (j < body.size()) body[j] = Joint3D{};
          }
        }
      }
      return out;
    }
    case AugmentKind::FrameMask: {
      const std::size_t count =
          static_cast<std::size_t>(std::ceil(op.magnitude * ranges.mask_fraction * frames));
      for (const std::size_t t : draw_subset(rng, frames, count)) {
        for (auto& body : out.frames[t].bodies) {
          for (auto& joint : body) joint = Joint3D{};
        }
      }
      return out;
    }
    default:
      throw Error(ErrorCode::WrongDomain,
                  std::string("unhandled skeleton op ") + augment_kind_name(op.kind));
  }
}

std::vector<DrawnOp> draw_ops(const AugmentPolicy& policy, CounterRng& rng) {
  const std::size_t n = std::min<std::size_t>(policy.num_ops, policy.catalog.size());
  const std::vector<std::size_t> picks = draw_subset(rng, policy.catalog.size(), n);
  std::vector<DrawnOp> drawn;
  drawn.reserve(n);
  for (const std::size_t idx : picks) {
    const AugmentKind kind = policy.catalog[idx];
    DrawnOp d;
    d.op.kind = kind;
    d.op.magnitude = policy.magnitude_for(kind);
    switch (op_domain(kind)) {
      case AugmentDomain::SkeletonSpace: d.skeleton_space = true; break;
      case AugmentDomain::ImageSpace: d.skeleton_space = false; break;
      case AugmentDomain::Both: d.skeleton_space = rng.coin(); break;
    }
    drawn.push_back(d);
  }
  return drawn;
}

SkeletonImage rand_augment(const SkeletonSequence& seq, const AugmentPolicy& policy,
                           CounterRng& rng) {
  const std::vector<DrawnOp> drawn = draw_ops(policy, rng);

  SkeletonSequence current = seq;
  for (const DrawnOp& d : drawn) {
    if (d.skeleton_space) {
      current = apply_skeleton_op(current, d.op, rng, policy.ranges);
    }
  }
  SkeletonImage img = encode(current, compute_channel_range(current));
  for (const DrawnOp& d : drawn) {
    if (!d.skeleton_space) {
      img = apply_image_op(img, d.op, rng, policy.ranges);
    }
  }
  return img;
}

}  // namespace skelmap
