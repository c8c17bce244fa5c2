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

#include "skelmap/normalize.hpp"

#include <cmath>

#include "skelmap/error.hpp"

namespace skelmap {

namespace {

constexpr double kDegenerateEps = 1e-8;

CanonicalBasis translation_only_basis(const Body& body) {
  CanonicalBasis basis;
  basis.origin = body.size() > kSpineMid ? Vec3(body[kSpineMid]) : Vec3(body[0]);
  basis.rotation = Mat3::identity();
  basis.scale = 1.0;
  basis.translation_only = true;
  return basis;
}

CanonicalBasis basis_or_fallback(const SkeletonFrame& frame) {
  try {
    return compute_basis(frame);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateBasis) throw;
    return translation_only_basis(frame.bodies[0]);
  }
}

Joint3D apply_basis(const CanonicalBasis& basis, const Joint3D& p) {
  const Vec3 v = basis.rotation * (Vec3(p) - basis.origin);
  return (v * (1.0 / basis.scale)).joint();
}

}  // namespace

CanonicalBasis compute_basis(const SkeletonFrame& frame) {
  if (!frame.has_body()) {
    throw Error(ErrorCode::DegenerateBasis, "frame has no body");
  }
  const Body& body = frame.bodies[0];
  if (body.size() <= static_cast<std::size_t>(kHipRight)) {
    throw Error(ErrorCode::DegenerateBasis, "body lacks anchor joints");
  }

  const Vec3 spine_base(body[kSpineBase]);
  const Vec3 spine_mid(body[kSpineMid]);
  const Vec3 hip_vec = Vec3(body[kHipRight]) - Vec3(body[kHipLeft]);
  const Vec3 spine_vec = spine_mid - spine_base;

  const double hip_norm = hip_vec.norm();
  const double spine_norm = spine_vec.norm();
  if (hip_norm < kDegenerateEps || spine_norm < kDegenerateEps) {
    throw Error(ErrorCode::DegenerateBasis, "anchor vector near zero");
  }

  const Vec3 x_axis = hip_vec * (1.0 / hip_norm);
  // Gram-Schmidt: remove the hip component from the spine direction.
  const Vec3 spine_ortho = spine_vec - x_axis * spine_vec.dot(x_axis);
  if (spine_ortho.norm() < kDegenerateEps * spine_norm) {
    throw Error(ErrorCode::DegenerateBasis, "hip and spine vectors parallel");
  }
  const Vec3 y_axis = spine_ortho.normalized();
  const Vec3 z_axis = x_axis.cross(y_axis);

  CanonicalBasis basis;
  basis.origin = spine_mid;
  basis.rotation = Mat3::from_rows(x_axis, y_axis, z_axis);
  basis.scale = spine_norm;
  return basis;
}

SkeletonSequence normalize_sequence(const SkeletonSequence& seq, NormalizeMode mode) {
  if (mode == NormalizeMode::None) return seq;

  SkeletonSequence out;
  out.meta = seq.meta;
  out.frames.resize(seq.frames.size());

  CanonicalBasis sequence_basis;
  bool have_sequence_basis = false;
  if (mode == NormalizeMode::SequenceBased) {
    for (const auto& frame : seq.frames) {
      if (frame.has_body()) {
        sequence_basis = basis_or_fallback(frame);
        have_sequence_basis = true;
        break;
      }
    }
  }

  for (std::size_t t = 0; t < seq.frames.size(); ++t) {
    const SkeletonFrame& frame = seq.frames[t];
    if (!frame.has_body()) continue;
    const CanonicalBasis basis = mode == NormalizeMode::SequenceBased
                                     ? (have_sequence_basis ? sequence_basis
                                                            : translation_only_basis(frame.bodies[0]))
                                     : basis_or_fallback(frame);
    for (const Body& body : frame.bodies) {
      Body normalized(body.size());
      for (std::size_t j = 0; j < body.size(); ++j) {
        normalized[j] = apply_basis(basis, body[j]);
      }
      out.frames[t].bodies.push_back(std::move(normalized));
    }
  }
  return out;
}

}  // namespace skelmap
