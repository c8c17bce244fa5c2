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

#include "skelmap/geometry.hpp"
#include "skelmap/skeleton.hpp"

namespace skelmap {

enum class NormalizeMode { None, FrameBased, SequenceBased };

// Body-anchored canonical frame: a point is normalized as
//   p' = rotation * (p - origin) / scale.
struct CanonicalBasis {
  Vec3 origin;                  // spine-mid of the anchor body
  Mat3 rotation;                // orthonormal, det +1
  double scale = 1.0;           // spine-base -> spine-mid distance
  bool translation_only = false;  // degenerate geometry fallback
};

// Builds the canonical basis from the frame's first body: hip-left->hip-right
// maps to +x, the Gram-Schmidt-orthogonalized spine-base->spine-mid vector to
// +y, and x cross y to +z. Throws Error{DegenerateBasis} when the hip and
// spine vectors are parallel within 1e-8 or either has norm < 1e-8.
CanonicalBasis compute_basis(const SkeletonFrame& frame);

// FrameBased: each frame is transformed by its own basis. SequenceBased: the
// first frame containing a body anchors the whole sequence. Degenerate frames
// fall back to translation-only (identity rotation, unit scale) instead of
// failing. None returns the input unchanged.
SkeletonSequence normalize_sequence(const SkeletonSequence& seq, NormalizeMode mode);

}  // namespace skelmap
