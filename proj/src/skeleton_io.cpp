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

#include "skelmap/skeleton.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "skelmap/error.hpp"

namespace skelmap {

namespace {

// Whitespace-token reader over the raw file bytes.
class TokenStream {
 public:
  explicit TokenStream(std::string_view bytes) : bytes_(bytes) {}

  bool next(std::string_view& tok) {
    while (pos_ < bytes_.size() &&
           std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      ++pos_;
    }
    if (pos_ >= bytes_.size()) return false;
    const std::size_t start = pos_;
    while (pos_ < bytes_.size() &&
           !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      ++pos_;
    }
    tok = bytes_.substr(start, pos_ - start);
    return true;
  }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

long long read_int(TokenStream& ts, const char* what) {
  std::string_view tok;
  if (!ts.next(tok)) throw Error(ErrorCode::MalformedHeader, std::string("missing ") + what);
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    throw Error(ErrorCode::MalformedHeader, std::string("unreadable ") + what);
  }
  return value;
}

double read_double(TokenStream& ts, const char* what) {
  std::string_view tok;
  if (!ts.next(tok)) throw Error(ErrorCode::MalformedHeader, std::string("missing ") + what);
  // from_chars<double> is available with gcc>=11; token is not NUL-terminated
  // so strtod needs a copy.
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size() || !std::isfinite(value)) {
    throw Error(ErrorCode::MalformedHeader, std::string("unreadable ") + what);
  }
  return value;
}

struct RawBody {
  long long tracking_id = 0;
  int occurrence = 0;  // disambiguates duplicate ids within one frame
  Body joints;
};

using BodyKey = std::pair<long long, int>;

// Caps keeping fuzzed inputs from requesting absurd allocations.
constexpr long long kMaxFrames = 100000;
constexpr long long kMaxBodiesDeclared = 64;

}  // namespace

int SkeletonSequence::joints_per_body() const {
  for (const auto& frame : frames) {
    if (frame.has_body()) return static_cast<int>(frame.bodies[0].size());
  }
  return 0;
}

int SkeletonSequence::max_bodies() const {
  std::size_t n = 0;
  for (const auto& frame : frames) n = std::max(n, frame.bodies.size());
  return static_cast<int>(n);
}

SkeletonSequence parse_skeleton_file(std::string_view bytes) {
  TokenStream ts(bytes);
  const long long frame_count = read_int(ts, "frame count");
  if (frame_count == 0) throw Error(ErrorCode::EmptySequence, "file declares zero frames");
  if (frame_count < 0 || frame_count > kMaxFrames) {
    throw Error(ErrorCode::MalformedHeader, "frame count out of range");
  }

  std::vector<std::vector<RawBody>> raw_frames;
  raw_frames.reserve(static_cast<std::size_t>(frame_count));
  for (long long f = 0; f < frame_count; ++f) {
    const long long body_count = read_int(ts, "body count");
    if (body_count < 0 || body_count > kMaxBodiesDeclared) {
      throw Error(ErrorCode::MalformedHeader, "body count out of range");
    }
    std::vector<RawBody> bodies;
    std::map<long long, int> seen_ids;
    for (long long b = 0; b < body_count; ++b) {
      RawBody body;
      body.tracking_id = read_int(ts, "tracking id");
      body.occurrence = seen_ids[body.tracking_id]++;
      for (int i = 0; i < 9; ++i) read_double(ts, "body info field");
      const long long joint_count = read_int(ts, "joint count");
      if (joint_count != kJointsPerBody) {
        throw Error(ErrorCode::JointCountMismatch,
                    "body declares " + std::to_string(joint_count) + " joints");
      }
      body.joints.resize(kJointsPerBody);
      for (int j = 0; j < kJointsPerBody; ++j) {
        body.joints[j].x = read_double(ts, "joint x");
        body.joints[j].y = read_double(ts, "joint y");
        body.joints[j].z = read_double(ts, "joint z");
        for (int i = 0; i < 9; ++i) read_double(ts, "joint field");
      }
      bodies.push_back(std::move(body));
    }
    raw_frames.push_back(std::move(bodies));
  }

  // Motion energy per tracked body: sum of joint displacements between
  // consecutive frames where the body is present in both.
  std::map<BodyKey, double> energy;
  std::map<BodyKey, const Body*> previous;
  for (const auto& frame : raw_frames) {
    std::map<BodyKey, const Body*> current;
    for (const auto& body : frame) {
      const BodyKey key{body.tracking_id, body.occurrence};
      energy.emplace(key, 0.0);
      current[key] = &body.joints;
      const auto prev = previous.find(key);
      if (prev != previous.end()) {
        double e = 0.0;
        for (int j = 0; j < kJointsPerBody; ++j) {
          const Joint3D& a = (*prev->second)[j];
          const Joint3D& b = body.joints[j];
          e += std::sqrt((b.x - a.x) * (b.x - a.x) + (b.y - a.y) * (b.y - a.y) +
                         (b.z - a.z) * (b.z - a.z));
        }
        energy[key] += e;
      }
    }
    previous = std::move(current);
  }

  // Keep at most kMaxBodies tracked bodies, highest energy first; ties go to
  // the smaller tracking id so the selection is deterministic.
  std::set<BodyKey> kept;
  if (energy.size() <= static_cast<std::size_t>(kMaxBodies)) {
    for (const auto& [key, e] : energy) kept.insert(key);
  } else {
    std::vector<std::pair<BodyKey, double>> ranked(energy.begin(), energy.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    for (int i = 0; i < kMaxBodies; ++i) kept.insert(ranked[i].first);
  }

  SkeletonSequence seq;
  seq.frames.reserve(raw_frames.size());
  bool any_body = false;
  for (const auto& raw : raw_frames) {
    SkeletonFrame frame;
    for (const auto& body : raw) {
      if (kept.count({body.tracking_id, body.occurrence})) {
        frame.bodies.push_back(body.joints);
      }
    }
    any_body |= frame.has_body();
    seq.frames.push_back(std::move(frame));
  }
  if (!any_body) throw Error(ErrorCode::EmptySequence, "no frame contains a body");
  return seq;
}

namespace {

int parse_padded_field(std::string_view name, std::size_t offset, char tag) {
  if (name[offset] != tag) {
    throw Error(ErrorCode::PatternMismatch,
                std::string("expected '") + tag + "' at offset " + std::to_string(offset));
  }
  int value = 0;
  for (std::size_t i = offset + 1; i < offset + 4; ++i) {
    const char c = name[i];
    if (c < '0' || c > '9') {
      throw Error(ErrorCode::PatternMismatch, "non-digit in field " + std::string(1, tag));
    }
    value = value * 10 + (c - '0');
  }
  if (value < 1) {
    throw Error(ErrorCode::PatternMismatch, std::string("field ") + tag + " must be >= 1");
  }
  return value;
}

}  // namespace

SampleMeta parse_sample_name(std::string_view name) {
  if (name.size() != 20) {
    throw Error(ErrorCode::PatternMismatch,
                "name must be 20 characters, got " + std::to_string(name.size()));
  }
  SampleMeta meta;
  meta.setup_id = parse_padded_field(name, 0, 'S');
  meta.camera_id = parse_padded_field(name, 4, 'C');
  meta.subject_id = parse_padded_field(name, 8, 'P');
  meta.replication_id = parse_padded_field(name, 12, 'R');
  meta.action_id = parse_padded_field(name, 16, 'A');
  if (meta.camera_id > 3) {
    throw Error(ErrorCode::PatternMismatch, "camera id must be 1..3");
  }
  return meta;
}

std::string format_sample_name(const SampleMeta& meta) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "S%03dC%03dP%03dR%03dA%03d", meta.setup_id,
                meta.camera_id, meta.subject_id, meta.replication_id, meta.action_id);
  return buf;
}

int protocol_key(const SampleMeta& meta, Protocol protocol) {
  switch (protocol) {
    case Protocol::CrossSubject: return meta.subject_id;
    case Protocol::CrossView: return meta.camera_id;
    case Protocol::CrossSetup: return meta.setup_id;
  }
  return 0;
}

Split split_dataset(const std::vector<SampleMeta>& samples, Protocol protocol,
                    const SplitConfig& config) {
  const std::set<int> train_keys(config.train_ids.begin(), config.train_ids.end());
  Split split;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (train_keys.count(protocol_key(samples[i], protocol))) {
      split.train.push_back(i);
    } else {
      split.test.push_back(i);
    }
  }
  if (split.train.empty()) throw Error(ErrorCode::EmptyPartition, "train side is empty");
  if (split.test.empty()) throw Error(ErrorCode::EmptyPartition, "test side is empty");
  return split;
}

}  // namespace skelmap
