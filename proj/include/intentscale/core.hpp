// Copyright 2026 The IntentScale Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace intentscale {

using Vec3 = Eigen::Vector3d;

// Error codes shared by every module. Each maps to one failure class named
// in the public contracts (ordering violations, bad numeric input, ...).
enum class Errc {
  ordering,
  non_finite,
  insufficient_data,
  degenerate_data,
  ambiguous_label,
  range,
  constraint,
  malformed,
  unknown_type,
  schema,
  version_mismatch,
  io,
  usage,
};

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::ordering: return "ordering";
    case Errc::non_finite: return "non_finite";
    case Errc::insufficient_data: return "insufficient_data";
    case Errc::degenerate_data: return "degenerate_data";
    case Errc::ambiguous_label: return "ambiguous_label";
    case Errc::range: return "range";
    case Errc::constraint: return "constraint";
    case Errc::malformed: return "malformed";
    case Errc::unknown_type: return "unknown_type";
    case Errc::schema: return "schema";
    case Errc::version_mismatch: return "version_mismatch";
    case Errc::io: return "io";
    case Errc::usage: return "usage";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

enum class MotionLabel { coarse, fine };

constexpr std::string_view to_string(MotionLabel label) noexcept {
  return label == MotionLabel::coarse ? "coarse" : "fine";
}

inline MotionLabel label_from_string(std::string_view s) {
  if (s == "coarse") return MotionLabel::coarse;
  if (s == "fine") return MotionLabel::fine;
  throw Error(Errc::schema, "unknown motion label '" + std::string(s) + "'");
}

// The three per-feature models are indexed in this order everywhere.
enum class FeatureKind { speed = 0, alignness = 1, displacement = 2 };

inline constexpr std::array<FeatureKind, 3> kFeatureKinds = {
    FeatureKind::speed, FeatureKind::alignness, FeatureKind::displacement};

constexpr std::size_t index_of(FeatureKind kind) noexcept {
  return static_cast<std::size_t>(kind);
}

constexpr std::string_view to_string(FeatureKind kind) noexcept {
  switch (kind) {
    case FeatureKind::speed: return "speed";
    case FeatureKind::alignness: return "alignness";
    case FeatureKind::displacement: return "displacement";
  }
  return "unknown";
}

inline FeatureKind feature_kind_from_string(std::string_view s) {
  for (auto kind : kFeatureKinds) {
    if (to_string(kind) == s) return kind;
  }
  throw Error(Errc::schema, "unknown feature kind '" + std::string(s) + "'");
}

inline bool all_finite(const Vec3& v) noexcept { return v.allFinite(); }

inline Vec3 make_vec3(double x, double y, double z = 0.0) { return Vec3(x, y, z); }

}  // namespace intentscale
