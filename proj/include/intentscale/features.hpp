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

// Motion-scale features computed from the clutched trajectory window:
//
//   speed        |v|                       high for coarse, low for fine
//   alignness    |v/|v| . u_tool|          ~0 for coarse, ~1 for fine
//   displacement |sum of dx over window|   high for coarse, low for fine
//
// Everything here is a pure function of an immutable window snapshot.

#include "intentscale/core.hpp"
#include "intentscale/trajectory.hpp"

#include <algorithm>

namespace intentscale {

struct FeatureParams {
  std::size_t velocity_steps = 5;   // finite-difference steps averaged for v
  double hold_speed = 1e-4;         // below this |v| alignness holds its last value
  double initial_alignness = 0.5;
};

struct KinematicEstimate {
  Vec3 velocity = Vec3::Zero();
  Vec3 tool_dir = Vec3::UnitY();
  double last_alignness = 0.5;
};

struct FeatureVector {
  double speed = 0.0;
  double alignness = 0.0;
  double displacement = 0.0;
  double t = 0.0;

  double operator[](FeatureKind kind) const noexcept {
    switch (kind) {
      case FeatureKind::speed: return speed;
      case FeatureKind::alignness: return alignness;
      case FeatureKind::displacement: return displacement;
    }
    return 0.0;
  }

  bool operator==(const FeatureVector&) const = default;
};

// Mean of the per-step finite differences over the last `steps` steps (fewer
// when the window is shorter).
inline Vec3 estimate_velocity(const TrajectoryWindow& window, std::size_t steps = 5) {
  if (window.size() < 2) {
    throw Error(Errc::insufficient_data, "velocity needs at least 2 samples");
  }
  if (steps == 0) throw Error(Errc::range, "velocity_steps must be positive");
  const std::size_t n = window.size();
  const std::size_t k = std::min(steps, n - 1);
  Vec3 sum = Vec3::Zero();
  for (std::size_t i = n - k; i < n; ++i) {
    const auto& a = window[i - 1];
    const auto& b = window[i];
    sum += (b.position - a.position) / (b.t - a.t);
  }
  return sum / static_cast<double>(k);
}

inline double compute_alignness(const Vec3& velocity, const Vec3& tool_dir, double last,
                                double hold_speed = 1e-4) {
  const double speed = velocity.norm();
  if (speed < hold_speed) return last;
  const double a = std::abs(velocity.dot(tool_dir) / speed);
  return std::clamp(a, 0.0, 1.0);
}

inline FeatureVector extract_features(const TrajectoryWindow& window, const KinematicEstimate& kin,
                                      const FeatureParams& params = {}) {
  const Vec3 v = estimate_velocity(window, params.velocity_steps);
  FeatureVector f;
  f.t = window.back().t;
  f.speed = v.norm();
  f.alignness = compute_alignness(v, kin.tool_dir, kin.last_alignness, params.hold_speed);
  // Net displacement; the per-step deltas telescope to last - origin.
  f.displacement = (window.back().position - window.origin()).norm();
  return f;
}

}  // namespace intentscale
