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

#include "intentscale/core.hpp"

#include <cstdint>
#include <deque>
#include <optional>
#include <string>

namespace intentscale {

// One leader-arm end-effector reading, tick-aligned at the nominal rate.
struct PoseSample {
  double t = 0.0;
  Vec3 position = Vec3::Zero();
  bool clutch = false;
};

// Fixed-capacity window over the current clutched segment. Eviction is
// oldest-first; the owner clears it on every clutch press.
class TrajectoryWindow {
 public:
  static constexpr std::size_t kDefaultCapacity = 100;

  explicit TrajectoryWindow(std::size_t capacity = kDefaultCapacity) : capacity_(capacity) {
    if (capacity_ < 2) throw Error(Errc::range, "trajectory window capacity must be >= 2");
  }

  void push(const PoseSample& s) {
    if (!all_finite(s.position) || !std::isfinite(s.t)) {
      throw Error(Errc::non_finite, "pose sample contains non-finite values");
    }
    if (!samples_.empty() && !(s.t > samples_.back().t)) {
      throw Error(Errc::ordering, "pose sample at t=" + std::to_string(s.t) +
                                      " does not follow t=" + std::to_string(samples_.back().t));
    }
    if (samples_.size() == capacity_) {
      evicted_ = samples_.front().position;
      samples_.pop_front();
    }
    samples_.push_back(s);
  }

  void clear() noexcept {
    samples_.clear();
    evicted_.reset();
  }

  // Start point of the retained step sequence: the most recently evicted
  // sample once the window has rolled over, otherwise the oldest sample.
  // A full window therefore spans exactly capacity() steps.
  Vec3 origin() const { return evicted_ ? *evicted_ : samples_.front().position; }

  std::size_t size() const noexcept { return samples_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  bool empty() const noexcept { return samples_.empty(); }
  bool full() const noexcept { return samples_.size() == capacity_; }

  const PoseSample& operator[](std::size_t i) const { return samples_[i]; }
  const PoseSample& front() const { return samples_.front(); }
  const PoseSample& back() const { return samples_.back(); }

  auto begin() const noexcept { return samples_.begin(); }
  auto end() const noexcept { return samples_.end(); }

 private:
  std::size_t capacity_;
  std::deque<PoseSample> samples_;
  std::optional<Vec3> evicted_;
};

enum class ClutchPhase { unclutched, clutched };
enum class ClutchEvent { none, pressed, released };

constexpr std::string_view to_string(ClutchEvent e) noexcept {
  switch (e) {
    case ClutchEvent::none: return "none";
    case ClutchEvent::pressed: return "pressed";
    case ClutchEvent::released: return "released";
  }
  return "unknown";
}

// Anchors are engaged iff phase == clutched.
struct ClutchState {
  ClutchPhase phase = ClutchPhase::unclutched;
  std::optional<Vec3> leader_anchor;
  std::optional<Vec3> follower_anchor;
  std::uint64_t clutch_count = 0;

  bool clutched() const noexcept { return phase == ClutchPhase::clutched; }
};

struct ClutchTransition {
  ClutchState state;
  ClutchEvent event = ClutchEvent::none;
};

inline ClutchTransition clutch_transition(const ClutchState& state, bool pressed, const Vec3& leader,
                                         const Vec3& follower) {
  ClutchTransition out{state, ClutchEvent::none};
  if (!state.clutched() && pressed) {
    out.state.phase = ClutchPhase::clutched;
    out.state.leader_anchor = leader;
    out.state.follower_anchor = follower;
    ++out.state.clutch_count;
    out.event = ClutchEvent::pressed;
  } else if (state.clutched() && !pressed) {
    out.state.phase = ClutchPhase::unclutched;
    out.state.leader_anchor.reset();
    out.state.follower_anchor.reset();
    out.event = ClutchEvent::released;
  }
  return out;
}

// Follower end-effector plus its tool tip. The tool is rigidly attached and
// never rotates (position-only teleoperation).
struct FollowerState {
  Vec3 position = Vec3::Zero();
  Vec3 tool_tip = Vec3(0.0, 0.05, 0.0);

  static FollowerState with_tool(const Vec3& position, const Vec3& tool_direction, double tool_length) {
    if (!(tool_length > 0.0) || tool_direction.norm() == 0.0) {
      throw Error(Errc::range, "tool must have positive length and nonzero direction");
    }
    return {position, position + tool_length * tool_direction.normalized()};
  }

  Vec3 tool_direction() const { return (tool_tip - position).normalized(); }
};

// Incremental motion scaling: x_F += s * delta_leader while clutched.
inline FollowerState integrate_follower(const FollowerState& fs, const Vec3& leader_delta, double scale,
                                        ClutchPhase phase) {
  if (!all_finite(leader_delta)) throw Error(Errc::non_finite, "leader delta is not finite");
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw Error(Errc::range, "motion scale must be positive and finite");
  }
  if (phase != ClutchPhase::clutched) return fs;
  const Vec3 step = scale * leader_delta;
  return {fs.position + step, fs.tool_tip + step};
}

}  // namespace intentscale
