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

// Per-tick intent recognition: features -> three per-feature memberships ->
// averaged and argmax-selected label -> target scale -> first-order
// low-pass filter
//
//   s_intent = (1 - rho) * s_prev + rho * s_target

#include "intentscale/fcm.hpp"
#include "intentscale/features.hpp"
#include "intentscale/params.hpp"
#include "intentscale/trajectory.hpp"

#include <array>
#include <optional>
#include <span>

namespace intentscale {

// One model per feature, indexed by FeatureKind. Empty slots are untrained.
using IntentModels = std::array<std::optional<FcmModel>, 3>;

inline bool all_trained(const IntentModels& models) noexcept {
  for (const auto& m : models) {
    if (!m || !m->labeled()) return false;
  }
  return true;
}

struct ScalingState {
  double s_prev = 1.0;
  double s_intent = 1.0;
  MotionLabel last_label = MotionLabel::fine;
  double rho = 0.05;

  // Session start: sit at the fine scale.
  static ScalingState initial(const ControllerParams& params) {
    return {params.s_fine, params.s_fine, MotionLabel::fine, params.rho};
  }

  bool operator==(const ScalingState&) const = default;
};

struct FusedSelection {
  MembershipPair fused;
  MotionLabel label = MotionLabel::fine;
};

inline constexpr double kTieTolerance = 1e-12;

// Component-wise mean and argmax. An exact tie keeps the previous label.
inline FusedSelection fuse_and_select(std::span<const MembershipPair, 3> pairs, MotionLabel last_label) {
  FusedSelection out;
  for (const auto& p : pairs) {
    out.fused.coarse += p.coarse;
    out.fused.fine += p.fine;
  }
  out.fused.coarse /= 3.0;
  out.fused.fine /= 3.0;
  const double diff = out.fused.coarse - out.fused.fine;
  if (std::abs(diff) < kTieTolerance) {
    out.label = last_label;
  } else {
    out.label = diff > 0.0 ? MotionLabel::coarse : MotionLabel::fine;
  }
  return out;
}

inline ScalingState lpf_step(const ScalingState& state, double s_target) {
  if (!(s_target > 0.0)) throw Error(Errc::range, "target scale must be positive");
  ScalingState next = state;
  next.s_intent = (1.0 - state.rho) * state.s_prev + state.rho * s_target;
  next.s_prev = next.s_intent;
  return next;
}

inline double target_scale(MotionLabel label, const ControllerParams& params) noexcept {
  return label == MotionLabel::coarse ? params.s_coarse : params.s_fine;
}

struct IntentOutput {
  MembershipPair fused;
  MotionLabel label = MotionLabel::fine;
  double s_target = 1.0;
  double s_intent = 1.0;
  std::optional<FeatureVector> features;  // absent on passthrough ticks
  bool degraded = false;                  // untrained models, running at s_fine
  bool passthrough = false;               // too few samples, s_intent = s_prev

  bool operator==(const IntentOutput&) const = default;
};

struct IntentStep {
  IntentOutput output;
  ScalingState state;
};

inline MembershipPair one_hot(MotionLabel label) noexcept {
  return label == MotionLabel::coarse ? MembershipPair{1.0, 0.0} : MembershipPair{0.0, 1.0};
}

// One clutched tick of the pipeline. Pure given its inputs. The ScalingState
// picks up params.rho, so a parameter change applies from the next tick.
inline IntentStep intent_tick(const TrajectoryWindow& window, const IntentModels& models,
                              const ControllerParams& params, const ScalingState& state,
                              const KinematicEstimate& kin, const FeatureParams& feature_params = {}) {
  IntentStep step{{}, state};
  step.state.rho = params.rho;

  if (window.size() < 2) {
    step.output.passthrough = true;
    step.output.label = state.last_label;
    step.output.fused = one_hot(state.last_label);
    step.output.s_target = target_scale(state.last_label, params);
    step.output.s_intent = state.s_prev;
    step.state.s_intent = state.s_prev;
    return step;
  }

  const FeatureVector f = extract_features(window, kin, feature_params);
  step.output.features = f;

  if (!all_trained(models)) {
    step.output.degraded = true;
    step.output.label = MotionLabel::fine;
    step.output.fused = one_hot(MotionLabel::fine);
    step.output.s_target = params.s_fine;
    step.output.s_intent = params.s_fine;
    step.state.s_prev = params.s_fine;
    step.state.s_intent = params.s_fine;
    step.state.last_label = MotionLabel::fine;
    return step;
  }

  std::array<MembershipPair, 3> pairs{};
  for (auto kind : kFeatureKinds) {
    pairs[index_of(kind)] = fcm_membership(*models[index_of(kind)], f[kind]);
  }
  const auto sel = fuse_and_select(pairs, state.last_label);
  step.output.fused = sel.fused;
  step.output.label = sel.label;
  step.output.s_target = target_scale(sel.label, params);
  step.state = lpf_step(step.state, step.output.s_target);
  step.state.last_label = sel.label;
  step.output.s_intent = step.state.s_intent;
  return step;
}

}  // namespace intentscale
