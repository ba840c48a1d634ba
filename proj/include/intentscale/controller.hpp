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

// SharedController owns all per-session state and advances it one leader
// sample at a time. Order of work inside step():
//
//   1. apply a pending parameter update (tick boundary)
//   2. clutch state machine; a press clears the trajectory window
//   3. clutched: push sample, run the intent pipeline, buffer the features,
//      move the follower by s * (leader - previous leader)
//   4. release: retrain the three models on the recent feature buffer
//
// The controller is single-writer; callers on other threads must hand their
// inputs over through a queue.

#include "intentscale/adaptation.hpp"
#include "intentscale/intent.hpp"
#include "intentscale/trajectory.hpp"

#include <optional>

namespace intentscale {

struct ControllerConfig {
  std::size_t n_window = TrajectoryWindow::kDefaultCapacity;
  std::size_t n_retrain = FeatureBuffer::kDefaultCapacity;
  FcmConfig fcm;
  FeatureParams features;
  ControllerParams params;
  // Fixed-scale baseline: recognition still runs, but this scale moves the follower.
  std::optional<double> fixed_scale;
  bool retrain = true;
};

struct TickRecord {
  PoseSample sample;
  ClutchEvent event = ClutchEvent::none;
  bool clutched = false;
  Vec3 follower = Vec3::Zero();
  double applied_scale = 1.0;
  std::optional<IntentOutput> intent;  // clutched ticks only
  std::optional<RetrainReport> retrain;
  bool params_applied = false;
  std::uint64_t n_clutch = 0;
};

class SharedController {
 public:
  SharedController(ControllerConfig config, FollowerState follower, IntentModels models = {})
      : config_(std::move(config)),
        window_(config_.n_window),
        buffer_(std::max(config_.n_retrain, std::size_t{1})),
        models_(std::move(models)),
        follower_(follower),
        scaling_(ScalingState::initial(config_.params)) {
    config_.params.validate();
    config_.fcm.validate();
    if (config_.fixed_scale && !(*config_.fixed_scale > 0.0)) {
      throw Error(Errc::range, "fixed scale must be positive");
    }
    kin_.tool_dir = follower_.tool_direction();
    kin_.last_alignness = config_.features.initial_alignness;
  }

  // Validates immediately (throws range/constraint errors and keeps the
  // current parameters); the accepted values take effect at the next tick.
  const ControllerParams& request_params(const ParamVector& theta_norm) {
    pending_params_ = denormalize_params(theta_norm, config_.params.bounds);
    return *pending_params_;
  }

  void request_params(const ControllerParams& params) {
    params.validate();
    pending_params_ = params;
  }

  TickRecord step(const PoseSample& sample) {
    if (!all_finite(sample.position) || !std::isfinite(sample.t)) {
      throw Error(Errc::non_finite, "pose sample contains non-finite values");
    }
    if (last_t_ && !(sample.t > *last_t_)) {
      throw Error(Errc::ordering, "pose samples must have strictly increasing timestamps");
    }

    TickRecord rec;
    rec.sample = sample;
    if (pending_params_) {
      config_.params = *pending_params_;
      pending_params_.reset();
      rec.params_applied = true;
    }

    const auto tr = clutch_transition(clutch_, sample.clutch, sample.position, follower_.position);
    clutch_ = tr.state;
    rec.event = tr.event;

    if (clutch_.clutched()) {
      if (tr.event == ClutchEvent::pressed) window_.clear();
      window_.push(sample);
      kin_.tool_dir = follower_.tool_direction();
      auto st = intent_tick(window_, models_, config_.params, scaling_, kin_, config_.features);
      scaling_ = st.state;
      if (st.output.features) {
        kin_.last_alignness = st.output.features->alignness;
        buffer_.record(*st.output.features);
      }
      rec.applied_scale = config_.fixed_scale.value_or(st.output.s_intent);
      if (tr.event != ClutchEvent::pressed && last_leader_) {
        follower_ = integrate_follower(follower_, sample.position - *last_leader_, rec.applied_scale,
                                       ClutchPhase::clutched);
      }
      rec.intent = st.output;
    } else {
      rec.applied_scale = config_.fixed_scale.value_or(scaling_.s_intent);
      if (tr.event == ClutchEvent::released && config_.retrain) {
        auto rr = retrain_on_unclutch(buffer_, models_, config_.n_retrain, config_.fcm);
        models_ = std::move(rr.models);
        if (rr.report.any_updated()) ++retrain_count_;
        rec.retrain = rr.report;
      }
    }

    rec.clutched = clutch_.clutched();
    rec.follower = follower_.position;
    rec.n_clutch = clutch_.clutch_count;
    last_leader_ = sample.position;
    last_t_ = sample.t;
    return rec;
  }

  const ControllerConfig& config() const noexcept { return config_; }
  const ControllerParams& params() const noexcept { return config_.params; }
  const IntentModels& models() const noexcept { return models_; }
  const FollowerState& follower() const noexcept { return follower_; }
  const ClutchState& clutch() const noexcept { return clutch_; }
  const ScalingState& scaling() const noexcept { return scaling_; }
  const TrajectoryWindow& window() const noexcept { return window_; }
  const FeatureBuffer& buffer() const noexcept { return buffer_; }
  std::size_t retrain_count() const noexcept { return retrain_count_; }
  bool degraded() const noexcept { return !all_trained(models_); }

  // Swap in externally trained models between ticks.
  void set_models(IntentModels models) { models_ = std::move(models); }

 private:
  ControllerConfig config_;
  TrajectoryWindow window_;
  FeatureBuffer buffer_;
  IntentModels models_;
  FollowerState follower_;
  ClutchState clutch_;
  ScalingState scaling_;
  KinematicEstimate kin_;
  std::optional<ControllerParams> pending_params_;
  std::optional<Vec3> last_leader_;
  std::optional<double> last_t_;
  std::size_t retrain_count_ = 0;
};

}  // namespace intentscale
