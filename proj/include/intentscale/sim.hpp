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

// Headless peg-transfer harness.
//
// The world is planar (z = 0). A scripted operator stands in for the human:
// it fetches every ring and delivers it to the peg of the same color. Each
// fetch/deliver task is split into
//
//   transport  straight strokes toward an approach point that sits
//              approach_factor capture radii before the target along the tool
//              axis; a stroke runs from the re-centered leader origin until
//              stroke_reach, then the operator re-clutches
//   align      slow drift toward the target in the follower frame plus a
//              corrective oscillation along the tool axis in the leader frame
//
// Every phase begins with a clutch cycle (release, re-center, press). The
// operator labels its own moving ticks (transport = coarse, align = fine),
// which is the ground truth for classification accuracy.

#include "intentscale/controller.hpp"

#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace intentscale {

enum class RingSize { small, large };
enum class RingState { free, grasped, placed };

struct Peg {
  std::string color;
  Vec3 position = Vec3::Zero();
};

struct Ring {
  std::string color;
  Vec3 position = Vec3::Zero();
  RingSize size = RingSize::large;
  RingState state = RingState::free;
};

struct OperatorParams {
  double coarse_speed = 0.15;       // leader m/s while transporting
  double fine_speed = 0.02;         // follower-frame approach speed while aligning
  double jitter_amplitude = 0.003;  // leader m, oscillation along the tool axis
  double jitter_frequency = 1.5;    // Hz
  double wander_amplitude = 0.004;  // leader m, lateral heading wander per stroke
  double tremor = 2e-5;             // leader m, per-tick noise while aligning
  double stroke_reach = 0.1;        // leader m per transport stroke
  std::size_t recenter_ticks = 20;
  double speed_variation = 0.1;     // per-stroke relative spread of coarse_speed
};

struct ParamUpdate {
  double t = 0.0;
  ParamVector theta_norm{};
};

struct Scenario {
  std::string name = "unnamed";
  std::uint64_t seed = 1;
  double tick_hz = 100.0;
  double leader_workspace_radius = 0.1;
  Vec3 tool_direction = Vec3::UnitY();
  double tool_length = 0.05;
  Vec3 follower_start = Vec3::Zero();
  std::vector<Peg> pegs;
  std::vector<Ring> rings;
  double small_ring_radius = 0.008;
  double large_ring_radius = 0.012;
  double capture_factor_small = 0.5;
  double capture_factor_large = 1.0;
  double approach_factor = 5.0;
  double world_margin = 0.2;
  OperatorParams op;
  ControllerConfig controller;
  std::vector<ParamUpdate> param_schedule;
  double timeout_s = 300.0;

  void validate() const {
    if (!(tick_hz > 0.0)) throw Error(Errc::range, "tick_hz must be positive");
    if (!(leader_workspace_radius > 0.0)) throw Error(Errc::range, "leader workspace radius must be positive");
    if (!(op.stroke_reach > 0.0) || op.stroke_reach > leader_workspace_radius) {
      throw Error(Errc::range, "stroke_reach must be in (0, leader_workspace_radius]");
    }
    if (!(op.coarse_speed > 0.0) || !(op.fine_speed > 0.0)) throw Error(Errc::range, "operator speeds must be positive");
    if (rings.empty()) throw Error(Errc::schema, "scenario has no rings");
    int grasped = 0;
    for (const auto& r : rings) {
      bool has_peg = false;
      for (const auto& p : pegs) has_peg |= p.color == r.color;
      if (!has_peg) throw Error(Errc::schema, "ring color '" + r.color + "' has no matching peg");
      grasped += r.state == RingState::grasped;
    }
    if (grasped > 1) throw Error(Errc::schema, "at most one ring may start grasped");
  }
};

enum class ControlMode { fixed, adaptive, adaptive_ma };

struct ModeSpec {
  ControlMode mode = ControlMode::adaptive;
  double fixed_scale = 1.0;

  // "fixed:<s>", "adaptive" or "adaptive-ma".
  static ModeSpec parse(const std::string& s) {
    if (s == "adaptive") return {ControlMode::adaptive, 1.0};
    if (s == "adaptive-ma") return {ControlMode::adaptive_ma, 1.0};
    if (s.rfind("fixed:", 0) == 0) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(s.substr(6), &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != s.size() - 6 || !(v > 0.0) || !std::isfinite(v)) {
        throw Error(Errc::usage, "bad fixed scale in mode '" + s + "'");
      }
      return {ControlMode::fixed, v};
    }
    throw Error(Errc::usage, "unknown mode '" + s + "' (fixed:<s>|adaptive|adaptive-ma)");
  }

  std::string str() const {
    switch (mode) {
      case ControlMode::adaptive: return "adaptive";
      case ControlMode::adaptive_ma: return "adaptive-ma";
      case ControlMode::fixed: break;
    }
    std::string v = std::to_string(fixed_scale);
    v.erase(v.find_last_not_of('0') + 1);
    if (!v.empty() && v.back() == '.') v.pop_back();
    return "fixed:" + v;
  }
};

// ---------------------------------------------------------------------------
// World

class PegWorld {
 public:
  explicit PegWorld(const Scenario& sc) : sc_(&sc), pegs_(sc.pegs), rings_(sc.rings) {
    for (std::size_t i = 0; i < rings_.size(); ++i) {
      if (rings_[i].state == RingState::grasped) {
        grasped_ = i;
        rings_[i].position = sc.follower_start;
      }
    }
    lo_ = hi_ = sc.follower_start;
    for (const auto& p : pegs_) {
      lo_ = lo_.cwiseMin(p.position);
      hi_ = hi_.cwiseMax(p.position);
    }
    for (const auto& r : rings_) {
      lo_ = lo_.cwiseMin(r.position);
      hi_ = hi_.cwiseMax(r.position);
    }
    lo_.array() -= sc.world_margin;
    hi_.array() += sc.world_margin;
  }

  double ring_radius(const Ring& r) const {
    return r.size == RingSize::small ? sc_->small_ring_radius : sc_->large_ring_radius;
  }

  double capture_radius(std::size_t ring) const {
    const auto& r = rings_.at(ring);
    return ring_radius(r) * (r.size == RingSize::small ? sc_->capture_factor_small : sc_->capture_factor_large);
  }

  const Peg& peg_for(std::size_t ring) const {
    for (const auto& p : pegs_) {
      if (p.color == rings_.at(ring).color) return p;
    }
    throw Error(Errc::schema, "no peg for ring");
  }

  bool grasp(std::size_t ring, const Vec3& follower) {
    auto& r = rings_.at(ring);
    if (grasped_ || r.state != RingState::free) return false;
    if ((follower - r.position).norm() > capture_radius(ring)) return false;
    r.state = RingState::grasped;
    r.position = follower;
    grasped_ = ring;
    return true;
  }

  bool place(std::size_t ring, const Vec3& follower) {
    auto& r = rings_.at(ring);
    if (grasped_ != ring) return false;
    const auto& peg = peg_for(ring);
    if ((follower - peg.position).norm() > capture_radius(ring)) return false;
    r.state = RingState::placed;
    r.position = peg.position;
    grasped_.reset();
    return true;
  }

  void follow(const Vec3& follower) {
    if (grasped_) rings_[*grasped_].position = follower;
  }

  bool complete() const {
    for (const auto& r : rings_) {
      if (r.state != RingState::placed) return false;
    }
    return true;
  }

  bool in_bounds(const Vec3& p) const {
    return (p.array() >= lo_.array()).all() && (p.array() <= hi_.array()).all();
  }

  const std::vector<Peg>& pegs() const noexcept { return pegs_; }
  const std::vector<Ring>& rings() const noexcept { return rings_; }
  std::optional<std::size_t> grasped() const noexcept { return grasped_; }

 private:
  const Scenario* sc_;
  std::vector<Peg> pegs_;
  std::vector<Ring> rings_;
  std::optional<std::size_t> grasped_;
  Vec3 lo_, hi_;
};

// ---------------------------------------------------------------------------
// Scripted operator

enum class OperatorPhase { transport, align };

constexpr std::string_view to_string(OperatorPhase p) noexcept {
  return p == OperatorPhase::transport ? "transport" : "align";
}

struct OperatorTick {
  PoseSample sample;
  std::optional<MotionLabel> label_true;  // moving ticks only
  OperatorPhase phase = OperatorPhase::transport;
  std::size_t leg = 0;                    // increments at every phase start
};

class ScriptedOperator {
 public:
  enum class Motion { releasing, recentering, pressing, moving };

  struct Task {
    enum class Kind { fetch, deliver } kind;
    std::size_t ring;
  };

  ScriptedOperator(const Scenario& sc, std::uint64_t seed) : sc_(&sc), rng_(seed) {
    for (std::size_t i = 0; i < sc.rings.size(); ++i) {
      if (sc.rings[i].state == RingState::placed) continue;
      if (sc.rings[i].state == RingState::free) tasks_.push_back({Task::Kind::fetch, i});
      tasks_.push_back({Task::Kind::deliver, i});
    }
    tool_ = sc.tool_direction.normalized();
    dt_ = 1.0 / sc.tick_hz;
  }

  bool done() const noexcept { return task_ >= tasks_.size(); }
  OperatorPhase phase() const noexcept { return phase_; }
  Motion motion() const noexcept { return motion_; }
  const Vec3& leader() const noexcept { return leader_; }
  std::size_t leg() const noexcept { return leg_; }
  double leg_length() const noexcept { return leg_length_; }

  // Call once before the first tick.
  void begin(const PegWorld& world, const Vec3& follower) { start_phase(world, follower); }

  // Emits the leader sample for tick time t given the scale currently
  // applied by the controller.
  OperatorTick next(double t, double applied_scale, const Vec3& follower) {
    OperatorTick out;
    out.phase = phase_;
    out.leg = leg_;
    switch (motion_) {
      case Motion::releasing:
        clutch_ = false;
        motion_ = recenter_from_.norm() > 0.0 && sc_->op.recenter_ticks > 0 ? Motion::recentering : Motion::pressing;
        recenter_tick_ = 0;
        break;
      case Motion::recentering: {
        ++recenter_tick_;
        const double a = static_cast<double>(recenter_tick_) / static_cast<double>(sc_->op.recenter_ticks);
        leader_ = (1.0 - a) * recenter_from_;
        if (recenter_tick_ >= sc_->op.recenter_ticks) {
          leader_ = Vec3::Zero();
          motion_ = Motion::pressing;
        }
        break;
      }
      case Motion::pressing:
        clutch_ = true;
        motion_ = Motion::moving;
        begin_motion();
        break;
      case Motion::moving:
        if (phase_ == OperatorPhase::transport) {
          transport_step(applied_scale, follower);
          out.label_true = MotionLabel::coarse;
        } else {
          align_step(applied_scale, follower);
          out.label_true = MotionLabel::fine;
        }
        break;
    }
    out.sample = {t, leader_, clutch_};
    return out;
  }

  // Reacts to the follower position after the controller tick: completes
  // grasp/place actions and schedules the next clutch cycle.
  void observe(PegWorld& world, const Vec3& follower) {
    if (motion_ != Motion::moving || done()) return;
    if (phase_ == OperatorPhase::transport) {
      if (leg_length_ - progress(follower) <= kTol) {
        phase_ = OperatorPhase::align;
        begin_phase_cycle();
      } else if (stroke_progress_ >= sc_->op.stroke_reach - kTol) {
        begin_recenter();
      }
      return;
    }
    const auto& task = tasks_[task_];
    const bool acted = task.kind == Task::Kind::fetch ? world.grasp(task.ring, follower)
                                                       : world.place(task.ring, follower);
    if (acted) {
      ++task_;
      if (!done()) start_phase(world, follower);
    } else if (leader_.norm() >= sc_->leader_workspace_radius - kTol) {
      begin_recenter();
    }
  }

  Vec3 target(const PegWorld& world) const {
    const auto& task = tasks_.at(task_);
    return task.kind == Task::Kind::fetch ? world.rings().at(task.ring).position
                                          : world.peg_for(task.ring).position;
  }

 private:
  static constexpr double kTol = 1e-9;

  void start_phase(const PegWorld& world, const Vec3& follower) {
    const auto& task = tasks_[task_];
    target_ = target(world);
    capture_ = world.capture_radius(task.ring);
    const double switch_radius = sc_->approach_factor * capture_;
    if ((target_ - follower).norm() <= switch_radius) {
      phase_ = OperatorPhase::align;
    } else {
      phase_ = OperatorPhase::transport;
      leg_start_ = follower;
      const Vec3 approach = target_ - switch_radius * tool_;
      leg_length_ = (approach - follower).norm();
      leg_dir_ = (approach - follower) / leg_length_;
      // In-plane perpendicular for heading wander.
      leg_perp_ = Vec3(-leg_dir_.y(), leg_dir_.x(), 0.0);
      if (leg_perp_.norm() == 0.0) leg_perp_ = Vec3::UnitX();
      leg_perp_.normalize();
    }
    begin_phase_cycle();
  }

  void begin_phase_cycle() {
    ++leg_;
    begin_recenter();
  }

  void begin_recenter() {
    recenter_from_ = leader_;
    motion_ = clutch_ ? Motion::releasing : (leader_.norm() > 0.0 ? Motion::recentering : Motion::pressing);
    recenter_tick_ = 0;
  }

  void begin_motion() {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (phase_ == OperatorPhase::transport) {
      stroke_progress_ = 0.0;
      const double spread = sc_->op.speed_variation;
      stroke_speed_ = sc_->op.coarse_speed * (1.0 - spread + 2.0 * spread * unit(rng_));
      const double sign = unit(rng_) < 0.5 ? -1.0 : 1.0;
      stroke_wander_ = sign * sc_->op.wander_amplitude * (0.5 + 0.5 * unit(rng_));
    } else {
      align_time_ = 0.0;
      jitter_phase_ = 2.0 * std::numbers::pi * unit(rng_);
      jitter_freq_ = sc_->op.jitter_frequency * (0.8 + 0.4 * unit(rng_));
      // Oscillation about the current leader position.
      jitter_center_ = leader_ - sc_->op.jitter_amplitude * std::sin(jitter_phase_) * tool_;
    }
  }

  double progress(const Vec3& follower) const { return (follower - leg_start_).dot(leg_dir_); }

  void transport_step(double scale, const Vec3& follower) {
    const double reach = sc_->op.stroke_reach;
    const double remaining = std::max(leg_length_ - progress(follower), 0.0);
    const double along = std::min({stroke_speed_ * dt_, reach - stroke_progress_, remaining / scale});
    stroke_progress_ += std::max(along, 0.0);
    const double lateral = stroke_wander_ * std::sin(2.0 * std::numbers::pi * stroke_progress_ / reach);
    leader_ = stroke_progress_ * leg_dir_ + lateral * leg_perp_;
  }

  void align_step(double scale, const Vec3& follower) {
    align_time_ += dt_;
    Vec3 to_target = target_ - follower;
    to_target.z() = 0.0;
    const double dist = to_target.norm();
    if (dist > 0.0) {
      const double v = std::min(sc_->op.fine_speed, dist / dt_);
      jitter_center_ += (v * dt_ / scale) * (to_target / dist);
    }
    const double omega = 2.0 * std::numbers::pi * jitter_freq_;
    leader_ = jitter_center_ + sc_->op.jitter_amplitude * std::sin(omega * align_time_ + jitter_phase_) * tool_;
    if (sc_->op.tremor > 0.0) {
      std::normal_distribution<double> noise(0.0, sc_->op.tremor);
      leader_.x() += noise(rng_);
      leader_.y() += noise(rng_);
    }
    leader_.z() = 0.0;
  }

  const Scenario* sc_;
  std::mt19937_64 rng_;
  std::vector<Task> tasks_;
  std::size_t task_ = 0;
  Vec3 tool_ = Vec3::UnitY();
  double dt_ = 0.01;

  OperatorPhase phase_ = OperatorPhase::transport;
  Motion motion_ = Motion::pressing;
  std::size_t leg_ = 0;
  bool clutch_ = false;
  Vec3 leader_ = Vec3::Zero();
  Vec3 recenter_from_ = Vec3::Zero();
  std::size_t recenter_tick_ = 0;

  Vec3 target_ = Vec3::Zero();
  double capture_ = 0.0;
  Vec3 leg_start_ = Vec3::Zero();
  Vec3 leg_dir_ = Vec3::UnitX();
  Vec3 leg_perp_ = Vec3::UnitY();
  double leg_length_ = 0.0;

  double stroke_progress_ = 0.0;
  double stroke_speed_ = 0.15;
  double stroke_wander_ = 0.0;

  double align_time_ = 0.0;
  double jitter_phase_ = 0.0;
  double jitter_freq_ = 1.5;
  Vec3 jitter_center_ = Vec3::Zero();
};

// ---------------------------------------------------------------------------
// Session log and metrics

struct LogRecord {
  double t = 0.0;
  Vec3 leader = Vec3::Zero();
  bool clutch = false;
  Vec3 follower = Vec3::Zero();
  double s = 1.0;
  std::optional<MotionLabel> label_pred;
  std::optional<MotionLabel> label_true;
  std::optional<OperatorPhase> phase;
  std::optional<std::size_t> leg;
  bool retrained = false;
};

struct ParamEvent {
  double t = 0.0;
  ParamVector theta_norm{};
};

// Everything replay needs to rebuild the controller.
struct SessionHeader {
  std::string scenario;
  std::string mode = "adaptive";
  std::uint64_t seed = 0;
  ControllerConfig controller;
  Vec3 follower_start = Vec3::Zero();
  Vec3 tool_tip = Vec3(0.0, 0.05, 0.0);
};

struct SessionLog {
  SessionHeader header;
  std::vector<LogRecord> records;
  std::vector<ParamEvent> param_events;
  bool complete = true;
};

struct SessionMetrics {
  std::uint64_t n_clutch = 0;
  double tct_s = 0.0;
  double follower_path_length = 0.0;
  double label_accuracy = 0.0;     // labeled ticks after the first retraining
  std::size_t labeled_ticks = 0;
  std::vector<std::uint64_t> reclutches_per_leg;  // transport legs, in order
  double jitter_ratio_align = 1.0;  // align-phase follower path / net displacement
  bool complete = true;
  std::string mode;
  std::uint64_t seed = 0;
};

inline SessionMetrics compute_metrics(const SessionLog& log) {
  const auto& recs = log.records;
  if (recs.empty()) throw Error(Errc::insufficient_data, "session log is empty");

  SessionMetrics m;
  m.mode = log.header.mode;
  m.seed = log.header.seed;
  m.complete = log.complete;
  m.tct_s = recs.back().t - recs.front().t;

  struct LegStats {
    std::uint64_t presses = 0;
  };
  std::vector<std::pair<std::size_t, LegStats>> transport_legs;
  struct AlignStats {
    std::size_t leg;
    Vec3 start;
    Vec3 end;
    double path = 0.0;
  };
  std::vector<AlignStats> aligns;

  bool prev_clutch = false;
  bool retrained = false;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& r = recs[i];
    const bool pressed = r.clutch && !prev_clutch;
    if (pressed) ++m.n_clutch;
    if (i > 0) {
      const double step = (r.follower - recs[i - 1].follower).norm();
      m.follower_path_length += step;
      if (r.phase == OperatorPhase::align && r.leg) {
        if (aligns.empty() || aligns.back().leg != *r.leg) {
          aligns.push_back({*r.leg, recs[i - 1].follower, recs[i - 1].follower, 0.0});
        }
        aligns.back().path += step;
        aligns.back().end = r.follower;
      }
    }
    if (pressed && r.phase == OperatorPhase::transport && r.leg) {
      if (transport_legs.empty() || transport_legs.back().first != *r.leg) transport_legs.push_back({*r.leg, {}});
      ++transport_legs.back().second.presses;
    }
    if (retrained && r.label_true && r.label_pred) {
      ++m.labeled_ticks;
      correct += *r.label_true == *r.label_pred;
    }
    retrained |= r.retrained;
    prev_clutch = r.clutch;
  }

  for (const auto& [leg, stats] : transport_legs) m.reclutches_per_leg.push_back(stats.presses - 1);
  m.label_accuracy = m.labeled_ticks ? static_cast<double>(correct) / static_cast<double>(m.labeled_ticks) : 0.0;
  double path = 0.0, net = 0.0;
  for (const auto& a : aligns) {
    path += a.path;
    net += (a.end - a.start).norm();
  }
  m.jitter_ratio_align = net > 0.0 ? path / net : 1.0;
  return m;
}

// ---------------------------------------------------------------------------
// Headless runner

struct SessionResult {
  SessionLog log;
  SessionMetrics metrics;
};

inline ControllerConfig controller_config_for(const Scenario& sc, const ModeSpec& mode, std::uint64_t seed) {
  ControllerConfig cfg = sc.controller;
  cfg.fcm.seed = seed;
  cfg.fixed_scale.reset();
  if (mode.mode == ControlMode::fixed) cfg.fixed_scale = mode.fixed_scale;
  return cfg;
}

// Default slider schedule for the parameter-updating mode when the scenario
// does not provide one.
inline std::vector<ParamUpdate> default_param_schedule(const ControllerParams& p) {
  ControllerParams tuned = p;
  tuned.rho = std::min(p.bounds.max[0], p.rho * 1.6);
  tuned.s_coarse = std::min(p.bounds.max[2], p.s_coarse * 1.15);
  return {{20.0, tuned.normalized()}};
}

inline SessionResult run_headless(const Scenario& sc, const ModeSpec& mode, std::uint64_t seed,
                                  IntentModels initial_models = {}) {
  sc.validate();
  const auto cfg = controller_config_for(sc, mode, seed);
  const auto follower0 = FollowerState::with_tool(sc.follower_start, sc.tool_direction, sc.tool_length);
  SharedController ctl(cfg, follower0, std::move(initial_models));
  PegWorld world(sc);
  ScriptedOperator op(sc, seed);

  std::vector<ParamUpdate> schedule;
  if (mode.mode == ControlMode::adaptive_ma) {
    schedule = sc.param_schedule.empty() ? default_param_schedule(cfg.params) : sc.param_schedule;
  }
  std::size_t next_update = 0;

  SessionResult res;
  res.log.header = {sc.name, mode.str(), seed, cfg, follower0.position, follower0.tool_tip};
  res.log.complete = false;

  op.begin(world, ctl.follower().position);
  double applied = ctl.params().s_fine;
  if (cfg.fixed_scale) applied = *cfg.fixed_scale;
  const auto max_ticks = static_cast<std::uint64_t>(std::llround(sc.timeout_s * sc.tick_hz));
  for (std::uint64_t k = 0; k <= max_ticks; ++k) {
    const double t = static_cast<double>(k) / sc.tick_hz;
    while (next_update < schedule.size() && t >= schedule[next_update].t) {
      try {
        ctl.request_params(schedule[next_update].theta_norm);
        res.log.param_events.push_back({t, schedule[next_update].theta_norm});
      } catch (const Error&) {
        // Rejected slider positions keep the current parameters.
      }
      ++next_update;
    }
    const auto tick = op.next(t, applied, ctl.follower().position);
    const auto rec = ctl.step(tick.sample);
    applied = rec.applied_scale;
    world.follow(rec.follower);
    op.observe(world, rec.follower);

    LogRecord lr;
    lr.t = t;
    lr.leader = tick.sample.position;
    lr.clutch = tick.sample.clutch;
    lr.follower = rec.follower;
    lr.s = rec.applied_scale;
    if (rec.intent) lr.label_pred = rec.intent->label;
    lr.label_true = tick.label_true;
    lr.phase = tick.phase;
    lr.leg = tick.leg;
    lr.retrained = rec.retrain && rec.retrain->any_updated();
    res.log.records.push_back(lr);

    if (world.complete()) {
      res.log.complete = true;
      break;
    }
  }
  res.metrics = compute_metrics(res.log);
  return res;
}

}  // namespace intentscale
