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

#include "support.hpp"

#include <gtest/gtest.h>

namespace intentscale {
namespace {

Scenario four_ring() { return load_scenario(testing::source_path("scenarios/four_ring.json")); }
Scenario transport_leg() { return load_scenario(testing::source_path("scenarios/transport_leg.json")); }

std::uint64_t closed_form_reclutches(double distance, double scale, double stroke) {
  return static_cast<std::uint64_t>(std::ceil(distance / (scale * stroke) - 1e-9)) - 1;
}

TEST(PegWorld, CaptureRadiusDependsOnRingSize) {
  const auto sc = four_ring();
  const PegWorld world(sc);
  for (std::size_t i = 0; i < sc.rings.size(); ++i) {
    const double r = sc.rings[i].size == RingSize::small ? sc.small_ring_radius * 0.5 : sc.large_ring_radius;
    EXPECT_DOUBLE_EQ(world.capture_radius(i), r);
  }
}

TEST(PegWorld, PlacesOnlyWithinCaptureOfMatchingPeg) {
  const auto sc = four_ring();
  PegWorld world(sc);
  const Vec3 ring0 = sc.rings[0].position;
  EXPECT_FALSE(world.grasp(0, ring0 + Vec3(0.05, 0, 0)));
  ASSERT_TRUE(world.grasp(0, ring0));
  EXPECT_FALSE(world.grasp(1, sc.rings[1].position));  // one ring at a time
  const Vec3 peg = world.peg_for(0).position;
  const Vec3 wrong_peg = sc.pegs[1].position;
  EXPECT_FALSE(world.place(0, wrong_peg));
  EXPECT_FALSE(world.place(0, peg + Vec3(world.capture_radius(0) * 1.01, 0, 0)));
  EXPECT_TRUE(world.place(0, peg + Vec3(world.capture_radius(0) * 0.99, 0, 0)));
  EXPECT_EQ(world.rings()[0].state, RingState::placed);
  EXPECT_FALSE(world.grasped().has_value());
  EXPECT_FALSE(world.complete());
}

TEST(ScenarioFile, RejectsRingWithoutPeg) {
  auto sc = four_ring();
  sc.pegs.pop_back();
  EXPECT_THROW(sc.validate(), Error);
}

TEST(ModeSpec, ParsesAndPrints) {
  EXPECT_EQ(ModeSpec::parse("fixed:3").fixed_scale, 3.0);
  EXPECT_EQ(ModeSpec::parse("fixed:1.5").str(), "fixed:1.5");
  EXPECT_EQ(ModeSpec::parse("adaptive").mode, ControlMode::adaptive);
  EXPECT_EQ(ModeSpec::parse("adaptive-ma").str(), "adaptive-ma");
  EXPECT_THROW(ModeSpec::parse("fixed:"), Error);
  EXPECT_THROW(ModeSpec::parse("fixed:-1"), Error);
  EXPECT_THROW(ModeSpec::parse("fast"), Error);
}

// Drives the operator with a fixed-scale controller and collects features
// per phase.
struct PhaseFeatures {
  std::vector<FeatureVector> transport, align;
};

PhaseFeatures collect(const Scenario& sc, double scale, std::uint64_t seed) {
  ControllerConfig cfg = sc.controller;
  cfg.fixed_scale = scale;
  cfg.retrain = false;
  SharedController ctl(cfg, FollowerState::with_tool(sc.follower_start, sc.tool_direction, sc.tool_length));
  PegWorld world(sc);
  ScriptedOperator op(sc, seed);
  op.begin(world, ctl.follower().position);
  PhaseFeatures out;
  for (int k = 0; k < 30000 && !world.complete(); ++k) {
    const auto tick = op.next(k * 0.01, scale, ctl.follower().position);
    const auto rec = ctl.step(tick.sample);
    world.follow(rec.follower);
    op.observe(world, rec.follower);
    // Skip the first ticks of each stroke, where the window is still short.
    if (tick.label_true && rec.intent && rec.intent->features && ctl.window().size() >= 20) {
      (*tick.label_true == MotionLabel::coarse ? out.transport : out.align).push_back(*rec.intent->features);
    }
  }
  return out;
}

TEST(ScriptedOperator, TransportSpeedNearCoarseSpeed) {
  const auto sc = four_ring();
  const auto f = collect(sc, 1.0, 1);
  ASSERT_FALSE(f.transport.empty());
  double mean = 0.0;
  for (const auto& x : f.transport) mean += x.speed;
  mean /= static_cast<double>(f.transport.size());
  EXPECT_NEAR(mean, sc.op.coarse_speed, 0.15 * sc.op.coarse_speed);
}

TEST(ScriptedOperator, AlignAlignnessAboveNinetyPercent) {
  const auto f = collect(four_ring(), 1.0, 2);
  ASSERT_FALSE(f.align.empty());
  double mean = 0.0;
  for (const auto& x : f.align) mean += x.alignness;
  EXPECT_GE(mean / static_cast<double>(f.align.size()), 0.9);
}

TEST(ScriptedOperator, ReleasesClutchAtWorkspaceBoundary) {
  const auto sc = four_ring();
  ControllerConfig cfg;
  cfg.fixed_scale = 1.0;
  cfg.retrain = false;
  SharedController ctl(cfg, FollowerState::with_tool(sc.follower_start, sc.tool_direction, sc.tool_length));
  PegWorld world(sc);
  ScriptedOperator op(sc, 3);
  op.begin(world, ctl.follower().position);
  int checked = 0;
  bool prev_clutch = false;
  Vec3 prev_leader = Vec3::Zero();
  for (int k = 0; k < 20000 && !world.complete(); ++k) {
    const auto tick = op.next(k * 0.01, 1.0, ctl.follower().position);
    if (prev_clutch && prev_leader.norm() >= sc.leader_workspace_radius - 1e-9) {
      EXPECT_FALSE(tick.sample.clutch) << "t=" << tick.sample.t;
      ++checked;
    }
    EXPECT_LE(tick.sample.position.norm(), sc.leader_workspace_radius + 1e-3);
    const auto rec = ctl.step(tick.sample);
    world.follow(rec.follower);
    op.observe(world, rec.follower);
    prev_clutch = tick.sample.clutch;
    prev_leader = tick.sample.position;
  }
  EXPECT_GT(checked, 50);
}

TEST(ScriptedOperator, UnclutchedTicksCarryNoLabel) {
  const auto res = run_headless(four_ring(), ModeSpec::parse("adaptive"), 4);
  for (const auto& r : res.log.records) {
    // Every labeled tick is clutched and has a prediction, and vice versa
    // except at the press tick where the operator has not started moving.
    if (r.label_true) {
      EXPECT_TRUE(r.clutch);
      EXPECT_TRUE(r.label_pred.has_value());
    }
    if (!r.clutch) {
      EXPECT_FALSE(r.label_true.has_value());
    }
  }
}

TEST(ComputeMetrics, CountsPressEvents) {
  SessionLog log;
  const bool pattern[] = {false, true, true, false, true, false, false, true, true};
  for (std::size_t i = 0; i < std::size(pattern); ++i) {
    LogRecord r;
    r.t = 0.01 * static_cast<double>(i);
    r.clutch = pattern[i];
    log.records.push_back(r);
  }
  const auto m = compute_metrics(log);
  EXPECT_EQ(m.n_clutch, 3u);
  EXPECT_EQ(m.follower_path_length, 0.0);
  EXPECT_NEAR(m.tct_s, 0.08, 1e-15);
}

TEST(ComputeMetrics, PathLengthSumsFollowerSteps) {
  SessionLog log;
  for (int i = 0; i < 5; ++i) {
    LogRecord r;
    r.t = i;
    r.follower = Vec3(0.3 * i, 0.4 * i, 0);
    log.records.push_back(r);
  }
  EXPECT_NEAR(compute_metrics(log).follower_path_length, 2.0, 1e-12);
}

TEST(ComputeMetrics, EmptyLogIsAnError) { EXPECT_THROW(compute_metrics(SessionLog{}), Error); }

TEST(ComputeMetrics, NClutchMatchesControllerCount) {
  const auto sc = four_ring();
  const auto res = run_headless(sc, ModeSpec::parse("adaptive"), 5);
  std::uint64_t presses = 0;
  bool prev = false;
  for (const auto& r : res.log.records) {
    presses += r.clutch && !prev;
    prev = r.clutch;
  }
  EXPECT_EQ(res.metrics.n_clutch, presses);
}

TEST(RunHeadless, FixedUnitScaleReclutchesMatchClosedForm) {
  const auto sc = transport_leg();
  const auto res = run_headless(sc, ModeSpec::parse("fixed:1"), 1);
  ASSERT_TRUE(res.metrics.complete);
  ASSERT_EQ(res.metrics.reclutches_per_leg.size(), 1u);
  EXPECT_EQ(res.metrics.reclutches_per_leg[0], closed_form_reclutches(1.2, 1.0, sc.op.stroke_reach));
  EXPECT_EQ(res.metrics.reclutches_per_leg[0], 11u);
}

TEST(RunHeadless, FixedTripleScaleReclutchesMatchClosedForm) {
  const auto sc = transport_leg();
  const auto res = run_headless(sc, ModeSpec::parse("fixed:3"), 1);
  ASSERT_EQ(res.metrics.reclutches_per_leg.size(), 1u);
  EXPECT_EQ(res.metrics.reclutches_per_leg[0], closed_form_reclutches(1.2, 3.0, sc.op.stroke_reach));
  EXPECT_EQ(res.metrics.reclutches_per_leg[0], 3u);
}

TEST(RunHeadless, ClosedFormHoldsAcrossSeedsAndScales) {
  const auto sc = transport_leg();
  for (std::uint64_t seed : {2u, 3u, 4u}) {
    for (double s : {1.0, 1.5, 2.0, 3.0}) {
      ModeSpec mode{ControlMode::fixed, s};
      const auto res = run_headless(sc, mode, seed);
      ASSERT_EQ(res.metrics.reclutches_per_leg.size(), 1u);
      EXPECT_EQ(res.metrics.reclutches_per_leg[0], closed_form_reclutches(1.2, s, sc.op.stroke_reach))
          << "s=" << s << " seed=" << seed;
    }
  }
}

TEST(RunHeadless, AdaptiveLegNeedsFewerReclutchesThanUnitScale) {
  const auto sc = transport_leg();
  // Pre-trained models so the single leg is not spent in degraded mode.
  const auto warm = run_headless(four_ring(), ModeSpec::parse("adaptive"), 1);
  const auto snap = train_from_log(warm.log, 500);
  const auto res = run_headless(sc, ModeSpec::parse("adaptive"), 1, snap.models);
  ASSERT_EQ(res.metrics.reclutches_per_leg.size(), 1u);
  EXPECT_LT(res.metrics.reclutches_per_leg[0], 11u);
}

TEST(RunHeadless, IsDeterministic) {
  const auto sc = four_ring();
  for (const char* mode : {"fixed:1", "adaptive", "adaptive-ma"}) {
    const auto a = run_headless(sc, ModeSpec::parse(mode), 9);
    const auto b = run_headless(sc, ModeSpec::parse(mode), 9);
    EXPECT_EQ(metrics_to_string(a.metrics), metrics_to_string(b.metrics));
    EXPECT_EQ(log_to_string(a.log), log_to_string(b.log));
  }
}

TEST(RunHeadless, AdaptiveStaysInsideWorldBounds) {
  const auto sc = four_ring();
  const PegWorld world(sc);
  for (std::uint64_t seed : {1u, 2u}) {
    const auto res = run_headless(sc, ModeSpec::parse("adaptive"), seed);
    for (const auto& r : res.log.records) {
      EXPECT_TRUE(world.in_bounds(r.follower));
      EXPECT_LE(r.s, sc.controller.params.s_coarse + 1e-12);
      EXPECT_GE(r.s, sc.controller.params.s_fine - 1e-12);
    }
  }
}

TEST(RunHeadless, TripleScaleAlignIsJitterierThanAdaptive) {
  const auto sc = four_ring();
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto fixed3 = run_headless(sc, ModeSpec::parse("fixed:3"), seed);
    const auto adaptive = run_headless(sc, ModeSpec::parse("adaptive"), seed);
    EXPECT_GT(fixed3.metrics.jitter_ratio_align, adaptive.metrics.jitter_ratio_align);
  }
}

TEST(RunHeadless, ParameterScheduleIsLoggedAndApplied) {
  const auto res = run_headless(four_ring(), ModeSpec::parse("adaptive-ma"), 1);
  ASSERT_EQ(res.log.param_events.size(), 1u);
  const auto expected = default_param_schedule({})[0];
  EXPECT_EQ(res.log.param_events[0].theta_norm, expected.theta_norm);
  double max_s = 0.0;
  for (const auto& r : res.log.records) {
    if (r.t > expected.t) max_s = std::max(max_s, r.s);
  }
  EXPECT_GT(max_s, 3.0);
}

TEST(RunHeadless, TimeoutFlagsIncomplete) {
  auto sc = four_ring();
  sc.timeout_s = 5.0;
  const auto res = run_headless(sc, ModeSpec::parse("fixed:1"), 1);
  EXPECT_FALSE(res.metrics.complete);
  EXPECT_NEAR(res.metrics.tct_s, 5.0, 1e-9);
}

}  // namespace
}  // namespace intentscale
