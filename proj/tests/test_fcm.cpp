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

using testing::ReferenceFcm;

FcmModel labeled_model(FeatureKind kind, double c0, double c1) {
  FcmModel m;
  m.feature_kind = kind;
  m.centroids = {c0, c1};
  return assign_semantic_labels(m);
}

Errc error_code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return Errc::usage;
}

TEST(FcmTrain, SymmetricTwoPointClumps) {
  const std::vector<double> xs = {0, 0, 0, 1, 1, 1};
  const auto model = fcm_train(xs, FeatureKind::speed, {});
  const double lo = std::min(model.centroids[0], model.centroids[1]);
  const double hi = std::max(model.centroids[0], model.centroids[1]);
  EXPECT_LT(lo, 0.5);
  EXPECT_GT(hi, 0.5);
  EXPECT_NEAR(lo + hi, 1.0, 1e-9);

  ReferenceFcm ref{{0.2L, 0.8L}};
  ref.run(xs);
  EXPECT_NEAR(lo, static_cast<double>(std::min(ref.centroids[0], ref.centroids[1])), 1e-9);
  EXPECT_NEAR(hi, static_cast<double>(std::max(ref.centroids[0], ref.centroids[1])), 1e-9);
}

TEST(FcmTrain, IdenticalSamplesAreDegenerate) {
  const std::vector<double> xs(10, 0.3);
  EXPECT_EQ(error_code_of([&] { fcm_train(xs, FeatureKind::speed, {}); }), Errc::degenerate_data);
}

TEST(FcmTrain, FewerThanFourSamplesIsInsufficient) {
  const std::vector<double> xs = {0.1, 0.2, 0.3};
  EXPECT_EQ(error_code_of([&] { fcm_train(xs, FeatureKind::speed, {}); }), Errc::insufficient_data);
}

TEST(FcmTrain, RejectsNonFiniteSamplesAndBadConfig) {
  std::vector<double> xs = {0.1, 0.2, 0.3, NAN};
  EXPECT_EQ(error_code_of([&] { fcm_train(xs, FeatureKind::speed, {}); }), Errc::non_finite);
  const std::vector<double> ok = {0.1, 0.2, 0.3, 0.4};
  FcmConfig cfg;
  cfg.m = 1.0;
  EXPECT_EQ(error_code_of([&] { fcm_train(ok, FeatureKind::speed, cfg); }), Errc::range);
}

TEST(FcmTrain, RecoversTwoGaussianMeans) {
  std::vector<int> truth;
  const auto xs = testing::two_gaussians(42, &truth);
  const auto model = fcm_train_labeled(xs, FeatureKind::speed, {});
  EXPECT_NEAR(model.centroid_of(MotionLabel::fine), 0.05, 0.02);
  EXPECT_NEAR(model.centroid_of(MotionLabel::coarse), 0.5, 0.02);

  ReferenceFcm ref{{0.1L, 0.4L}};
  ref.run(xs);
  EXPECT_NEAR(model.centroid_of(MotionLabel::fine), static_cast<double>(ref.centroids[0]), 1e-8);
  EXPECT_NEAR(model.centroid_of(MotionLabel::coarse), static_cast<double>(ref.centroids[1]), 1e-8);
}

TEST(FcmTrain, AgreesWithReferenceOnRandomData) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    const auto xs = testing::random_dataset(rng);
    FcmConfig cfg;
    cfg.tol = 1e-13;
    cfg.max_iter = 5000;
    const auto model = fcm_train(xs, FeatureKind::speed, cfg);
    ReferenceFcm ref{{model.centroids[0], model.centroids[1]}};
    ref.run(xs);
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(model.centroids[j], static_cast<double>(ref.centroids[j]), 1e-8);
  }
}

TEST(FcmTrain, IsDeterministicPerSeed) {
  std::mt19937_64 rng(9);
  const auto xs = testing::random_dataset(rng);
  FcmConfig cfg;
  cfg.seed = 1234;
  EXPECT_EQ(fcm_train(xs, FeatureKind::speed, cfg), fcm_train(xs, FeatureKind::speed, cfg));
}

TEST(FcmTrain, CentroidsStayWithinDataRange) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 50; ++trial) {
    const auto xs = testing::random_dataset(rng);
    const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
    const auto model = fcm_train(xs, FeatureKind::speed, {});
    for (double c : model.centroids) {
      EXPECT_GE(c, *lo);
      EXPECT_LE(c, *hi);
    }
  }
}

TEST(FcmTrain, ObjectiveNeverIncreases) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const auto xs = testing::random_dataset(rng);
    FcmTrace trace;
    fcm_train(xs, FeatureKind::speed, {}, &trace);
    for (std::size_t i = 1; i < trace.objective.size(); ++i) {
      EXPECT_LE(trace.objective[i], trace.objective[i - 1] + 1e-12);
    }
  }
}

TEST(FcmTrain, ConvergedModelIsAFixedPoint) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 50; ++trial) {
    const auto xs = testing::random_dataset(rng);
    const auto model = fcm_train(xs, FeatureKind::speed, {});
    ASSERT_TRUE(model.converged);
    const auto next = fcm_update<double>(xs, model.centroids, 2.0);
    EXPECT_LT(std::abs(next[0] - model.centroids[0]), 1e-9);
    EXPECT_LT(std::abs(next[1] - model.centroids[1]), 1e-9);
  }
}

TEST(FcmTrain, TranslationEquivariant) {
  std::mt19937_64 rng(23);
  FcmConfig cfg;
  cfg.tol = 1e-13;
  cfg.max_iter = 5000;
  for (double delta : {-0.7, 0.25, 3.0}) {
    const auto xs = testing::random_dataset(rng);
    std::vector<double> shifted(xs);
    for (auto& x : shifted) x += delta;
    const auto a = fcm_train_labeled(xs, FeatureKind::displacement, cfg);
    const auto b = fcm_train_labeled(shifted, FeatureKind::displacement, cfg);
    EXPECT_NEAR(b.centroid_of(MotionLabel::coarse), a.centroid_of(MotionLabel::coarse) + delta, 1e-9);
    EXPECT_NEAR(b.centroid_of(MotionLabel::fine), a.centroid_of(MotionLabel::fine) + delta, 1e-9);
    for (double x : {0.0, 0.1, 0.5, 0.9}) {
      const auto ua = fcm_membership(a, x);
      const auto ub = fcm_membership(b, x + delta);
      EXPECT_NEAR(ua.coarse, ub.coarse, 1e-9);
    }
  }
}

TEST(FcmMembership, PointOnCentroidIsHard) {
  const auto m = labeled_model(FeatureKind::speed, 0.02, 0.3);
  const auto u = fcm_membership(m, 0.3);
  EXPECT_EQ(u.coarse, 1.0);
  EXPECT_EQ(u.fine, 0.0);
}

TEST(FcmMembership, MidpointIsEven) {
  const auto m = labeled_model(FeatureKind::speed, 0.0, 1.0);
  const auto u = fcm_membership(m, 0.5);
  EXPECT_DOUBLE_EQ(u.coarse, 0.5);
  EXPECT_DOUBLE_EQ(u.fine, 0.5);
}

TEST(FcmMembership, QuarterPointHandValue) {
  // Cluster at 0: 0.75^2 / (0.25^2 + 0.75^2) = 0.9
  const auto m = labeled_model(FeatureKind::speed, 0.0, 1.0);
  const auto u = fcm_membership(m, 0.25);
  EXPECT_NEAR(u.fine, 0.9, 1e-9);
  EXPECT_NEAR(u.coarse, 0.1, 1e-9);
}

TEST(FcmMembership, SumsToOne) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> c(-1.0, 1.0), x(-3.0, 3.0), m(1.1, 4.0);
  for (int i = 0; i < 20000; ++i) {
    FcmModel model = labeled_model(FeatureKind::speed, c(rng), c(rng) + 2.5);
    model.config.m = m(rng);
    const auto u = fcm_membership(model, x(rng));
    EXPECT_NEAR(u.coarse + u.fine, 1.0, 1e-9);
    EXPECT_GE(u.coarse, 0.0);
    EXPECT_GE(u.fine, 0.0);
  }
}

TEST(FcmMembership, MatchesReferenceForGeneralM) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> x(-1.0, 2.0), m(1.2, 3.5);
  for (int i = 0; i < 2000; ++i) {
    FcmModel model = labeled_model(FeatureKind::speed, 0.1, 0.9);
    model.config.m = m(rng);
    const double probe = x(rng);
    ReferenceFcm ref{{0.1L, 0.9L}, static_cast<long double>(model.config.m)};
    const auto u = fcm_membership(model, probe);
    EXPECT_NEAR(u.fine, static_cast<double>(ref.memberships(probe)[0]), 1e-12);
  }
}

TEST(FcmMembership, DecreasesAwayFromCentroid) {
  const auto m = labeled_model(FeatureKind::speed, 0.2, 0.8);
  double prev = 1.0;
  for (int i = 1; i <= 600; ++i) {
    const double x = 0.2 + 0.001 * i;
    const double u = fcm_membership(m, x).fine;
    EXPECT_LT(u, prev) << x;
    prev = u;
  }
}

TEST(FcmMembership, UnlabeledModelIsRejected) {
  FcmModel m;
  m.centroids = {0.0, 1.0};
  EXPECT_THROW(fcm_membership(m, 0.5), Error);
}

TEST(FcmObjective, ZeroWhenSamplesSitOnCentroids) {
  const auto m = labeled_model(FeatureKind::speed, 0.0, 1.0);
  const std::vector<double> xs = {0.0, 1.0, 1.0, 0.0};
  EXPECT_EQ(fcm_objective(m, xs), 0.0);
  const std::vector<double> two = {0.0, 1.0};
  EXPECT_EQ(fcm_objective(m, two), 0.0);
}

TEST(FcmObjective, TrainedBelowFirstIteration) {
  std::mt19937_64 rng(30);
  const auto xs = testing::random_dataset(rng);
  FcmConfig one;
  one.max_iter = 1;
  const auto first = fcm_train(xs, FeatureKind::speed, one);
  const auto full = fcm_train(xs, FeatureKind::speed, {});
  EXPECT_LE(fcm_objective(full, xs), fcm_objective(first, xs) + 1e-12);
}

TEST(FcmObjective, MatchesReference) {
  std::mt19937_64 rng(31);
  const auto xs = testing::random_dataset(rng);
  const auto m = fcm_train(xs, FeatureKind::speed, {});
  ReferenceFcm ref{{m.centroids[0], m.centroids[1]}};
  EXPECT_NEAR(fcm_objective(m, xs), static_cast<double>(ref.objective(xs)), 1e-9);
}

TEST(FcmObjective, EmptySamplesIsAnError) {
  const auto m = labeled_model(FeatureKind::speed, 0.0, 1.0);
  EXPECT_THROW(fcm_objective(m, std::vector<double>{}), Error);
}

TEST(SemanticLabels, SpeedHigherCentroidIsCoarse) {
  const auto m = labeled_model(FeatureKind::speed, 0.02, 0.3);
  EXPECT_EQ(m.centroid_of(MotionLabel::coarse), 0.3);
  EXPECT_EQ(m.centroid_of(MotionLabel::fine), 0.02);
}

TEST(SemanticLabels, DisplacementHigherCentroidIsCoarse) {
  const auto m = labeled_model(FeatureKind::displacement, 0.4, 0.01);
  EXPECT_EQ(m.centroid_of(MotionLabel::coarse), 0.4);
}

TEST(SemanticLabels, AlignnessHigherCentroidIsFine) {
  const auto m = labeled_model(FeatureKind::alignness, 0.2, 0.9);
  EXPECT_EQ(m.centroid_of(MotionLabel::fine), 0.9);
  EXPECT_EQ(m.centroid_of(MotionLabel::coarse), 0.2);
}

TEST(SemanticLabels, CoincidentCentroidsAreAmbiguous) {
  FcmModel m;
  m.centroids = {0.5, 0.5};
  EXPECT_EQ(error_code_of([&] { assign_semantic_labels(m); }), Errc::ambiguous_label);
}

}  // namespace
}  // namespace intentscale
