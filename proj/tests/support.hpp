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

// Shared helpers for the test binaries: a reference fuzzy C-means written
// from the textbook C-cluster formulas (no shared code with the library),
// synthetic coarse/fine motion generators and scratch directories.

#include "intentscale/io.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace intentscale::testing {

// ---------------------------------------------------------------------------
// Reference FCM in long double. General C, general m, std::pow throughout.

struct ReferenceFcm {
  std::vector<long double> centroids;
  long double m = 2.0L;

  std::vector<long double> memberships(long double x) const {
    const std::size_t c = centroids.size();
    std::vector<long double> u(c, 0.0L);
    for (std::size_t j = 0; j < c; ++j) {
      if (std::fabs(x - centroids[j]) == 0.0L) {
        u.assign(c, 0.0L);
        u[j] = 1.0L;
        return u;
      }
    }
    const long double p = 2.0L / (m - 1.0L);
    for (std::size_t j = 0; j < c; ++j) {
      long double s = 0.0L;
      for (std::size_t k = 0; k < c; ++k) s += std::pow(std::fabs(x - centroids[j]) / std::fabs(x - centroids[k]), p);
      u[j] = 1.0L / s;
    }
    return u;
  }

  long double objective(const std::vector<double>& xs) const {
    long double J = 0.0L;
    for (double x : xs) {
      const auto u = memberships(x);
      for (std::size_t j = 0; j < centroids.size(); ++j) {
        J += std::pow(u[j], m) * (x - centroids[j]) * (x - centroids[j]);
      }
    }
    return J;
  }

  void step(const std::vector<double>& xs) {
    std::vector<long double> num(centroids.size(), 0.0L), den(centroids.size(), 0.0L);
    for (double x : xs) {
      const auto u = memberships(x);
      for (std::size_t j = 0; j < centroids.size(); ++j) {
        num[j] += std::pow(u[j], m) * x;
        den[j] += std::pow(u[j], m);
      }
    }
    for (std::size_t j = 0; j < centroids.size(); ++j) centroids[j] = num[j] / den[j];
  }

  void run(const std::vector<double>& xs, std::size_t iters = 5000, long double tol = 1e-15L) {
    for (std::size_t i = 0; i < iters; ++i) {
      const auto before = centroids;
      step(xs);
      long double shift = 0.0L;
      for (std::size_t j = 0; j < centroids.size(); ++j) shift = std::max(shift, std::fabs(centroids[j] - before[j]));
      if (shift < tol) break;
    }
  }
};

// ---------------------------------------------------------------------------
// Random datasets

inline std::vector<double> random_dataset(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> size(10, 1000);
  std::uniform_int_distribution<int> shape(0, 2);
  const std::size_t n = size(rng);
  std::vector<double> xs(n);
  switch (shape(rng)) {
    case 0: {
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      for (auto& x : xs) x = u(rng);
      break;
    }
    case 1: {
      std::normal_distribution<double> a(0.1, 0.03), b(0.6, 0.08);
      std::bernoulli_distribution pick(0.4);
      for (auto& x : xs) x = pick(rng) ? a(rng) : b(rng);
      break;
    }
    default: {
      std::exponential_distribution<double> e(3.0);
      for (auto& x : xs) x = e(rng);
      break;
    }
  }
  xs[0] = xs[n - 1] + 1.0;  // never all-identical
  return xs;
}

inline std::vector<double> two_gaussians(std::uint64_t seed, std::vector<int>* truth = nullptr) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> a(0.05, 0.02), b(0.5, 0.02);
  std::vector<double> xs;
  for (int i = 0; i < 200; ++i) {
    xs.push_back(a(rng));
    if (truth) truth->push_back(0);
  }
  for (int i = 0; i < 200; ++i) {
    xs.push_back(b(rng));
    if (truth) truth->push_back(1);
  }
  return xs;
}

// ---------------------------------------------------------------------------
// Synthetic leader motion

// Coarse: fast (0.1-0.2 m/s), heading drifting within 45 degrees of the
// perpendicular to the tool axis, steady net drift. Fine: slow drift along
// the tool axis with a corrective oscillation, net displacement small.
struct SegmentGenerator {
  Vec3 tool = Vec3::UnitY();
  double dt = 0.01;

  std::vector<PoseSample> coarse(std::mt19937_64& rng, std::size_t n, double t0 = 0.0, Vec3 p0 = Vec3::Zero()) const {
    std::uniform_real_distribution<double> speed(0.1, 0.2), u(-1.0, 1.0);
    const double v = speed(rng);
    const Vec3 perp = Vec3(tool.y(), -tool.x(), 0.0).normalized();
    double heading = 0.5 * u(rng);  // radians off the perpendicular
    const double drift = 0.004 * u(rng);
    std::vector<PoseSample> out;
    Vec3 p = p0;
    for (std::size_t i = 0; i < n; ++i) {
      heading = std::clamp(heading + drift, -0.75, 0.75);
      const Vec3 dir = std::cos(heading) * perp + std::sin(heading) * tool;
      p += v * dt * dir;
      out.push_back({t0 + static_cast<double>(i) * dt, p, true});
    }
    return out;
  }

  std::vector<PoseSample> fine(std::mt19937_64& rng, std::size_t n, double t0 = 0.0, Vec3 p0 = Vec3::Zero()) const {
    std::uniform_real_distribution<double> speed(0.004, 0.012), freq(1.0, 2.0), phase(0.0, 2.0 * std::numbers::pi);
    std::normal_distribution<double> tremor(0.0, 2e-5);
    const double v = speed(rng), f = freq(rng), ph = phase(rng);
    const double amp = 0.003;
    std::vector<PoseSample> out;
    Vec3 center = p0;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) * dt;
      center += v * dt * tool;
      Vec3 p = center + amp * std::sin(2.0 * std::numbers::pi * f * t + ph) * tool;
      p.x() += tremor(rng);
      p.y() += tremor(rng);
      out.push_back({t0 + t, p, true});
    }
    return out;
  }
};

inline TrajectoryWindow window_of(const std::vector<PoseSample>& samples, std::size_t capacity = 100) {
  TrajectoryWindow w(capacity);
  for (const auto& s : samples) w.push(s);
  return w;
}

// ---------------------------------------------------------------------------
// Files

class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("intentscale-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string source_path(const std::string& rel) { return std::string(INTENTSCALE_SOURCE_DIR) + "/" + rel; }

// Well-separated models for pipeline tests.
inline IntentModels reference_models() {
  IntentModels models;
  FcmConfig cfg;
  auto make = [&](FeatureKind kind, double a, double b) {
    FcmModel m;
    m.feature_kind = kind;
    m.config = cfg;
    m.centroids = {a, b};
    m.trained_on = 100;
    return assign_semantic_labels(m);
  };
  models[index_of(FeatureKind::speed)] = make(FeatureKind::speed, 0.01, 0.15);
  models[index_of(FeatureKind::alignness)] = make(FeatureKind::alignness, 0.3, 0.95);
  models[index_of(FeatureKind::displacement)] = make(FeatureKind::displacement, 0.004, 0.15);
  return models;
}

}  // namespace intentscale::testing
