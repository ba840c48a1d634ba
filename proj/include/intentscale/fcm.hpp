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

// Two-cluster fuzzy C-means on scalar samples.
//
// Objective:   J = sum_i sum_j u_ij^m (x_i - c_j)^2
// Membership:  u_ij = 1 / sum_k (|x_i - c_j| / |x_i - c_k|)^(2/(m-1))
// Centroid:    c_j  = sum_i u_ij^m x_i / sum_i u_ij^m
//
// Training alternates the two updates from percentile initial centroids
// until the largest centroid shift drops below tol. Cluster 0 always holds
// the lower initial centroid; in one dimension the order is preserved.

#include "intentscale/core.hpp"

#include <algorithm>
#include <array>
#include <concepts>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace intentscale {

struct FcmConfig {
  double m = 2.0;
  std::size_t max_iter = 200;
  double tol = 1e-9;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(m > 1.0) || !std::isfinite(m)) throw Error(Errc::range, "fuzziness m must be > 1");
    if (!(tol > 0.0)) throw Error(Errc::range, "tol must be > 0");
    if (max_iter == 0) throw Error(Errc::range, "max_iter must be positive");
  }

  bool operator==(const FcmConfig&) const = default;
};

struct MembershipPair {
  double coarse = 0.0;
  double fine = 0.0;

  double operator[](MotionLabel label) const noexcept {
    return label == MotionLabel::coarse ? coarse : fine;
  }
  bool operator==(const MembershipPair&) const = default;
};

inline constexpr double kZeroDistance = 1e-12;

// Memberships of x in the two clusters (standard fuzzy C-means form). A point on a
// centroid belongs to it with membership 1.
template <std::floating_point Real>
std::array<Real, 2> fcm_memberships(const std::array<Real, 2>& centroids, Real x, Real m) {
  const std::array<Real, 2> d = {std::abs(x - centroids[0]), std::abs(x - centroids[1])};
  if (d[0] < Real(kZeroDistance) || d[1] < Real(kZeroDistance)) {
    if (d[0] <= d[1]) return {Real(1), Real(0)};
    return {Real(0), Real(1)};
  }
  const Real p = Real(2) / (m - Real(1));
  std::array<Real, 2> u{};
  for (std::size_t j = 0; j < 2; ++j) {
    Real denom = 0;
    for (std::size_t k = 0; k < 2; ++k) {
      const Real r = d[j] / d[k];
      denom += (p == Real(2)) ? r * r : std::pow(r, p);
    }
    u[j] = Real(1) / denom;
  }
  return u;
}

template <std::floating_point Real>
Real fcm_objective_at(std::span<const Real> samples, const std::array<Real, 2>& centroids, Real m) {
  Real J = 0;
  for (Real x : samples) {
    const auto u = fcm_memberships(centroids, x, m);
    for (std::size_t j = 0; j < 2; ++j) {
      const Real d = x - centroids[j];
      J += std::pow(u[j], m) * d * d;
    }
  }
  return J;
}

// One membership update followed by one centroid update.
template <std::floating_point Real>
std::array<Real, 2> fcm_update(std::span<const Real> samples, const std::array<Real, 2>& centroids, Real m) {
  std::array<Real, 2> num{}, den{};
  for (Real x : samples) {
    const auto u = fcm_memberships(centroids, x, m);
    for (std::size_t j = 0; j < 2; ++j) {
      const Real w = (m == Real(2)) ? u[j] * u[j] : std::pow(u[j], m);
      num[j] += w * x;
      den[j] += w;
    }
  }
  std::array<Real, 2> next = centroids;
  for (std::size_t j = 0; j < 2; ++j) {
    if (den[j] > Real(0)) next[j] = num[j] / den[j];
  }
  return next;
}

struct FcmTrace {
  std::vector<double> objective;      // J at the initial and every updated centroid pair
  std::vector<double> centroid_shift;  // max |c_new - c_old| per iteration
};

template <std::floating_point Real>
struct BasicFcmModel {
  std::array<Real, 2> centroids{};
  // label_of_cluster[j]; empty until assign_semantic_labels.
  std::optional<std::array<MotionLabel, 2>> label_of_cluster;
  FeatureKind feature_kind = FeatureKind::speed;
  FcmConfig config;
  std::size_t trained_on = 0;
  std::size_t iterations = 0;
  bool converged = false;

  bool labeled() const noexcept { return label_of_cluster.has_value(); }

  std::array<Real, 2> cluster_memberships(Real x) const {
    return fcm_memberships(centroids, x, static_cast<Real>(config.m));
  }

  Real centroid_of(MotionLabel label) const {
    require_labels();
    return (*label_of_cluster)[0] == label ? centroids[0] : centroids[1];
  }

  void require_labels() const {
    if (!label_of_cluster) throw Error(Errc::usage, "model has no semantic labels");
  }

  bool operator==(const BasicFcmModel&) const = default;
};

using FcmModel = BasicFcmModel<double>;

namespace detail {

// Linear-interpolated percentile of sorted data, q in [0,1].
template <std::floating_point Real>
Real percentile_sorted(const std::vector<Real>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const Real frac = static_cast<Real>(pos - static_cast<double>(lo));
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace detail

template <std::floating_point Real>
std::array<Real, 2> fcm_initial_centroids(std::span<const Real> samples, std::uint64_t seed) {
  std::vector<Real> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const Real range = sorted.back() - sorted.front();
  // Push the quartiles apart by up to 0.5% of the range each, so that data
  // with coincident quartiles still starts from two distinct centroids.
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Real push_lo = static_cast<Real>(0.005 * (1.0 - unit(rng))) * range;
  const Real push_hi = static_cast<Real>(0.005 * (1.0 - unit(rng))) * range;
  return {detail::percentile_sorted(sorted, 0.25) - push_lo, detail::percentile_sorted(sorted, 0.75) + push_hi};
}

inline void validate_training_samples(std::span<const double> samples) {
  if (samples.size() < 4) {
    throw Error(Errc::insufficient_data, "fcm training needs at least 4 samples, got " +
                                             std::to_string(samples.size()));
  }
  for (double x : samples) {
    if (!std::isfinite(x)) throw Error(Errc::non_finite, "fcm training sample is not finite");
  }
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  if (!(*hi > *lo)) throw Error(Errc::degenerate_data, "fcm training samples are all identical");
}

// Unlabeled model; call assign_semantic_labels before fcm_membership.
inline FcmModel fcm_train(std::span<const double> samples, FeatureKind kind, const FcmConfig& cfg,
                          FcmTrace* trace = nullptr) {
  cfg.validate();
  validate_training_samples(samples);

  FcmModel model;
  model.feature_kind = kind;
  model.config = cfg;
  model.trained_on = samples.size();
  model.centroids = fcm_initial_centroids(samples, cfg.seed);
  if (trace) {
    trace->objective.clear();
    trace->centroid_shift.clear();
    trace->objective.push_back(fcm_objective_at(samples, model.centroids, cfg.m));
  }

  for (std::size_t it = 0; it < cfg.max_iter; ++it) {
    const auto next = fcm_update(samples, model.centroids, cfg.m);
    const double shift =
        std::max(std::abs(next[0] - model.centroids[0]), std::abs(next[1] - model.centroids[1]));
    model.centroids = next;
    model.iterations = it + 1;
    if (trace) {
      trace->objective.push_back(fcm_objective_at(samples, model.centroids, cfg.m));
      trace->centroid_shift.push_back(shift);
    }
    if (shift < cfg.tol) {
      model.converged = true;
      break;
    }
  }
  return model;
}

// Speed and displacement: the higher centroid is coarse. Alignness: the
// higher centroid is fine.
inline FcmModel assign_semantic_labels(FcmModel model) {
  if (std::abs(model.centroids[0] - model.centroids[1]) < kZeroDistance) {
    throw Error(Errc::ambiguous_label, "centroids coincide; cannot label clusters");
  }
  const std::size_t high = model.centroids[1] > model.centroids[0] ? 1 : 0;
  const MotionLabel high_label =
      model.feature_kind == FeatureKind::alignness ? MotionLabel::fine : MotionLabel::coarse;
  const MotionLabel low_label = high_label == MotionLabel::fine ? MotionLabel::coarse : MotionLabel::fine;
  std::array<MotionLabel, 2> labels{};
  labels[high] = high_label;
  labels[1 - high] = low_label;
  model.label_of_cluster = labels;
  return model;
}

inline FcmModel fcm_train_labeled(std::span<const double> samples, FeatureKind kind, const FcmConfig& cfg,
                                  FcmTrace* trace = nullptr) {
  return assign_semantic_labels(fcm_train(samples, kind, cfg, trace));
}

inline MembershipPair fcm_membership(const FcmModel& model, double x) {
  model.require_labels();
  const auto u = model.cluster_memberships(x);
  MembershipPair out;
  for (std::size_t j = 0; j < 2; ++j) {
    ((*model.label_of_cluster)[j] == MotionLabel::coarse ? out.coarse : out.fine) = u[j];
  }
  return out;
}

inline double fcm_objective(const FcmModel& model, std::span<const double> samples) {
  if (samples.empty()) throw Error(Errc::insufficient_data, "objective needs at least one sample");
  return fcm_objective_at(samples, model.centroids, model.config.m);
}

}  // namespace intentscale
