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

#include "intentscale/fcm.hpp"
#include "intentscale/features.hpp"
#include "intentscale/intent.hpp"
#include "intentscale/params.hpp"

#include <deque>
#include <string>
#include <vector>

namespace intentscale {

class FeatureBuffer {
 public:
  static constexpr std::size_t kDefaultCapacity = 500;

  explicit FeatureBuffer(std::size_t capacity = kDefaultCapacity) : capacity_(capacity) {
    if (capacity_ == 0) throw Error(Errc::range, "feature buffer capacity must be positive");
  }

  void record(const FeatureVector& f) {
    if (entries_.size() == capacity_) entries_.pop_front();
    entries_.push_back(f);
  }

  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  bool empty() const noexcept { return entries_.empty(); }
  const FeatureVector& operator[](std::size_t i) const { return entries_[i]; }
  const FeatureVector& back() const { return entries_.back(); }
  auto begin() const noexcept { return entries_.begin(); }
  auto end() const noexcept { return entries_.end(); }

  // One feature component over the most recent min(n, size()) entries, oldest first.
  std::vector<double> recent(FeatureKind kind, std::size_t n) const {
    const std::size_t count = std::min(n, entries_.size());
    std::vector<double> out;
    out.reserve(count);
    for (std::size_t i = entries_.size() - count; i < entries_.size(); ++i) out.push_back(entries_[i][kind]);
    return out;
  }

 private:
  std::size_t capacity_;
  std::deque<FeatureVector> entries_;
};

struct RetrainReport {
  std::array<bool, 3> updated{};
  std::array<std::string, 3> skip_reason;  // empty when updated
  std::size_t samples_used = 0;

  bool any_updated() const noexcept { return updated[0] || updated[1] || updated[2]; }
};

struct RetrainResult {
  IntentModels models;
  RetrainReport report;
};

inline constexpr std::size_t kMinRetrainSamples = 4;

// Retrains each feature's model on the last n_retrain buffer entries. A
// feature whose data is too short or degenerate keeps its previous model.
inline RetrainResult retrain_on_unclutch(const FeatureBuffer& buffer, const IntentModels& models,
                                         std::size_t n_retrain, const FcmConfig& cfg) {
  RetrainResult out{models, {}};
  out.report.samples_used = std::min(n_retrain, buffer.size());
  for (auto kind : kFeatureKinds) {
    const auto i = index_of(kind);
    if (out.report.samples_used < kMinRetrainSamples) {
      out.report.skip_reason[i] = "insufficient_data";
      continue;
    }
    const auto samples = buffer.recent(kind, n_retrain);
    try {
      out.models[i] = fcm_train_labeled(samples, kind, cfg);
      out.report.updated[i] = true;
    } catch (const Error& e) {
      out.report.skip_reason[i] = std::string(to_string(e.code()));
    }
  }
  return out;
}

}  // namespace intentscale
