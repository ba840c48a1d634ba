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

#include <array>
#include <cmath>
#include <string>

namespace intentscale {

// Parameter vector theta = [rho, s_fine, s_coarse].
using ParamVector = std::array<double, 3>;

struct ParamBounds {
  ParamVector min = {0.01, 0.2, 1.0};
  ParamVector max = {0.5, 1.5, 5.0};

  void validate() const {
    for (std::size_t i = 0; i < 3; ++i) {
      if (!std::isfinite(min[i]) || !std::isfinite(max[i]) || !(min[i] < max[i])) {
        throw Error(Errc::range, "parameter bounds must be finite with min < max");
      }
    }
    if (!(min[0] > 0.0) || max[0] > 1.0) throw Error(Errc::range, "rho bounds must lie in (0, 1]");
    if (!(min[1] > 0.0) || !(min[2] > 0.0)) throw Error(Errc::range, "scale bounds must be positive");
  }

  bool operator==(const ParamBounds&) const = default;
};

struct ControllerParams {
  double rho = 0.05;
  double s_fine = 1.0;
  double s_coarse = 3.0;
  ParamBounds bounds;

  ParamVector theta() const { return {rho, s_fine, s_coarse}; }

  // Inverse of denormalize_params: the slider positions for these values.
  ParamVector normalized() const {
    const auto th = theta();
    ParamVector out{};
    for (std::size_t i = 0; i < 3; ++i) out[i] = (th[i] - bounds.min[i]) / (bounds.max[i] - bounds.min[i]);
    return out;
  }

  void validate() const {
    bounds.validate();
    const auto th = theta();
    for (std::size_t i = 0; i < 3; ++i) {
      if (!std::isfinite(th[i]) || th[i] < bounds.min[i] || th[i] > bounds.max[i]) {
        throw Error(Errc::range, "controller parameter outside its bounds");
      }
    }
    if (s_fine > s_coarse) throw Error(Errc::constraint, "s_fine must not exceed s_coarse");
  }

  bool operator==(const ControllerParams&) const = default;
};

// theta = theta_norm (.) (theta_max - theta_min) + theta_min, element-wise.
inline ControllerParams denormalize_params(const ParamVector& theta_norm, const ParamBounds& bounds) {
  bounds.validate();
  ParamVector th{};
  for (std::size_t i = 0; i < 3; ++i) {
    const double v = theta_norm[i];
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw Error(Errc::range, "normalized parameter " + std::to_string(i) + " outside [0,1]");
    }
    // std::lerp: exact at both endpoints and monotone in v.
    th[i] = std::lerp(bounds.min[i], bounds.max[i], v);
  }
  ControllerParams p{th[0], th[1], th[2], bounds};
  if (p.s_fine > p.s_coarse) {
    throw Error(Errc::constraint, "denormalized s_fine exceeds s_coarse");
  }
  return p;
}

}  // namespace intentscale
