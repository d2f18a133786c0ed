// Copyright 2026 The Planar WBC Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "wbc/reward.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace wbc {

std::string_view ToString(RewardVariant variant) {
  return variant == RewardVariant::kBaseline ? "baseline" : "clamping";
}

std::string_view ToString(Termination reason) {
  switch (reason) {
    case Termination::kNone: return "none";
    case Termination::kCollision: return "collision";
    case Termination::kTimeout: return "timeout";
    case Termination::kJointLimit: return "joint_limit";
    case Termination::kSuccess: return "success";
  }
  return "none";
}

RewardVariant ParseRewardVariant(std::string_view name) {
  if (name == "baseline") return RewardVariant::kBaseline;
  if (name == "clamping") return RewardVariant::kClamping;
  throw std::invalid_argument("unknown reward variant '" + std::string(name) + "'");
}

Termination ParseTermination(std::string_view name) {
  for (Termination t : {Termination::kNone, Termination::kCollision, Termination::kTimeout,
                        Termination::kJointLimit, Termination::kSuccess}) {
    if (ToString(t) == name) return t;
  }
  throw std::invalid_argument("unknown termination '" + std::string(name) + "'");
}

StepReward ComputeStepReward(const RewardParams& p, const RewardState& state,
                             const StepRewardInput& in) {
  for (double v : {in.deviation_delta, in.progress_delta, in.path_length, in.goal_distance}) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite reward input");
  }
  if (!(in.path_length > 0.0)) throw std::invalid_argument("path length must be > 0");
  if (!(in.goal_distance >= 0.0)) throw std::invalid_argument("goal distance must be >= 0");

  StepReward out;
  out.state = state;
  RewardTerms& t = out.terms;
  t.time = p.w_t * p.step_time / p.timeout;
  t.path_deviation = p.w_pd * in.deviation_delta;
  t.path_progress = p.w_pt * in.progress_delta / in.path_length;

  const bool inside = in.goal_distance <= state.tolerance;
  if (inside) {
    const double scale = p.step_time / p.hold_time;
    t.hold_time = p.w_ht * scale;
    t.hold_distance =
        p.w_hd * (1.0 - std::min(1.0, in.goal_distance / state.tolerance)) * scale;
    out.state.hold_accumulator += t.hold_time + t.hold_distance;
  } else if (state.inside) {
    t.hold_refund = -state.hold_accumulator;
    out.state.hold_accumulator = 0.0;
  }
  out.state.inside = inside;

  if (p.variant == RewardVariant::kBaseline) {
    // +inf is legitimate in an empty world.
    if (std::isnan(in.min_clearance) || in.min_clearance == -HUGE_VAL) {
      throw std::invalid_argument("invalid clearance");
    }
    t.safety_margin = p.w_sm * std::max(0.0, 1.0 - in.min_clearance / p.d_safe);
  }
  out.reward = t.Total();
  return out;
}

double TerminalReward(const RewardParams& params, Termination reason) {
  switch (reason) {
    case Termination::kCollision: return params.D_c;
    case Termination::kSuccess: return params.D_h;
    case Termination::kTimeout: return 0.0;
    case Termination::kJointLimit:
      if (params.variant == RewardVariant::kClamping) {
        throw std::logic_error("joint_limit termination under the clamping variant");
      }
      return params.D_jl;
    case Termination::kNone: break;
  }
  throw std::invalid_argument("terminal reward requested for a non-terminal step");
}

RewardState ResetRewardState(double tolerance) {
  if (!(tolerance >= 0.05 - 1e-12 && tolerance <= 0.5 + 1e-12)) {
    throw std::invalid_argument("tolerance outside [0.05, 0.5]");
  }
  return RewardState{0.0, false, tolerance};
}

}  // namespace wbc
