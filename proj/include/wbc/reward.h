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

#ifndef WBC_REWARD_H_
#define WBC_REWARD_H_

#include <string>
#include <string_view>

namespace wbc {

enum class RewardVariant {
  kBaseline,  // joint-limit termination plus safety-margin penalty
  kClamping,  // joints clamped programmatically; no limit or margin terms
};

enum class Termination { kNone, kCollision, kTimeout, kJointLimit, kSuccess };

std::string_view ToString(RewardVariant variant);
std::string_view ToString(Termination reason);
RewardVariant ParseRewardVariant(std::string_view name);
Termination ParseTermination(std::string_view name);

// Defaults are the published reward parameters. D_jl, w_sm and d_safe only
// act under the baseline variant.
struct RewardParams {
  double w_t = -15.0;
  double w_pd = -10.0;
  double w_pt = 50.0;
  double w_ht = 20.0;
  double w_hd = 40.0;
  double D_c = -60.0;
  double D_h = 10.0;
  double D_jl = -20.0;
  double w_sm = -1.0;
  double d_safe = 0.3;
  double step_time = 0.04;  // tau
  double timeout = 60.0;    // T_t
  double hold_time = 1.0;   // T_h
  RewardVariant variant = RewardVariant::kClamping;
};

struct RewardState {
  double hold_accumulator = 0.0;  // I_h
  bool inside = false;
  double tolerance = 0.3;  // d_h
};

// Each additive term of one step's reward.
struct RewardTerms {
  double time = 0.0;
  double path_deviation = 0.0;
  double path_progress = 0.0;
  double hold_time = 0.0;
  double hold_distance = 0.0;
  double hold_refund = 0.0;  // -I_h on the step the end-effector exits
  double safety_margin = 0.0;
  double terminal = 0.0;

  double Total() const {
    return time + path_deviation + path_progress + hold_time + hold_distance +
           hold_refund + safety_margin + terminal;
  }
};

struct StepRewardInput {
  double deviation_delta = 0.0;  // change in distance from the reference path
  double progress_delta = 0.0;   // change in arc length along the path
  double path_length = 1.0;      // total reference path length
  double goal_distance = 0.0;    // end-effector to goal
  double min_clearance = 0.0;    // only read by the baseline variant
};

struct StepReward {
  double reward = 0.0;
  RewardTerms terms;
  RewardState state;
};

// Shaped per-step reward. Terminal bonuses are added separately.
StepReward ComputeStepReward(const RewardParams& params, const RewardState& state,
                             const StepRewardInput& input);

double TerminalReward(const RewardParams& params, Termination reason);

RewardState ResetRewardState(double tolerance);

}  // namespace wbc

#endif  // WBC_REWARD_H_
