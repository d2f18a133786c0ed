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

#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

namespace wbc {
namespace {

StepRewardInput Input(double dpd, double dpt, double length, double goal) {
  StepRewardInput in;
  in.deviation_delta = dpd;
  in.progress_delta = dpt;
  in.path_length = length;
  in.goal_distance = goal;
  return in;
}

TEST(RewardTest, OutsideToleranceVector) {
  const RewardParams p;
  const StepReward r = ComputeStepReward(p, ResetRewardState(0.3), Input(0.01, 0.02, 8.0, 1.0));
  EXPECT_NEAR(r.terms.time, -0.01, 1e-12);
  EXPECT_NEAR(r.terms.path_deviation, -0.1, 1e-12);
  EXPECT_NEAR(r.terms.path_progress, 0.125, 1e-12);
  EXPECT_NEAR(r.reward, 0.015, 1e-12);
  EXPECT_EQ(r.state.hold_accumulator, 0.0);
  EXPECT_FALSE(r.state.inside);
}

TEST(RewardTest, InsideToleranceVector) {
  const RewardParams p;
  const StepReward r = ComputeStepReward(p, ResetRewardState(0.3), Input(0.0, 0.0, 8.0, 0.15));
  EXPECT_NEAR(r.terms.hold_time, 0.8, 1e-12);
  EXPECT_NEAR(r.terms.hold_distance, 0.8, 1e-12);
  EXPECT_NEAR(r.reward, 1.59, 1e-12);
  EXPECT_NEAR(r.state.hold_accumulator, 1.6, 1e-12);
  EXPECT_TRUE(r.state.inside);
}

TEST(RewardTest, BoundaryCountsAsInside) {
  const StepReward r =
      ComputeStepReward(RewardParams{}, ResetRewardState(0.3), Input(0.0, 0.0, 1.0, 0.3));
  EXPECT_TRUE(r.state.inside);
  EXPECT_NEAR(r.terms.hold_distance, 0.0, 1e-15);
}

TEST(RewardTest, HoldTermsStayInBand) {
  const RewardParams p;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double tol = 0.05 + 0.45 * u(rng);
    const StepReward r =
        ComputeStepReward(p, ResetRewardState(tol), Input(0.0, 0.0, 1.0, tol * u(rng)));
    const double hold = r.terms.hold_time + r.terms.hold_distance;
    EXPECT_GE(hold, 0.8 - 1e-12);
    EXPECT_LE(hold, 2.4 + 1e-12);
  }
}

TEST(RewardTest, EnterStayExitIsNeutral) {
  const RewardParams p;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    RewardState s = ResetRewardState(0.3);
    double hold_sum = 0.0;
    const int stay = 1 + static_cast<int>(u(rng) * 30);
    for (int k = 0; k < stay; ++k) {
      const StepReward r = ComputeStepReward(p, s, Input(0.0, 0.0, 1.0, 0.3 * u(rng)));
      hold_sum += r.terms.hold_time + r.terms.hold_distance + r.terms.hold_refund;
      s = r.state;
    }
    const StepReward exit = ComputeStepReward(p, s, Input(0.0, 0.0, 1.0, 0.31));
    hold_sum += exit.terms.hold_time + exit.terms.hold_distance + exit.terms.hold_refund;
    EXPECT_NEAR(hold_sum, 0.0, 1e-12);
    EXPECT_EQ(exit.state.hold_accumulator, 0.0);
    EXPECT_FALSE(exit.state.inside);
  }
}

TEST(RewardTest, RefundOnlyOnExitStep) {
  const RewardParams p;
  RewardState s = ResetRewardState(0.3);
  s = ComputeStepReward(p, s, Input(0, 0, 1, 0.1)).state;
  const StepReward exit = ComputeStepReward(p, s, Input(0, 0, 1, 1.0));
  EXPECT_LT(exit.terms.hold_refund, 0.0);
  const StepReward after = ComputeStepReward(p, exit.state, Input(0, 0, 1, 1.0));
  EXPECT_EQ(after.terms.hold_refund, 0.0);
}

TEST(RewardTest, TimePenaltyTelescopesOverTimeout) {
  const RewardParams p;
  RewardState s = ResetRewardState(0.3);
  double total = 0.0;
  for (int k = 0; k < 1500; ++k) {
    const StepReward r = ComputeStepReward(p, s, Input(0, 0, 1, 2.0));
    total += r.terms.time;
    s = r.state;
  }
  EXPECT_NEAR(total, -15.0, 1e-9);
}

TEST(RewardTest, ProgressTelescopesToWeight) {
  const RewardParams p;
  double total = 0.0;
  for (int k = 0; k < 40; ++k) {
    total += ComputeStepReward(p, ResetRewardState(0.3), Input(0, 0.2, 8.0, 2.0))
                 .terms.path_progress;
  }
  EXPECT_NEAR(total, 50.0, 1e-9);
}

TEST(RewardTest, Terminals) {
  RewardParams p;
  EXPECT_EQ(TerminalReward(p, Termination::kCollision), -60.0);
  EXPECT_EQ(TerminalReward(p, Termination::kSuccess), 10.0);
  EXPECT_EQ(TerminalReward(p, Termination::kTimeout), 0.0);
  EXPECT_THROW(TerminalReward(p, Termination::kJointLimit), std::logic_error);
  EXPECT_THROW(TerminalReward(p, Termination::kNone), std::invalid_argument);
  p.variant = RewardVariant::kBaseline;
  EXPECT_EQ(TerminalReward(p, Termination::kJointLimit), -20.0);
}

TEST(RewardTest, SafetyMarginOnlyUnderBaseline) {
  RewardParams p;
  StepRewardInput in = Input(0, 0, 1, 2.0);
  in.min_clearance = 0.15;
  EXPECT_EQ(ComputeStepReward(p, ResetRewardState(0.3), in).terms.safety_margin, 0.0);
  p.variant = RewardVariant::kBaseline;
  EXPECT_NEAR(ComputeStepReward(p, ResetRewardState(0.3), in).terms.safety_margin, -0.5,
              1e-12);
  in.min_clearance = 0.5;
  EXPECT_EQ(ComputeStepReward(p, ResetRewardState(0.3), in).terms.safety_margin, 0.0);
  in.min_clearance = std::numeric_limits<double>::infinity();
  EXPECT_EQ(ComputeStepReward(p, ResetRewardState(0.3), in).terms.safety_margin, 0.0);
}

TEST(RewardTest, RejectsBadInputs) {
  const RewardParams p;
  const RewardState s = ResetRewardState(0.3);
  EXPECT_THROW(ComputeStepReward(p, s, Input(NAN, 0, 1, 1)), std::invalid_argument);
  EXPECT_THROW(ComputeStepReward(p, s, Input(0, 0, 0, 1)), std::invalid_argument);
  EXPECT_THROW(ComputeStepReward(p, s, Input(0, 0, 1, -1)), std::invalid_argument);
  EXPECT_THROW(ResetRewardState(0.6), std::invalid_argument);
  EXPECT_THROW(ResetRewardState(0.01), std::invalid_argument);
}

TEST(RewardTest, ResetClearsState) {
  const RewardState s = ResetRewardState(0.2);
  EXPECT_EQ(s.hold_accumulator, 0.0);
  EXPECT_FALSE(s.inside);
  EXPECT_EQ(s.tolerance, 0.2);
}

TEST(RewardTest, NameRoundTrip) {
  for (Termination t : {Termination::kNone, Termination::kCollision, Termination::kTimeout,
                        Termination::kJointLimit, Termination::kSuccess}) {
    EXPECT_EQ(ParseTermination(ToString(t)), t);
  }
  EXPECT_EQ(ParseRewardVariant("baseline"), RewardVariant::kBaseline);
  EXPECT_THROW(ParseRewardVariant("clamp"), std::invalid_argument);
}

}  // namespace
}  // namespace wbc
