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

#ifndef WBC_ENV_H_
#define WBC_ENV_H_

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "wbc/geometry.h"
#include "wbc/pathfield.h"
#include "wbc/reward.h"
#include "wbc/sim.h"

namespace wbc {

enum class EnvKind { kCorridor, kGapTrain, kGapTest };

std::string_view ToString(EnvKind kind);
EnvKind ParseEnvKind(std::string_view name);

struct Range {
  double min = 0.0;
  double max = 0.0;
};

struct CorridorSpec {
  Range length{6.0, 12.0};
  Range width{1.5, 2.5};
  std::array<int, 2> obstacle_count{0, 4};
  double min_passage_width = 0.8;
  // Fraction of the usable lateral span available to the goal; 0 puts the
  // goal on the centerline.
  double goal_lateral_span = 1.0;
};

struct GapSpec {
  double train_width = 0.3;
  double train_length = 0.5;
  Range width{0.25, 0.4};
  Range length{0.3, 0.8};
  double goal_position_noise = 0.05;
  double goal_angle_noise = 0.2;
  double joint_noise = 0.1;
  double spawn_distance = 1.5;
};

struct EnvSpec {
  EnvKind kind = EnvKind::kCorridor;
  std::uint64_t seed = 0;
  CorridorSpec corridor;
  GapSpec gap;

  std::vector<std::string> Validate(const RobotConfig& robot) const;
};

struct EpisodeConfig {
  double tolerance = 0.3;  // d_h
  double hold_time = 1.0;  // T_h
  double timeout = 60.0;   // T_t
  double step_time = 0.04; // tau
  RewardVariant variant = RewardVariant::kClamping;
  bool check_orientation = false;
  double orientation_tolerance = 0.2;

  int hold_steps_required() const;
  int timeout_steps() const;
  std::vector<std::string> Validate() const;
};

struct Scene {
  WorldGeometry world;
  RobotState start;
  Pose2 goal;
};

// Deterministic 64-bit seed mixing (SplitMix64 finalizer).
std::uint64_t DeriveSeed(std::uint64_t base, std::uint64_t stream);
double UniformReal(std::mt19937_64& rng, double lo, double hi);
int UniformInt(std::mt19937_64& rng, int lo, int hi);  // inclusive

// Both generators retry internally and throw after 100 rejected samples.
Scene GenerateCorridor(const EnvSpec& spec, const RobotConfig& robot,
                       const PathfieldConfig& planner, std::mt19937_64& rng);
Scene GenerateGap(const EnvSpec& spec, const RobotConfig& robot,
                  const PathfieldConfig& planner, std::mt19937_64& rng);
Scene GenerateScene(const EnvSpec& spec, const RobotConfig& robot,
                    const PathfieldConfig& planner, std::uint64_t seed);

// Lower bound on the distance from `goal` to any collision-free base center
// of a gap scene with the given slot geometry.
double GapBaseDistanceBound(const Vec2& goal, double wall_x, double slot_center,
                            double slot_width, double base_radius);

struct Observation {
  std::vector<double> front_scan;  // ranges / max range
  std::vector<double> rear_scan;
  std::vector<double> joint_pos;
  std::vector<double> joint_vel;
  std::array<double, 3> base_vel{};
  Pose2 goal_in_ee;

  static int FlatSize(const RobotConfig& robot);
  // front, rear, joint_pos, joint_vel, base_vel, goal_in_ee (x, y, phi).
  std::vector<double> Flatten() const;
};

Observation BuildObservation(const RobotConfig& robot, const RobotState& state,
                             const WorldGeometry& world, const Pose2& goal);

struct StepInfo {
  double goal_distance = 0.0;
  double hold_progress = 0.0;   // seconds of uninterrupted holding
  double path_deviation = 0.0;
  double path_progress = 0.0;   // fraction of the reference path
};

struct StepOutcome {
  Observation observation;
  double reward = 0.0;
  RewardTerms terms;
  Termination terminated = Termination::kNone;
  StepInfo info;
};

struct EpisodeSetup {
  RobotConfig robot;
  EpisodeConfig episode;
  RewardParams reward;
  PathfieldConfig pathfield;
};

// One goal-reaching episode. The end-effector reference path is planned once
// at construction from the initial end-effector position.
class Episode {
 public:
  Episode(const EpisodeSetup& setup, Scene scene, double tolerance);

  StepOutcome Step(const Action& action);

  const Observation& observation() const { return observation_; }
  const RobotState& state() const { return state_; }
  const Scene& scene() const { return scene_; }
  const PathPolyline& path() const { return path_; }
  const RewardParams& reward_params() const { return reward_; }
  double tolerance() const { return reward_state_.tolerance; }
  double hold_accumulator() const { return reward_state_.hold_accumulator; }
  int steps() const { return steps_; }
  int hold_steps() const { return hold_steps_; }
  Termination termination() const { return termination_; }
  bool terminated() const { return termination_ != Termination::kNone; }
  Vec2 end_effector() const;

 private:
  RobotConfig robot_;
  EpisodeConfig config_;
  RewardParams reward_;
  bool ratchet_ = false;
  Scene scene_;
  RobotState state_;
  PathPolyline path_;
  double path_norm_ = 1.0;
  PathMetricsState metrics_;
  RewardState reward_state_;
  Observation observation_;
  int steps_ = 0;
  int hold_steps_ = 0;
  Termination termination_ = Termination::kNone;
};

}  // namespace wbc

#endif  // WBC_ENV_H_
