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

#ifndef WBC_SIM_H_
#define WBC_SIM_H_

#include <array>
#include <numbers>
#include <string>
#include <vector>

#include "wbc/geometry.h"

namespace wbc {

struct JointLimit {
  double min = -2.0;
  double max = 2.0;
};

struct LidarConfig {
  int beams = 64;
  double field_of_view = std::numbers::pi;
  double max_range = 5.0;
  // Sensor origins in the base frame.
  Vec2 front_mount{};
  Vec2 rear_mount{};
};

// Planar mobile manipulator: a holonomic disk base carrying a K-link
// revolute arm. Arm links are capsules around their spines.
struct RobotConfig {
  double base_radius = 0.3;
  Vec2 arm_mount_offset{0.2, 0.0};
  std::vector<double> link_lengths{0.3, 0.3, 0.2};
  double link_capsule_radius = 0.05;
  std::vector<JointLimit> joint_limits{3, JointLimit{}};
  double clamp_margin = 0.05;
  double max_joint_vel = 1.5;
  std::array<double, 3> max_base_vel{0.5, 0.5, 1.0};
  double max_joint_acc = 2.0;
  std::array<double, 3> max_base_acc{1.0, 1.0, 2.0};
  LidarConfig lidar;

  int num_joints() const { return static_cast<int>(link_lengths.size()); }
  double arm_reach() const;

  // Human-readable invariant violations, empty when valid.
  std::vector<std::string> Validate() const;
};

// base_vel is expressed in the base frame (vx forward, vy left, omega).
struct RobotState {
  Pose2 base_pose;
  std::array<double, 3> base_vel{};
  std::vector<double> joint_pos;
  std::vector<double> joint_vel;

  static RobotState AtRest(const RobotConfig& config, const Pose2& pose);
  bool operator==(const RobotState&) const = default;
};

struct Action {
  std::array<double, 3> base_acc{};
  std::vector<double> joint_acc;

  static Action Zero(const RobotConfig& config);
};

struct WorldGeometry {
  std::vector<Segment> segments;
  std::vector<Box> boxes;
  Box bounds;
};

struct LidarScan {
  std::vector<double> ranges;
};

enum class Sensor { kFront, kRear };

struct ArmFrames {
  Pose2 base;
  // Mount point followed by the far end of every link; the last entry is the
  // end-effector position.
  std::vector<Vec2> joints;
  Pose2 end_effector;

  std::vector<Segment> Links() const;
};

ArmFrames ForwardKinematics(const RobotConfig& config, const RobotState& state);

struct DynamicsResult {
  RobotState state;
  bool joint_limit_hit = false;
};

// Semi-implicit Euler: velocities first (clipped), then positions. With
// clamping, joints stop at the margin-shrunk limits; without it they pass
// through and `joint_limit_hit` reports a crossing of the raw limits.
DynamicsResult StepDynamics(const RobotConfig& config, const RobotState& state,
                            const Action& action, double dt, bool clamping);

bool CollisionCheck(const RobotConfig& config, const RobotState& state,
                    const WorldGeometry& world);

// Direction of beam `index` in the world frame.
double BeamAngle(const RobotConfig& config, const Pose2& base, Sensor sensor,
                 int index);
Vec2 SensorOrigin(const RobotConfig& config, const Pose2& base, Sensor sensor);
LidarScan CastLidar(const RobotConfig& config, const RobotState& state,
                    const WorldGeometry& world, Sensor sensor);

double DistanceToWorld(const Vec2& p, const WorldGeometry& world);
double DistanceToWorld(const Segment& s, const WorldGeometry& world);

// Smallest surface gap between the robot body (base disk and link capsules)
// and the world; negative under penetration.
double MinClearance(const RobotConfig& config, const RobotState& state,
                    const WorldGeometry& world);

}  // namespace wbc

#endif  // WBC_SIM_H_
