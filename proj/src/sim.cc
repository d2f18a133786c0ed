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

#include "wbc/sim.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace wbc {

namespace {

void RequireFinite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw std::invalid_argument(std::string("non-finite ") + what);
  }
}

void CheckDimensions(const RobotConfig& config, const RobotState& state) {
  const size_t k = config.link_lengths.size();
  if (state.joint_pos.size() != k || state.joint_vel.size() != k) {
    std::ostringstream msg;
    msg << "robot state has " << state.joint_pos.size() << " joint positions and "
        << state.joint_vel.size() << " joint velocities, config has " << k
        << " joints";
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

double RobotConfig::arm_reach() const {
  double reach = Norm(arm_mount_offset);
  for (double l : link_lengths) reach += l;
  return reach;
}

std::vector<std::string> RobotConfig::Validate() const {
  std::vector<std::string> errors;
  auto fail = [&errors](std::string msg) { errors.push_back(std::move(msg)); };
  if (link_lengths.empty()) fail("link_lengths: at least one link required");
  for (size_t i = 0; i < link_lengths.size(); ++i) {
    if (!(link_lengths[i] > 0.0)) {
      fail("link_lengths[" + std::to_string(i) + "]: must be > 0");
    }
  }
  if (!(link_capsule_radius > 0.0)) fail("link_capsule_radius: must be > 0");
  if (!(base_radius > link_capsule_radius)) {
    fail("base_radius: must exceed link_capsule_radius");
  }
  if (joint_limits.size() != link_lengths.size()) {
    fail("joint_limits: expected one [min, max] pair per link");
  }
  if (!(clamp_margin >= 0.0)) fail("clamp_margin: must be >= 0");
  for (size_t i = 0; i < joint_limits.size(); ++i) {
    const JointLimit& lim = joint_limits[i];
    const std::string path = "joint_limits[" + std::to_string(i) + "]";
    if (!(lim.min < lim.max)) {
      fail(path + ": min must be < max");
    } else if (!(clamp_margin < 0.5 * (lim.max - lim.min))) {
      fail(path + ": clamp_margin must be < half the limit span");
    }
  }
  if (!(max_joint_vel > 0.0)) fail("max_joint_vel: must be > 0");
  if (!(max_joint_acc > 0.0)) fail("max_joint_acc: must be > 0");
  for (int i = 0; i < 3; ++i) {
    if (!(max_base_vel[i] > 0.0)) fail("max_base_vel: components must be > 0");
    if (!(max_base_acc[i] > 0.0)) fail("max_base_acc: components must be > 0");
  }
  if (lidar.beams < 1) fail("lidar.beams: must be >= 1");
  if (!(lidar.field_of_view > 0.0) ||
      !(lidar.field_of_view <= 2.0 * std::numbers::pi)) {
    fail("lidar.field_of_view: must be in (0, 2*pi]");
  }
  if (!(lidar.max_range > 0.0)) fail("lidar.max_range: must be > 0");
  return errors;
}

RobotState RobotState::AtRest(const RobotConfig& config, const Pose2& pose) {
  RobotState state;
  state.base_pose = pose;
  state.joint_pos.assign(config.link_lengths.size(), 0.0);
  state.joint_vel.assign(config.link_lengths.size(), 0.0);
  return state;
}

Action Action::Zero(const RobotConfig& config) {
  Action action;
  action.joint_acc.assign(config.link_lengths.size(), 0.0);
  return action;
}

std::vector<Segment> ArmFrames::Links() const {
  std::vector<Segment> links;
  links.reserve(joints.size() > 0 ? joints.size() - 1 : 0);
  for (size_t i = 0; i + 1 < joints.size(); ++i) {
    links.push_back({joints[i], joints[i + 1]});
  }
  return links;
}

ArmFrames ForwardKinematics(const RobotConfig& config, const RobotState& state) {
  CheckDimensions(config, state);
  ArmFrames frames;
  frames.base = state.base_pose;
  Pose2 frame = Compose(state.base_pose,
                        {config.arm_mount_offset.x, config.arm_mount_offset.y, 0.0});
  frames.joints.reserve(config.link_lengths.size() + 1);
  frames.joints.push_back(frame.position());
  for (size_t i = 0; i < config.link_lengths.size(); ++i) {
    frame = Compose(frame, {0.0, 0.0, state.joint_pos[i]});
    frame = Compose(frame, {config.link_lengths[i], 0.0, 0.0});
    frames.joints.push_back(frame.position());
  }
  frames.end_effector = frame;
  return frames;
}

DynamicsResult StepDynamics(const RobotConfig& config, const RobotState& state,
                            const Action& action, double dt, bool clamping) {
  CheckDimensions(config, state);
  if (action.joint_acc.size() != config.link_lengths.size()) {
    throw std::invalid_argument("action joint dimension does not match config");
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument("step time must be positive and finite");
  }
  RequireFinite(state.base_pose.x, "base pose");
  RequireFinite(state.base_pose.y, "base pose");
  RequireFinite(state.base_pose.theta, "base pose");
  for (int i = 0; i < 3; ++i) {
    RequireFinite(state.base_vel[i], "base velocity");
    RequireFinite(action.base_acc[i], "base acceleration");
    if (std::abs(action.base_acc[i]) > config.max_base_acc[i] * (1.0 + 1e-12)) {
      throw std::invalid_argument("base acceleration outside configured bounds");
    }
  }
  for (size_t j = 0; j < state.joint_pos.size(); ++j) {
    RequireFinite(state.joint_pos[j], "joint position");
    RequireFinite(state.joint_vel[j], "joint velocity");
    RequireFinite(action.joint_acc[j], "joint acceleration");
    if (std::abs(action.joint_acc[j]) > config.max_joint_acc * (1.0 + 1e-12)) {
      throw std::invalid_argument("joint acceleration outside configured bounds");
    }
  }

  DynamicsResult result{state, false};
  RobotState& next = result.state;
  for (int i = 0; i < 3; ++i) {
    next.base_vel[i] = std::clamp(state.base_vel[i] + action.base_acc[i] * dt,
                                  -config.max_base_vel[i], config.max_base_vel[i]);
  }
  const double theta = state.base_pose.theta;
  const Vec2 v_world = Rotate({next.base_vel[0], next.base_vel[1]}, theta);
  next.base_pose.x = state.base_pose.x + v_world.x * dt;
  next.base_pose.y = state.base_pose.y + v_world.y * dt;
  next.base_pose.theta = theta + next.base_vel[2] * dt;

  for (size_t j = 0; j < state.joint_pos.size(); ++j) {
    double v = std::clamp(state.joint_vel[j] + action.joint_acc[j] * dt,
                          -config.max_joint_vel, config.max_joint_vel);
    double q = state.joint_pos[j] + v * dt;
    const JointLimit& lim = config.joint_limits[j];
    if (clamping) {
      const double lo = lim.min + config.clamp_margin;
      const double hi = lim.max - config.clamp_margin;
      if (q > hi) {
        q = hi;
        v = 0.0;
      } else if (q < lo) {
        q = lo;
        v = 0.0;
      }
    } else if (q > lim.max || q < lim.min) {
      result.joint_limit_hit = true;
    }
    next.joint_pos[j] = q;
    next.joint_vel[j] = v;
  }
  return result;
}

double DistanceToWorld(const Vec2& p, const WorldGeometry& world) {
  double best = std::numeric_limits<double>::infinity();
  for (const Segment& s : world.segments) best = std::min(best, PointSegmentDistance(p, s));
  for (const Box& b : world.boxes) best = std::min(best, PointBoxDistance(p, b));
  return best;
}

double DistanceToWorld(const Segment& seg, const WorldGeometry& world) {
  double best = std::numeric_limits<double>::infinity();
  for (const Segment& s : world.segments) best = std::min(best, SegmentSegmentDistance(seg, s));
  for (const Box& b : world.boxes) best = std::min(best, SegmentBoxDistance(seg, b));
  return best;
}

bool CollisionCheck(const RobotConfig& config, const RobotState& state,
                    const WorldGeometry& world) {
  const ArmFrames frames = ForwardKinematics(config, state);
  const Vec2 center = state.base_pose.position();
  if (DistanceToWorld(center, world) < config.base_radius) return true;

  const std::vector<Segment> links = frames.Links();
  const double r = config.link_capsule_radius;
  for (const Segment& link : links) {
    if (DistanceToWorld(link, world) < r) return true;
  }
  // Links 0 and 1 ride above the base; anything further out may fold into it.
  for (size_t i = 2; i < links.size(); ++i) {
    if (PointSegmentDistance(center, links[i]) < config.base_radius + r) return true;
  }
  for (size_t i = 0; i < links.size(); ++i) {
    for (size_t j = i + 2; j < links.size(); ++j) {
      if (SegmentSegmentDistance(links[i], links[j]) < 2.0 * r) return true;
    }
  }
  return false;
}

Vec2 SensorOrigin(const RobotConfig& config, const Pose2& base, Sensor sensor) {
  return TransformPoint(base, sensor == Sensor::kFront ? config.lidar.front_mount
                                                       : config.lidar.rear_mount);
}

double BeamAngle(const RobotConfig& config, const Pose2& base, Sensor sensor,
                 int index) {
  const double center =
      base.theta + (sensor == Sensor::kFront ? 0.0 : std::numbers::pi);
  const int beams = config.lidar.beams;
  if (beams == 1) return center;
  const double fov = config.lidar.field_of_view;
  return center - 0.5 * fov + fov * static_cast<double>(index) / (beams - 1);
}

LidarScan CastLidar(const RobotConfig& config, const RobotState& state,
                    const WorldGeometry& world, Sensor sensor) {
  const Vec2 origin = SensorOrigin(config, state.base_pose, sensor);
  const double max_range = config.lidar.max_range;
  LidarScan scan;
  scan.ranges.resize(config.lidar.beams);
  for (int i = 0; i < config.lidar.beams; ++i) {
    const double angle = BeamAngle(config, state.base_pose, sensor, i);
    const Vec2 dir{std::cos(angle), std::sin(angle)};
    double range = max_range;
    for (const Segment& s : world.segments) {
      if (auto t = RaySegmentHit(origin, dir, s)) range = std::min(range, *t);
    }
    for (const Box& b : world.boxes) {
      if (auto t = RayBoxHit(origin, dir, b)) range = std::min(range, *t);
    }
    scan.ranges[i] = range;
  }
  return scan;
}

double MinClearance(const RobotConfig& config, const RobotState& state,
                    const WorldGeometry& world) {
  const ArmFrames frames = ForwardKinematics(config, state);
  double clearance = DistanceToWorld(state.base_pose.position(), world) - config.base_radius;
  for (const Segment& link : frames.Links()) {
    clearance = std::min(clearance, DistanceToWorld(link, world) - config.link_capsule_radius);
  }
  return clearance;
}

}  // namespace wbc
