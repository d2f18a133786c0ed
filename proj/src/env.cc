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

#include "wbc/env.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

namespace wbc {

namespace {

constexpr int kMaxGenerationAttempts = 100;
// Keeps the goal (and the base that must approach it) off corridor walls.
constexpr double kCorridorGoalMargin = 0.45;
constexpr double kCorridorSpawnX = 0.7;
constexpr double kObstacleStartX = 2.0;
constexpr double kGapSpawnX = 0.7;
constexpr double kGapHalfHeight = 1.5;
constexpr double kGapMinGoalDepth = 0.15;
// Required gap between the closest collision-free base footprint and the
// goal, beyond the tightest tolerance of 0.05 m.
constexpr double kUnreachableMargin = 0.06;

std::string RangeError(const std::string& path, const Range& r) {
  std::ostringstream msg;
  msg << path << ": invalid range [" << r.min << ", " << r.max << "]";
  return msg.str();
}

void AddRectWalls(WorldGeometry& world, const Box& b) {
  for (const Segment& s : BoxEdges(b)) world.segments.push_back(s);
}

// Full HPF plan from `start` to `goal`; false when no path can be extracted.
bool PlanExists(const WorldGeometry& world, const PathfieldConfig& planner,
                double inflation, const Vec2& start, const Vec2& goal) {
  try {
    GridField field = RasterizeWorld(world, planner.cell_size, inflation, goal);
    const int start_cell = field.CellIndexOf(start);
    if (start_cell < 0 || field.kinds[start_cell] == CellKind::kObstacle) return false;
    field = SolveHarmonic(std::move(field), planner.solver);
    ExtractPath(field, start);
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

std::string_view ToString(EnvKind kind) {
  switch (kind) {
    case EnvKind::kCorridor: return "corridor";
    case EnvKind::kGapTrain: return "gap_train";
    case EnvKind::kGapTest: return "gap_test";
  }
  return "corridor";
}

EnvKind ParseEnvKind(std::string_view name) {
  if (name == "corridor") return EnvKind::kCorridor;
  if (name == "gap_train") return EnvKind::kGapTrain;
  if (name == "gap_test") return EnvKind::kGapTest;
  throw std::invalid_argument("unknown environment kind '" + std::string(name) + "'");
}

std::vector<std::string> EnvSpec::Validate(const RobotConfig& robot) const {
  std::vector<std::string> errors;
  const double base_diameter = 2.0 * robot.base_radius;
  const CorridorSpec& c = corridor;
  if (!(c.length.min > 0.0 && c.length.min <= c.length.max)) {
    errors.push_back(RangeError("env.corridor.length_range", c.length));
  }
  if (!(c.width.min > 0.0 && c.width.min <= c.width.max)) {
    errors.push_back(RangeError("env.corridor.width_range", c.width));
  }
  if (!(c.obstacle_count[0] >= 0 && c.obstacle_count[0] <= c.obstacle_count[1])) {
    errors.push_back("env.corridor.obstacle_count_range: invalid range");
  }
  if (!(c.min_passage_width >= base_diameter + 0.1 - 1e-12)) {
    errors.push_back("env.corridor.min_passage_width: must be >= base diameter + 0.1 m");
  }
  if (!(c.width.min >= c.min_passage_width)) {
    errors.push_back("env.corridor.width_range: narrower than min_passage_width");
  }
  if (!(c.goal_lateral_span >= 0.0 && c.goal_lateral_span <= 1.0)) {
    errors.push_back("env.corridor.goal_lateral_span: must be in [0, 1]");
  }
  const GapSpec& g = gap;
  const double min_gap = 2.0 * robot.link_capsule_radius + 0.05;
  auto check_gap_width = [&](const std::string& path, double lo, double hi) {
    if (!(lo > min_gap && hi < base_diameter && lo <= hi)) {
      std::ostringstream msg;
      msg << path << ": gap width must lie in (" << min_gap << ", " << base_diameter << ")";
      errors.push_back(msg.str());
    }
  };
  check_gap_width("env.gap.width_range", g.width.min, g.width.max);
  check_gap_width("env.gap.train_width", g.train_width, g.train_width);
  if (!(g.length.min > 0.0 && g.length.min <= g.length.max)) {
    errors.push_back(RangeError("env.gap.length_range", g.length));
  }
  if (!(g.train_length > 0.0)) errors.push_back("env.gap.train_length: must be > 0");
  if (!(g.goal_position_noise >= 0.0)) errors.push_back("env.gap.goal_position_noise: must be >= 0");
  if (!(g.goal_angle_noise >= 0.0)) errors.push_back("env.gap.goal_angle_noise: must be >= 0");
  if (!(g.joint_noise >= 0.0)) errors.push_back("env.gap.joint_noise: must be >= 0");
  if (!(g.spawn_distance > robot.base_radius + 0.1)) {
    errors.push_back("env.gap.spawn_distance: base would start against the wall");
  }
  return errors;
}

int EpisodeConfig::hold_steps_required() const {
  return static_cast<int>(std::ceil(hold_time / step_time - 1e-9));
}

int EpisodeConfig::timeout_steps() const {
  return static_cast<int>(std::ceil(timeout / step_time - 1e-9));
}

std::vector<std::string> EpisodeConfig::Validate() const {
  std::vector<std::string> errors;
  if (!(tolerance >= 0.05 && tolerance <= 0.5)) {
    std::ostringstream msg;
    msg << "episode.tolerance: " << tolerance << " outside the ADR range [0.05, 0.5]";
    errors.push_back(msg.str());
  }
  if (!(hold_time > 0.0)) errors.push_back("episode.hold_time: must be > 0");
  if (!(timeout > 0.0)) errors.push_back("episode.timeout: must be > 0");
  if (!(step_time > 0.0)) errors.push_back("episode.step_time: must be > 0");
  if (!(hold_time < timeout)) errors.push_back("episode.hold_time: must be < timeout");
  if (!(orientation_tolerance > 0.0)) {
    errors.push_back("episode.orientation_tolerance: must be > 0");
  }
  return errors;
}

std::uint64_t DeriveSeed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double UniformReal(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

int UniformInt(std::mt19937_64& rng, int lo, int hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<int>(rng() % span);
}

Scene GenerateCorridor(const EnvSpec& spec, const RobotConfig& robot,
                       const PathfieldConfig& planner, std::mt19937_64& rng) {
  if (spec.kind != EnvKind::kCorridor) {
    throw std::invalid_argument("GenerateCorridor requires a corridor spec");
  }
  const CorridorSpec& c = spec.corridor;
  for (int attempt = 0; attempt < kMaxGenerationAttempts; ++attempt) {
    const double length = UniformReal(rng, c.length.min, c.length.max);
    const double width = UniformReal(rng, c.width.min, c.width.max);
    const int count = UniformInt(rng, c.obstacle_count[0], c.obstacle_count[1]);
    const double half = 0.5 * width;

    Scene scene;
    scene.world.bounds = {{0.0, -half}, {length, half}};
    AddRectWalls(scene.world, scene.world.bounds);

    // Obstacles hug alternating walls inside disjoint x slots, so every
    // cross-section keeps at least min_passage_width free.
    const double x_lo = kObstacleStartX;
    const double x_hi = 2.0 * length / 3.0;
    const double max_depth = width - c.min_passage_width;
    if (count > 0 && x_hi > x_lo && max_depth > 0.0) {
      const double slot = (x_hi - x_lo) / count;
      const double bw_max = std::min(0.8, slot - 0.1);
      double side = UniformInt(rng, 0, 1) == 0 ? -1.0 : 1.0;
      for (int i = 0; i < count && bw_max > 0.05; ++i, side = -side) {
        const double bw = UniformReal(rng, std::min(0.3, bw_max), bw_max);
        const double lo = x_lo + i * slot + 0.5 * bw + 0.05;
        const double hi = x_lo + (i + 1) * slot - 0.5 * bw - 0.05;
        const double cx = UniformReal(rng, lo, std::max(lo, hi));
        const double depth = UniformReal(rng, std::min(0.2, max_depth), max_depth);
        Box box;
        box.lo.x = cx - 0.5 * bw;
        box.hi.x = cx + 0.5 * bw;
        box.lo.y = side > 0.0 ? half - depth : -half;
        box.hi.y = side > 0.0 ? half : -half + depth;
        scene.world.boxes.push_back(box);
      }
    }

    scene.start = RobotState::AtRest(robot, {kCorridorSpawnX, 0.0, 0.0});
    const double lateral = c.goal_lateral_span * std::max(0.0, half - kCorridorGoalMargin);
    scene.goal.x = UniformReal(rng, x_hi, length - kCorridorGoalMargin);
    scene.goal.y = UniformReal(rng, -lateral, lateral);
    scene.goal.theta = UniformReal(rng, -std::numbers::pi, std::numbers::pi);

    if (CollisionCheck(robot, scene.start, scene.world)) continue;
    if (DistanceToWorld(scene.goal.position(), scene.world) < robot.base_radius + 0.1) continue;
    if (!PlanExists(scene.world, planner, robot.base_radius, scene.start.base_pose.position(),
                    scene.goal.position())) {
      continue;
    }
    return scene;
  }
  throw std::runtime_error("corridor generation failed after 100 attempts; check spec ranges");
}

double GapBaseDistanceBound(const Vec2& goal, double wall_x, double slot_center,
                            double slot_width, double base_radius) {
  // Any collision-free base center lies at x <= wall_x and at least one base
  // radius from both slot corners; the closest such point is on the boundary.
  const Vec2 upper{wall_x, slot_center + 0.5 * slot_width};
  const Vec2 lower{wall_x, slot_center - 0.5 * slot_width};
  double best = std::numeric_limits<double>::infinity();
  constexpr int kArcSamples = 20000;
  for (const auto& [corner, other] : {std::pair{upper, lower}, std::pair{lower, upper}}) {
    for (int i = 0; i <= kArcSamples; ++i) {
      const double a = std::numbers::pi * (0.5 + static_cast<double>(i) / kArcSamples);
      const Vec2 p = corner + Vec2{std::cos(a), std::sin(a)} * base_radius;
      if (Distance(p, other) < base_radius) continue;
      best = std::min(best, Distance(p, goal));
    }
  }
  const double y_hi = upper.y + base_radius;
  const double y_lo = lower.y - base_radius;
  const double y = goal.y >= y_hi ? goal.y : (goal.y <= y_lo ? goal.y
                   : (goal.y - y_lo < y_hi - goal.y ? y_lo : y_hi));
  best = std::min(best, Distance({wall_x, y}, goal));
  // Arc sampling overestimates the minimum by at most r * (pi / n)^2 / 2.
  return best - 1e-6;
}

Scene GenerateGap(const EnvSpec& spec, const RobotConfig& robot,
                  const PathfieldConfig& planner, std::mt19937_64& rng) {
  if (spec.kind != EnvKind::kGapTrain && spec.kind != EnvKind::kGapTest) {
    throw std::invalid_argument("GenerateGap requires a gap spec");
  }
  const GapSpec& g = spec.gap;
  const bool test = spec.kind == EnvKind::kGapTest;
  const double rb = robot.base_radius;
  const double rc = robot.link_capsule_radius;
  const double reach = robot.arm_reach();
  // Beyond the tunnel sits a pocket too shallow for the base.
  const double pocket = std::min(0.4, 2.0 * rb - 0.1);

  for (int attempt = 0; attempt < kMaxGenerationAttempts; ++attempt) {
    const double width = test ? UniformReal(rng, g.width.min, g.width.max) : g.train_width;
    const double length = test ? UniformReal(rng, g.length.min, g.length.max) : g.train_length;
    const double slot_y = test ? UniformReal(rng, -0.3, 0.3) : 0.0;
    const double wall_x = kGapSpawnX + g.spawn_distance;

    const double lateral_max = std::max(0.0, 0.5 * width - rc - 0.04);
    auto depth_max = [&](double lateral) {
      const double half_open = 0.5 * width - std::abs(lateral);
      const double approach = std::sqrt(std::max(0.0, rb * rb - half_open * half_open));
      return std::min(length + 0.1, reach - approach - 0.08);
    };

    double depth = 0.0;
    double lateral = 0.0;
    double angle = 0.0;
    if (test) {
      lateral = UniformReal(rng, -lateral_max, lateral_max);
      depth = UniformReal(rng, kGapMinGoalDepth, std::max(kGapMinGoalDepth, depth_max(lateral)));
      angle = UniformReal(rng, -g.goal_angle_noise, g.goal_angle_noise);
    } else {
      depth = std::clamp(0.6 * length, kGapMinGoalDepth, depth_max(0.0));
    }
    // Uniform noise on the goal relative to the spawn pose (both variants).
    depth += UniformReal(rng, -g.goal_position_noise, g.goal_position_noise);
    lateral += UniformReal(rng, -g.goal_position_noise, g.goal_position_noise);
    angle += UniformReal(rng, -g.goal_angle_noise, g.goal_angle_noise);
    lateral = std::clamp(lateral, -lateral_max, lateral_max);
    depth = std::clamp(depth, kGapMinGoalDepth, std::max(kGapMinGoalDepth, depth_max(lateral)));

    Scene scene;
    const double right = wall_x + length + pocket;
    scene.world.bounds = {{0.0, -kGapHalfHeight}, {right, kGapHalfHeight}};
    AddRectWalls(scene.world, scene.world.bounds);
    scene.world.boxes.push_back({{wall_x, -kGapHalfHeight}, {wall_x + length, slot_y - 0.5 * width}});
    scene.world.boxes.push_back({{wall_x, slot_y + 0.5 * width}, {wall_x + length, kGapHalfHeight}});

    scene.start = RobotState::AtRest(robot, {kGapSpawnX, 0.0, 0.0});
    for (double& q : scene.start.joint_pos) q = UniformReal(rng, -g.joint_noise, g.joint_noise);
    scene.goal = {wall_x + depth, slot_y + lateral, WrapAngle(angle)};

    if (depth > depth_max(lateral) + 1e-12) continue;
    if (CollisionCheck(robot, scene.start, scene.world)) continue;
    const double base_gap =
        GapBaseDistanceBound(scene.goal.position(), wall_x, slot_y, width, rb) - rb;
    if (!(base_gap > 0.05 + kUnreachableMargin)) continue;
    const Vec2 ee = ForwardKinematics(robot, scene.start).end_effector.position();
    if (!PlanExists(scene.world, planner, rc, ee, scene.goal.position())) continue;
    return scene;
  }
  throw std::runtime_error("gap generation failed after 100 attempts; check spec ranges");
}

Scene GenerateScene(const EnvSpec& spec, const RobotConfig& robot,
                    const PathfieldConfig& planner, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return spec.kind == EnvKind::kCorridor ? GenerateCorridor(spec, robot, planner, rng)
                                         : GenerateGap(spec, robot, planner, rng);
}

int Observation::FlatSize(const RobotConfig& robot) {
  return 2 * robot.lidar.beams + 2 * robot.num_joints() + 6;
}

std::vector<double> Observation::Flatten() const {
  std::vector<double> flat;
  flat.reserve(front_scan.size() + rear_scan.size() + 2 * joint_pos.size() + 6);
  flat.insert(flat.end(), front_scan.begin(), front_scan.end());
  flat.insert(flat.end(), rear_scan.begin(), rear_scan.end());
  flat.insert(flat.end(), joint_pos.begin(), joint_pos.end());
  flat.insert(flat.end(), joint_vel.begin(), joint_vel.end());
  flat.insert(flat.end(), base_vel.begin(), base_vel.end());
  flat.push_back(goal_in_ee.x);
  flat.push_back(goal_in_ee.y);
  flat.push_back(goal_in_ee.theta);
  return flat;
}

Observation BuildObservation(const RobotConfig& robot, const RobotState& state,
                             const WorldGeometry& world, const Pose2& goal) {
  Observation obs;
  const double inv_range = 1.0 / robot.lidar.max_range;
  obs.front_scan = CastLidar(robot, state, world, Sensor::kFront).ranges;
  obs.rear_scan = CastLidar(robot, state, world, Sensor::kRear).ranges;
  for (double& r : obs.front_scan) r *= inv_range;
  for (double& r : obs.rear_scan) r *= inv_range;
  obs.joint_pos = state.joint_pos;
  obs.joint_vel = state.joint_vel;
  obs.base_vel = state.base_vel;
  const Pose2 ee = ForwardKinematics(robot, state).end_effector;
  obs.goal_in_ee = Compose(Inverse(ee), goal);
  obs.goal_in_ee.theta = WrapAngle(obs.goal_in_ee.theta);
  return obs;
}

Episode::Episode(const EpisodeSetup& setup, Scene scene, double tolerance)
    : robot_(setup.robot),
      config_(setup.episode),
      reward_(setup.reward),
      ratchet_(setup.pathfield.ratchet_progress),
      scene_(std::move(scene)),
      state_(scene_.start) {
  reward_.step_time = config_.step_time;
  reward_.timeout = config_.timeout;
  reward_.hold_time = config_.hold_time;
  reward_.variant = config_.variant;

  const Vec2 ee = end_effector();
  GridField field = RasterizeWorld(scene_.world, setup.pathfield.cell_size,
                                   robot_.link_capsule_radius, scene_.goal.position());
  field = SolveHarmonic(std::move(field), setup.pathfield.solver);
  path_ = ExtractPath(field, ee);
  path_norm_ = std::max(path_.total_length(), setup.pathfield.cell_size);
  metrics_ = InitPathMetrics(path_, ee);
  reward_state_ = ResetRewardState(tolerance);
  observation_ = BuildObservation(robot_, state_, scene_.world, scene_.goal);
}

Vec2 Episode::end_effector() const {
  return ForwardKinematics(robot_, state_).end_effector.position();
}

StepOutcome Episode::Step(const Action& action) {
  if (terminated()) throw std::logic_error("step on a terminated episode");
  const DynamicsResult dyn = StepDynamics(robot_, state_, action, config_.step_time,
                                          config_.variant == RewardVariant::kClamping);
  state_ = dyn.state;
  ++steps_;

  const Pose2 ee = ForwardKinematics(robot_, state_).end_effector;
  const bool collision = CollisionCheck(robot_, state_, scene_.world);
  const double goal_distance = Distance(ee.position(), scene_.goal.position());
  bool holding = goal_distance <= reward_state_.tolerance;
  if (config_.check_orientation) {
    holding = holding &&
              std::abs(WrapAngle(scene_.goal.theta - ee.theta)) <= config_.orientation_tolerance;
  }
  hold_steps_ = holding ? hold_steps_ + 1 : 0;

  const PathMetricsStep m = PathMetrics(path_, metrics_, ee.position(), ratchet_);
  metrics_ = m.state;

  StepRewardInput input;
  input.deviation_delta = m.deviation_delta;
  input.progress_delta = m.progress_delta;
  input.path_length = path_norm_;
  input.goal_distance = goal_distance;
  input.min_clearance = config_.variant == RewardVariant::kBaseline
                            ? MinClearance(robot_, state_, scene_.world)
                            : std::numeric_limits<double>::infinity();
  const StepReward sr = ComputeStepReward(reward_, reward_state_, input);
  reward_state_ = sr.state;

  StepOutcome out;
  out.terms = sr.terms;
  if (collision) {
    termination_ = Termination::kCollision;
  } else if (dyn.joint_limit_hit) {
    termination_ = Termination::kJointLimit;
  } else if (hold_steps_ >= config_.hold_steps_required()) {
    termination_ = Termination::kSuccess;
  } else if (steps_ >= config_.timeout_steps()) {
    termination_ = Termination::kTimeout;
  }
  if (termination_ != Termination::kNone) {
    out.terms.terminal = TerminalReward(reward_, termination_);
  }
  out.reward = out.terms.Total();
  out.terminated = termination_;
  observation_ = BuildObservation(robot_, state_, scene_.world, scene_.goal);
  out.observation = observation_;
  out.info.goal_distance = goal_distance;
  out.info.hold_progress = hold_steps_ * config_.step_time;
  out.info.path_deviation = metrics_.deviation;
  out.info.path_progress = metrics_.progress / path_.total_length();
  if (!std::isfinite(out.info.path_progress)) out.info.path_progress = 1.0;
  return out;
}

}  // namespace wbc
