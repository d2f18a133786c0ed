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

#include "oracles.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

namespace wbc::oracle {

namespace {

Eigen::Matrix3d Homogeneous(double x, double y, double theta) {
  Eigen::Matrix3d m;
  m << std::cos(theta), -std::sin(theta), x, std::sin(theta), std::cos(theta), y, 0, 0, 1;
  return m;
}

// Joint positions (mount, link ends) from matrix products.
std::vector<Vec2> MatrixJoints(const RobotConfig& config, const RobotState& state) {
  Eigen::Matrix3d t = Homogeneous(state.base_pose.x, state.base_pose.y, state.base_pose.theta) *
                      Homogeneous(config.arm_mount_offset.x, config.arm_mount_offset.y, 0.0);
  std::vector<Vec2> points{{t(0, 2), t(1, 2)}};
  for (size_t i = 0; i < config.link_lengths.size(); ++i) {
    t = t * Homogeneous(0.0, 0.0, state.joint_pos[i]) *
        Homogeneous(config.link_lengths[i], 0.0, 0.0);
    points.push_back({t(0, 2), t(1, 2)});
  }
  return points;
}

double Orient(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

bool Crosses(const Vec2& p0, const Vec2& p1, const Vec2& a, const Vec2& b) {
  const double s0 = Orient(a, b, p0);
  const double s1 = Orient(a, b, p1);
  const double u0 = Orient(p0, p1, a);
  const double u1 = Orient(p0, p1, b);
  return (s0 * s1 <= 0.0) && (u0 * u1 <= 0.0) && !(s0 == 0.0 && s1 == 0.0);
}

std::vector<std::pair<Vec2, Vec2>> AllEdges(const WorldGeometry& world) {
  std::vector<std::pair<Vec2, Vec2>> edges;
  for (const Segment& s : world.segments) edges.emplace_back(s.a, s.b);
  for (const Box& b : world.boxes) {
    const Vec2 c[4] = {{b.lo.x, b.lo.y}, {b.hi.x, b.lo.y}, {b.hi.x, b.hi.y}, {b.lo.x, b.hi.y}};
    for (int i = 0; i < 4; ++i) edges.emplace_back(c[i], c[(i + 1) % 4]);
  }
  return edges;
}

bool StepCrosses(const std::vector<std::pair<Vec2, Vec2>>& edges, const Vec2& p0, const Vec2& p1) {
  for (const auto& [a, b] : edges) {
    if (Crosses(p0, p1, a, b)) return true;
  }
  return false;
}

}  // namespace

double SampledMargin(const RobotConfig& config, const RobotState& state,
                     const WorldGeometry& world, int samples) {
  const double rb = config.base_radius;
  const double rc = config.link_capsule_radius;
  const Vec2 center = state.base_pose.position();
  double margin = PointWorld(center, world) - rb;
  const std::vector<Vec2> joints = MatrixJoints(config, state);
  const size_t links = joints.size() - 1;
  for (size_t i = 0; i < links; ++i) {
    const Vec2 a = joints[i];
    const Vec2 b = joints[i + 1];
    for (int k = 0; k < samples; ++k) {
      const double s = samples == 1 ? 0.0 : static_cast<double>(k) / (samples - 1);
      const Vec2 p{a.x + s * (b.x - a.x), a.y + s * (b.y - a.y)};
      margin = std::min(margin, PointWorld(p, world) - rc);
      if (i >= 2) {
        margin = std::min(margin, std::hypot(p.x - center.x, p.y - center.y) - (rb + rc));
      }
      for (size_t j = i + 2; j < links; ++j) {
        margin = std::min(margin, PointSegment(p, joints[j], joints[j + 1]) - 2.0 * rc);
      }
    }
  }
  return margin;
}

std::array<double, 3> MatrixEndEffector(const RobotConfig& config, const RobotState& state) {
  Eigen::Matrix3d t = Homogeneous(state.base_pose.x, state.base_pose.y, state.base_pose.theta) *
                      Homogeneous(config.arm_mount_offset.x, config.arm_mount_offset.y, 0.0);
  for (size_t i = 0; i < config.link_lengths.size(); ++i) {
    t = t * Homogeneous(0.0, 0.0, state.joint_pos[i]) *
        Homogeneous(config.link_lengths[i], 0.0, 0.0);
  }
  return {t(0, 2), t(1, 2), std::atan2(t(1, 0), t(0, 0))};
}

double PointSegment(const Vec2& p, const Vec2& a, const Vec2& b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double s = len2 > 0.0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return std::hypot(p.x - (a.x + s * dx), p.y - (a.y + s * dy));
}

bool InsideBox(const Vec2& p, const Box& box) {
  return p.x >= box.lo.x && p.x <= box.hi.x && p.y >= box.lo.y && p.y <= box.hi.y;
}

double PointWorld(const Vec2& p, const WorldGeometry& world) {
  double best = std::numeric_limits<double>::infinity();
  for (const Segment& s : world.segments) best = std::min(best, PointSegment(p, s.a, s.b));
  for (const Box& b : world.boxes) {
    const double dx = std::max({b.lo.x - p.x, 0.0, p.x - b.hi.x});
    const double dy = std::max({b.lo.y - p.y, 0.0, p.y - b.hi.y});
    best = std::min(best, std::hypot(dx, dy));
  }
  return best;
}

double MarchRay(const WorldGeometry& world, const Vec2& origin, double angle, double max_range,
                double coarse, double fine) {
  for (const Box& b : world.boxes) {
    if (InsideBox(origin, b)) return 0.0;
  }
  const auto edges = AllEdges(world);
  const Vec2 d{std::cos(angle), std::sin(angle)};
  auto at = [&](double t) { return Vec2{origin.x + d.x * t, origin.y + d.y * t}; };
  for (double t = 0.0; t < max_range; t += coarse) {
    const double t1 = std::min(t + coarse, max_range);
    if (!StepCrosses(edges, at(t), at(t1))) continue;
    for (double u = t; u < t1; u += fine) {
      const double u1 = std::min(u + fine, t1);
      if (StepCrosses(edges, at(u), at(u1))) return u1;
    }
    return t1;
  }
  return max_range;
}

bool SampledCollision(const RobotConfig& config, const RobotState& state,
                      const WorldGeometry& world, int samples) {
  return SampledMargin(config, state, world, samples) < 0.0;
}

std::vector<double> DenseHarmonic(const GridField& field) {
  const int n = static_cast<int>(field.kinds.size());
  std::vector<char> reach(n, 0);
  std::deque<int> queue{field.goal_index};
  reach[field.goal_index] = 1;
  while (!queue.empty()) {
    const int c = queue.front();
    queue.pop_front();
    const int ix = c % field.width;
    const int iy = c / field.width;
    const int nb[4][2] = {{ix - 1, iy}, {ix + 1, iy}, {ix, iy - 1}, {ix, iy + 1}};
    for (const auto& q : nb) {
      if (q[0] < 0 || q[1] < 0 || q[0] >= field.width || q[1] >= field.height) continue;
      const int j = q[1] * field.width + q[0];
      if (reach[j] || field.kinds[j] == CellKind::kObstacle) continue;
      reach[j] = 1;
      queue.push_back(j);
    }
  }
  std::vector<int> unknown_of(n, -1);
  int m = 0;
  for (int i = 0; i < n; ++i) {
    if (reach[i] && field.kinds[i] == CellKind::kFree) unknown_of[i] = m++;
  }
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < n; ++i) {
    const int row = unknown_of[i];
    if (row < 0) continue;
    a(row, row) = 4.0;
    const int ix = i % field.width;
    const int iy = i / field.width;
    const int nb[4][2] = {{ix - 1, iy}, {ix + 1, iy}, {ix, iy - 1}, {ix, iy + 1}};
    for (const auto& q : nb) {
      const int j = q[1] * field.width + q[0];
      if (unknown_of[j] >= 0) {
        a(row, unknown_of[j]) -= 1.0;
      } else if (j == field.goal_index) {
        rhs(row) += 1.0;
      }
    }
  }
  const Eigen::VectorXd x = a.partialPivLu().solve(rhs);
  std::vector<double> out(n, 0.0);
  out[field.goal_index] = 1.0;
  for (int i = 0; i < n; ++i) {
    if (unknown_of[i] >= 0) out[i] = x(unknown_of[i]);
  }
  return out;
}

std::vector<double> BruteForceGae(const RolloutBuffer& buffer, double gamma, double lambda) {
  std::vector<double> adv(buffer.size(), 0.0);
  for (int w = 0; w < buffer.workers; ++w) {
    auto delta = [&](int k) {
      const size_t i = buffer.Index(w, k);
      const double next =
          k + 1 < buffer.n_steps ? buffer.values[buffer.Index(w, k + 1)] : buffer.bootstrap_values[w];
      return buffer.rewards[i] + gamma * next * (buffer.dones[i] ? 0.0 : 1.0) - buffer.values[i];
    };
    for (int t = 0; t < buffer.n_steps; ++t) {
      double sum = 0.0;
      for (int l = 0; t + l < buffer.n_steps; ++l) {
        double weight = 1.0;
        for (int k = 0; k < l; ++k) {
          weight *= gamma * lambda * (buffer.dones[buffer.Index(w, t + k)] ? 0.0 : 1.0);
        }
        sum += weight * delta(t + l);
      }
      adv[buffer.Index(w, t)] = sum;
    }
  }
  return adv;
}

bool BaseCannotReach(const RobotConfig& robot, const Scene& scene, double step, double margin,
                     double* closest_gap) {
  const Box& b = scene.world.bounds;
  double best = std::numeric_limits<double>::infinity();
  for (double x = b.lo.x; x <= b.hi.x + 1e-12; x += step) {
    for (double y = b.lo.y; y <= b.hi.y + 1e-12; y += step) {
      const Vec2 p{x, y};
      if (PointWorld(p, scene.world) < robot.base_radius) continue;
      bool inside = false;
      for (const Box& box : scene.world.boxes) inside = inside || InsideBox(p, box);
      if (inside) continue;
      best = std::min(best, std::hypot(x - scene.goal.x, y - scene.goal.y) - robot.base_radius);
    }
  }
  if (closest_gap != nullptr) *closest_gap = best;
  return best > margin;
}

bool ArmFits(const RobotConfig& robot, const Scene& scene, RobotState* found) {
  if (robot.link_lengths.size() != 3) return false;
  const double l1 = robot.link_lengths[0];
  const double l2 = robot.link_lengths[1];
  const double l3 = robot.link_lengths[2];
  double wall_x = scene.goal.x;
  for (const Box& box : scene.world.boxes) wall_x = std::min(wall_x, box.lo.x);
  auto within = [&](int j, double q) {
    return q >= robot.joint_limits[j].min + robot.clamp_margin &&
           q <= robot.joint_limits[j].max - robot.clamp_margin;
  };
  const double thetas[] = {0.0, 0.1, -0.1, 0.2, -0.2, 0.3, -0.3};
  for (double theta : thetas) {
    for (int iy = 0; iy <= 30; ++iy) {
      const double dy = 0.02 * ((iy + 1) / 2) * (iy % 2 == 1 ? 1.0 : -1.0);
      const double by = scene.goal.y + dy;
      for (int iphi = 0; iphi <= 12; ++iphi) {
        const double phi = 0.1 * ((iphi + 1) / 2) * (iphi % 2 == 1 ? 1.0 : -1.0);
        for (int ix = 0; ix < 40; ++ix) {
          const double bx = wall_x - robot.base_radius - 0.005 - 0.02 * ix;
          const Vec2 mount{bx + std::cos(theta) * robot.arm_mount_offset.x -
                               std::sin(theta) * robot.arm_mount_offset.y,
                           by + std::sin(theta) * robot.arm_mount_offset.x +
                               std::cos(theta) * robot.arm_mount_offset.y};
          const Vec2 wrist{scene.goal.x - l3 * std::cos(phi), scene.goal.y - l3 * std::sin(phi)};
          const double dx = wrist.x - mount.x;
          const double dyw = wrist.y - mount.y;
          const double d2 = dx * dx + dyw * dyw;
          const double c2 = (d2 - l1 * l1 - l2 * l2) / (2.0 * l1 * l2);
          if (c2 < -1.0 || c2 > 1.0) continue;
          for (double sign : {1.0, -1.0}) {
            const double q2 = sign * std::acos(c2);
            const double q1 = std::atan2(dyw, dx) -
                              std::atan2(l2 * std::sin(q2), l1 + l2 * std::cos(q2)) - theta;
            double q3 = phi - theta - q1 - q2;
            q3 = std::remainder(q3, 2.0 * std::numbers::pi);
            const double q1w = std::remainder(q1, 2.0 * std::numbers::pi);
            if (!within(0, q1w) || !within(1, q2) || !within(2, q3)) continue;
            RobotState s = RobotState::AtRest(robot, {bx, by, theta});
            s.joint_pos = {q1w, q2, q3};
            const auto ee = MatrixEndEffector(robot, s);
            if (std::hypot(ee[0] - scene.goal.x, ee[1] - scene.goal.y) > 1e-9) continue;
            if (SampledMargin(robot, s, scene.world, 200) <= 0.005) continue;
            if (found != nullptr) *found = s;
            return true;
          }
        }
      }
    }
  }
  return false;
}

std::vector<double> FiniteDifference(const std::function<double(const std::vector<double>&)>& f,
                                     std::vector<double> x, double h) {
  std::vector<double> g(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + h;
    const double up = f(x);
    x[i] = orig - h;
    const double down = f(x);
    x[i] = orig;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

}  // namespace wbc::oracle
