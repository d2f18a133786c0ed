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

// Independent reference implementations used by the unit and acceptance
// tests. None of these call into the library's geometry routines.

#ifndef WBC_TESTS_ORACLES_H_
#define WBC_TESTS_ORACLES_H_

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "wbc/env.h"
#include "wbc/pathfield.h"
#include "wbc/ppo.h"
#include "wbc/sim.h"

namespace wbc::oracle {

// End-effector (x, y, phi) from products of 3x3 homogeneous transforms.
std::array<double, 3> MatrixEndEffector(const RobotConfig& config, const RobotState& state);

// First wall or box-edge crossing along a ray, found by marching: coarse
// steps of `coarse` m, then `fine` m steps inside the bracketing interval.
// Origins inside a box return 0.
double MarchRay(const WorldGeometry& world, const Vec2& origin, double angle, double max_range,
                double coarse = 1e-2, double fine = 1e-4);

// Collision verdict from `samples` points along each link spine, each point
// inflated by the capsule radius, plus the base disk.
bool SampledCollision(const RobotConfig& config, const RobotState& state,
                      const WorldGeometry& world, int samples = 1000);

// Smallest clearance of any sampled body point against its threshold;
// negative means collision.
double SampledMargin(const RobotConfig& config, const RobotState& state,
                     const WorldGeometry& world, int samples);

// Closed-form point/segment distance written independently of the library.
double PointSegment(const Vec2& p, const Vec2& a, const Vec2& b);
bool InsideBox(const Vec2& p, const Box& box);
double PointWorld(const Vec2& p, const WorldGeometry& world);

// Dense direct solve of the discrete Laplace problem on the field's cells.
// Uses its own flood fill from the goal; unreachable free cells get 0.
std::vector<double> DenseHarmonic(const GridField& rasterized);

// A_t = sum_l (gamma lambda)^l delta_{t+l}, summed term by term.
std::vector<double> BruteForceGae(const RolloutBuffer& buffer, double gamma, double lambda);

// True when every collision-free base center on a `step` grid over the
// world bounds keeps its disk more than `margin` from the goal.
bool BaseCannotReach(const RobotConfig& robot, const Scene& scene, double step, double margin,
                     double* closest_gap);

// Searches base poses and end-effector orientations with analytic IK for a
// collision-free configuration within joint limits whose end effector sits
// on the goal. Returns true and the state when found.
bool ArmFits(const RobotConfig& robot, const Scene& scene, RobotState* found);

// Central differences of f around x.
std::vector<double> FiniteDifference(const std::function<double(const std::vector<double>&)>& f,
                                     std::vector<double> x, double h);

}  // namespace wbc::oracle

#endif  // WBC_TESTS_ORACLES_H_
