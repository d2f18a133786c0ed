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

#ifndef WBC_RENDER_H_
#define WBC_RENDER_H_

#include <span>
#include <string>
#include <vector>

#include "wbc/config.h"
#include "wbc/env.h"
#include "wbc/pathfield.h"
#include "wbc/sim.h"

namespace wbc {

struct RenderOptions {
  double pixels_per_meter = 80.0;
  bool lidar = false;  // draw the LIDAR rays of the last state
};

// Walls, obstacles, goal circle of radius `tolerance`, reference path, base and
// end-effector traces, and the robot at the last state of `trajectory`.
std::string RenderSvg(const RobotConfig& robot, const Scene& scene, double tolerance,
                      std::span<const Vec2> path, std::span<const RobotState> trajectory,
                      const RenderOptions& options);

// Binary PGM of the solved field, north up. Obstacles are black, the goal is
// white, free cells are shaded by log attraction.
std::string FieldToPgm(const GridField& field);

Json PathToJson(const PathPolyline& path);

// Throws std::runtime_error when the file cannot be written.
void WriteFile(const std::string& path, const std::string& contents);

}  // namespace wbc

#endif  // WBC_RENDER_H_
