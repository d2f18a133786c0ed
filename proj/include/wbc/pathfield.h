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

#ifndef WBC_PATHFIELD_H_
#define WBC_PATHFIELD_H_

#include <cstdint>
#include <vector>

#include "wbc/geometry.h"
#include "wbc/sim.h"

namespace wbc {

enum class CellKind : std::uint8_t { kFree, kObstacle, kGoal };

// Harmonic potential on a regular grid. The potential is 1 on obstacles and
// 0 at the goal. Internally the solver works with the goal attraction
// a = 1 - potential: far from the goal the potential approaches 1 to within
// factors like 1e-20, which is only representable in the complementary form.
struct GridField {
  Vec2 origin;  // lower-left corner of cell (0, 0)
  double cell_size = 0.05;
  int width = 0;
  int height = 0;
  std::vector<CellKind> kinds;
  std::vector<double> attraction;
  int goal_index = -1;

  int Index(int ix, int iy) const { return iy * width + ix; }
  Vec2 CellCenter(int ix, int iy) const {
    return {origin.x + (ix + 0.5) * cell_size, origin.y + (iy + 0.5) * cell_size};
  }
  Vec2 CellCenter(int index) const { return CellCenter(index % width, index / width); }
  // False when `p` lies outside the grid.
  bool CellOf(const Vec2& p, int* ix, int* iy) const;
  int CellIndexOf(const Vec2& p) const;  // -1 outside the grid

  double Potential(int index) const { return 1.0 - attraction[index]; }
  // Bilinear interpolation between cell centers.
  double InterpolatedAttraction(const Vec2& p) const;
  Vec2 AttractionGradient(const Vec2& p) const;
};

// Marks every cell whose center lies within `inflation` of a wall or box (or
// inside a box) as an obstacle. The grid covers world.bounds plus a one-cell
// obstacle ring. Throws if the goal falls in an obstacle cell.
GridField RasterizeWorld(const WorldGeometry& world, double cell_size,
                         double inflation, const Vec2& goal);

struct HarmonicSolverOptions {
  double omega = 1.8;
  // Bound on max |stencil mean - a| / a over free cells.
  double tolerance = 1e-10;
  int max_iterations = 500000;
};

struct HarmonicSolveStats {
  int iterations = 0;
  double residual = 0.0;
};

// Successive over-relaxation of the 5-point Laplace stencil with Dirichlet
// values on obstacle and goal cells. Free cells not connected to the goal are
// reclassified as obstacles.
GridField SolveHarmonic(GridField field, const HarmonicSolverOptions& options,
                        HarmonicSolveStats* stats = nullptr);

struct PathfieldConfig {
  double cell_size = 0.05;
  HarmonicSolverOptions solver;
  bool ratchet_progress = false;
};

// Max relative stencil residual over free cells of a solved field.
double MaxRelativeResidual(const GridField& field);

struct PathPolyline {
  std::vector<Vec2> points;
  std::vector<double> cumulative;  // arc length at each point

  double total_length() const { return cumulative.empty() ? 0.0 : cumulative.back(); }
  void Append(const Vec2& p);
};

// Steepest-descent streamline of the potential from `start` into the goal cell.
PathPolyline ExtractPath(const GridField& field, const Vec2& start);

struct PathProjection {
  Vec2 point;
  double arc_length = 0.0;
  double distance = 0.0;
};

// Nearest point on the polyline; ties go to the larger arc length.
PathProjection ProjectOntoPath(const PathPolyline& path, const Vec2& p);

struct PathMetricsState {
  double deviation = 0.0;
  double progress = 0.0;
};

struct PathMetricsStep {
  double deviation_delta = 0.0;
  double progress_delta = 0.0;
  PathMetricsState state;
};

PathMetricsState InitPathMetrics(const PathPolyline& path, const Vec2& start);

// Per-step change in deviation from and progress along the path. With
// `ratchet`, progress only counts new ground beyond the best so far.
PathMetricsStep PathMetrics(const PathPolyline& path, const PathMetricsState& state,
                            const Vec2& end_effector, bool ratchet = false);

}  // namespace wbc

#endif  // WBC_PATHFIELD_H_
