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

#include "wbc/pathfield.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace wbc {

bool GridField::CellOf(const Vec2& p, int* ix, int* iy) const {
  const double fx = std::floor((p.x - origin.x) / cell_size);
  const double fy = std::floor((p.y - origin.y) / cell_size);
  if (!(fx >= 0.0 && fy >= 0.0 && fx < width && fy < height)) return false;
  *ix = static_cast<int>(fx);
  *iy = static_cast<int>(fy);
  return true;
}

int GridField::CellIndexOf(const Vec2& p) const {
  int ix = 0;
  int iy = 0;
  return CellOf(p, &ix, &iy) ? Index(ix, iy) : -1;
}

namespace {

struct Bilinear {
  int x0, y0, x1, y1;
  double tx, ty;
};

Bilinear BilinearWeights(const GridField& f, const Vec2& p) {
  double fx = (p.x - f.origin.x) / f.cell_size - 0.5;
  double fy = (p.y - f.origin.y) / f.cell_size - 0.5;
  fx = std::clamp(fx, 0.0, static_cast<double>(f.width - 1));
  fy = std::clamp(fy, 0.0, static_cast<double>(f.height - 1));
  Bilinear b;
  b.x0 = std::min(static_cast<int>(fx), std::max(f.width - 2, 0));
  b.y0 = std::min(static_cast<int>(fy), std::max(f.height - 2, 0));
  b.x1 = std::min(b.x0 + 1, f.width - 1);
  b.y1 = std::min(b.y0 + 1, f.height - 1);
  b.tx = fx - b.x0;
  b.ty = fy - b.y0;
  return b;
}

}  // namespace

double GridField::InterpolatedAttraction(const Vec2& p) const {
  const Bilinear b = BilinearWeights(*this, p);
  const double v00 = attraction[Index(b.x0, b.y0)];
  const double v10 = attraction[Index(b.x1, b.y0)];
  const double v01 = attraction[Index(b.x0, b.y1)];
  const double v11 = attraction[Index(b.x1, b.y1)];
  return (v00 * (1.0 - b.tx) + v10 * b.tx) * (1.0 - b.ty) +
         (v01 * (1.0 - b.tx) + v11 * b.tx) * b.ty;
}

Vec2 GridField::AttractionGradient(const Vec2& p) const {
  const Bilinear b = BilinearWeights(*this, p);
  const double v00 = attraction[Index(b.x0, b.y0)];
  const double v10 = attraction[Index(b.x1, b.y0)];
  const double v01 = attraction[Index(b.x0, b.y1)];
  const double v11 = attraction[Index(b.x1, b.y1)];
  const double gx = ((v10 - v00) * (1.0 - b.ty) + (v11 - v01) * b.ty) / cell_size;
  const double gy = ((v01 - v00) * (1.0 - b.tx) + (v11 - v10) * b.tx) / cell_size;
  return {gx, gy};
}

GridField RasterizeWorld(const WorldGeometry& world, double cell_size,
                         double inflation, const Vec2& goal) {
  if (!(cell_size > 0.0)) throw std::invalid_argument("cell size must be > 0");
  const Box& bounds = world.bounds;
  if (!(bounds.width() > 0.0 && bounds.height() > 0.0)) {
    throw std::invalid_argument("world bounds must be non-empty");
  }
  GridField field;
  field.cell_size = cell_size;
  field.origin = {bounds.lo.x - cell_size, bounds.lo.y - cell_size};
  // Interior cell counts; the tolerance absorbs bounds that are exact multiples.
  const int nx = static_cast<int>(std::ceil(bounds.width() / cell_size - 1e-9));
  const int ny = static_cast<int>(std::ceil(bounds.height() / cell_size - 1e-9));
  field.width = nx + 2;
  field.height = ny + 2;
  field.kinds.assign(static_cast<size_t>(field.width) * field.height, CellKind::kFree);
  field.attraction.assign(field.kinds.size(), 0.0);
  for (int iy = 0; iy < field.height; ++iy) {
    for (int ix = 0; ix < field.width; ++ix) {
      const int idx = field.Index(ix, iy);
      if (ix == 0 || iy == 0 || ix == field.width - 1 || iy == field.height - 1) {
        field.kinds[idx] = CellKind::kObstacle;
        continue;
      }
      const Vec2 c = field.CellCenter(ix, iy);
      bool blocked = false;
      for (const Box& b : world.boxes) {
        if (b.Contains(c) || PointBoxDistance(c, b) < inflation) {
          blocked = true;
          break;
        }
      }
      if (!blocked) {
        for (const Segment& s : world.segments) {
          if (PointSegmentDistance(c, s) < inflation) {
            blocked = true;
            break;
          }
        }
      }
      if (blocked) field.kinds[idx] = CellKind::kObstacle;
    }
  }
  const int gi = field.CellIndexOf(goal);
  if (gi < 0 || field.kinds[gi] == CellKind::kObstacle) {
    std::ostringstream msg;
    msg << "goal (" << goal.x << ", " << goal.y << ") lies in an obstacle cell";
    throw std::invalid_argument(msg.str());
  }
  field.kinds[gi] = CellKind::kGoal;
  field.goal_index = gi;
  field.attraction[gi] = 1.0;
  return field;
}

namespace {

std::array<int, 4> Neighbors4(const GridField& f, int idx) {
  return {idx - 1, idx + 1, idx - f.width, idx + f.width};
}

// Ring cells are always obstacles, so interior neighbours never leave the grid.
double StencilMean(const GridField& f, int idx) {
  const double* a = f.attraction.data();
  return 0.25 * (a[idx - 1] + a[idx + 1] + a[idx - f.width] + a[idx + f.width]);
}

}  // namespace

double MaxRelativeResidual(const GridField& field) {
  double worst = 0.0;
  for (size_t i = 0; i < field.kinds.size(); ++i) {
    if (field.kinds[i] != CellKind::kFree) continue;
    const int idx = static_cast<int>(i);
    const double a = field.attraction[idx];
    const double r = std::abs(StencilMean(field, idx) - a);
    worst = std::max(worst, a > 0.0 ? r / a : std::numeric_limits<double>::infinity());
  }
  return worst;
}

GridField SolveHarmonic(GridField field, const HarmonicSolverOptions& options,
                        HarmonicSolveStats* stats) {
  if (field.goal_index < 0 || field.kinds[field.goal_index] != CellKind::kGoal) {
    throw std::invalid_argument("field has no goal cell");
  }
  bool open_goal = false;
  for (int n : Neighbors4(field, field.goal_index)) {
    open_goal = open_goal || field.kinds[n] == CellKind::kFree;
  }
  if (!open_goal) throw std::invalid_argument("goal cell has no free neighbour");

  // Free cells the goal cannot reach have no meaningful potential.
  std::vector<char> reached(field.kinds.size(), 0);
  std::deque<int> frontier{field.goal_index};
  reached[field.goal_index] = 1;
  while (!frontier.empty()) {
    const int idx = frontier.front();
    frontier.pop_front();
    for (int n : Neighbors4(field, idx)) {
      if (!reached[n] && field.kinds[n] == CellKind::kFree) {
        reached[n] = 1;
        frontier.push_back(n);
      }
    }
  }
  std::vector<int> free_cells;
  for (size_t i = 0; i < field.kinds.size(); ++i) {
    if (field.kinds[i] == CellKind::kGoal) {
      field.attraction[i] = 1.0;
    } else if (field.kinds[i] == CellKind::kFree && reached[i]) {
      free_cells.push_back(static_cast<int>(i));
    } else {
      field.kinds[i] = CellKind::kObstacle;
      field.attraction[i] = 0.0;
    }
  }

  const double omega = options.omega;
  constexpr int kCheckEvery = 8;
  double residual = std::numeric_limits<double>::infinity();
  int iter = 0;
  while (iter < options.max_iterations) {
    for (int idx : free_cells) {
      double& a = field.attraction[idx];
      a += omega * (StencilMean(field, idx) - a);
    }
    ++iter;
    if (iter % kCheckEvery == 0) {
      residual = MaxRelativeResidual(field);
      if (residual < options.tolerance) break;
    }
  }
  if (stats != nullptr) *stats = {iter, residual};
  if (!(residual < options.tolerance)) {
    std::ostringstream msg;
    msg << "harmonic solve did not converge in " << options.max_iterations
        << " iterations (relative residual " << residual << ")";
    throw std::runtime_error(msg.str());
  }
  return field;
}

void PathPolyline::Append(const Vec2& p) {
  if (points.empty()) {
    points.push_back(p);
    cumulative.push_back(0.0);
    return;
  }
  const double step = Distance(points.back(), p);
  if (!(step > 0.0)) return;
  points.push_back(p);
  cumulative.push_back(cumulative.back() + step);
}

PathPolyline ExtractPath(const GridField& field, const Vec2& start) {
  const int start_cell = field.CellIndexOf(start);
  if (start_cell < 0 || field.kinds[start_cell] == CellKind::kObstacle) {
    throw std::invalid_argument("path start is not in a free cell");
  }
  const double h = field.cell_size;
  const int gx = field.goal_index % field.width;
  const int gy = field.goal_index / field.width;
  const Vec2 goal_center = field.CellCenter(field.goal_index);
  const double max_length =
      4.0 * 2.0 * (field.width + field.height) * h;  // 4x domain perimeter

  PathPolyline path;
  path.Append(start);
  Vec2 p = start;
  while (true) {
    int ix = 0;
    int iy = 0;
    field.CellOf(p, &ix, &iy);
    if (std::abs(ix - gx) <= 1 && std::abs(iy - gy) <= 1) {
      path.Append(goal_center);
      return path;
    }
    const double a = field.InterpolatedAttraction(p);
    const Vec2 g = field.AttractionGradient(p);
    const double gnorm = Norm(g);
    // Relative test: the attraction itself can be vanishingly small.
    if (!(gnorm >= 1e-12 * a) || gnorm == 0.0) {
      std::ostringstream msg;
      msg << "path descent stalled at (" << p.x << ", " << p.y << ")";
      throw std::runtime_error(msg.str());
    }
    const Vec2 dir = g * (1.0 / gnorm);
    Vec2 next = p;
    bool advanced = false;
    double step = 0.5 * h;
    for (int tries = 0; tries < 12 && !advanced; ++tries, step *= 0.5) {
      const Vec2 q = p + dir * step;
      const int qc = field.CellIndexOf(q);
      if (qc >= 0 && field.kinds[qc] != CellKind::kObstacle &&
          field.InterpolatedAttraction(q) > a) {
        next = q;
        advanced = true;
      }
    }
    if (!advanced) {
      // Kinks of the bilinear interpolant: fall back to the best neighbour
      // cell center, which strictly improves by the discrete mean-value property.
      double best = a;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = ix + dx;
          const int ny = iy + dy;
          if (nx < 0 || ny < 0 || nx >= field.width || ny >= field.height) continue;
          const int n = field.Index(nx, ny);
          if (field.kinds[n] == CellKind::kObstacle) continue;
          const Vec2 c = field.CellCenter(nx, ny);
          const double ac = field.InterpolatedAttraction(c);
          if (ac > best) {
            best = ac;
            next = c;
            advanced = true;
          }
        }
      }
    }
    if (!advanced) {
      std::ostringstream msg;
      msg << "path descent stalled at (" << p.x << ", " << p.y << ")";
      throw std::runtime_error(msg.str());
    }
    path.Append(next);
    p = next;
    if (path.total_length() > max_length) {
      throw std::runtime_error("path length exceeded 4x the domain perimeter");
    }
  }
}

PathProjection ProjectOntoPath(const PathPolyline& path, const Vec2& p) {
  if (path.points.empty()) throw std::invalid_argument("empty path");
  PathProjection best{path.points[0], 0.0, Distance(p, path.points[0])};
  for (size_t i = 0; i + 1 < path.points.size(); ++i) {
    double t = 0.0;
    const Segment seg{path.points[i], path.points[i + 1]};
    const Vec2 q = ClosestPointOnSegment(p, seg, &t);
    const double d = Distance(p, q);
    const double s = path.cumulative[i] + t * (path.cumulative[i + 1] - path.cumulative[i]);
    if (d < best.distance - 1e-12 || (d <= best.distance + 1e-12 && s > best.arc_length)) {
      best = {q, s, d};
    }
  }
  return best;
}

PathMetricsState InitPathMetrics(const PathPolyline& path, const Vec2& start) {
  const PathProjection proj = ProjectOntoPath(path, start);
  return {proj.distance, proj.arc_length};
}

PathMetricsStep PathMetrics(const PathPolyline& path, const PathMetricsState& state,
                            const Vec2& end_effector, bool ratchet) {
  const PathProjection proj = ProjectOntoPath(path, end_effector);
  PathMetricsStep step;
  step.state.deviation = proj.distance;
  step.state.progress = ratchet ? std::max(proj.arc_length, state.progress) : proj.arc_length;
  step.deviation_delta = step.state.deviation - state.deviation;
  step.progress_delta = step.state.progress - state.progress;
  return step;
}

}  // namespace wbc
