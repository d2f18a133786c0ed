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
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.h"

namespace wbc {
namespace {

// 1 m x 1 m world rasterized at 0.05 m: a 20 x 20 interior.
GridField RandomScene(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  while (true) {
    WorldGeometry w;
    w.bounds = {{0.0, 0.0}, {1.0, 1.0}};
    const int boxes = 1 + static_cast<int>(u(rng) * 4);
    for (int b = 0; b < boxes; ++b) {
      const Vec2 lo{u(rng) * 0.8, u(rng) * 0.8};
      w.boxes.push_back({lo, lo + Vec2{0.05 + 0.3 * u(rng), 0.05 + 0.3 * u(rng)}});
    }
    const Vec2 goal{0.025 + 0.05 * static_cast<int>(u(rng) * 20),
                    0.025 + 0.05 * static_cast<int>(u(rng) * 20)};
    try {
      return RasterizeWorld(w, 0.05, 0.0, goal);
    } catch (const std::invalid_argument&) {
      continue;  // goal landed in an obstacle
    }
  }
}

TEST(RasterizeTest, RingAndGoal) {
  WorldGeometry w;
  w.bounds = {{0.0, 0.0}, {1.0, 0.5}};
  const GridField f = RasterizeWorld(w, 0.05, 0.0, {0.5, 0.25});
  EXPECT_EQ(f.width, 22);
  EXPECT_EQ(f.height, 12);
  for (int ix = 0; ix < f.width; ++ix) {
    EXPECT_EQ(f.kinds[f.Index(ix, 0)], CellKind::kObstacle);
    EXPECT_EQ(f.kinds[f.Index(ix, f.height - 1)], CellKind::kObstacle);
  }
  EXPECT_EQ(f.kinds[f.goal_index], CellKind::kGoal);
  EXPECT_EQ(f.attraction[f.goal_index], 1.0);
  w.boxes.push_back({{0.4, 0.1}, {0.6, 0.4}});
  EXPECT_THROW(RasterizeWorld(w, 0.05, 0.0, {0.5, 0.25}), std::invalid_argument);
}

TEST(HarmonicTest, MatchesDenseDirectSolve) {
  std::mt19937_64 rng(41);
  for (int scene = 0; scene < 20; ++scene) {
    const GridField raster = RandomScene(rng);
    const std::vector<double> expected = oracle::DenseHarmonic(raster);
    HarmonicSolveStats stats;
    const GridField solved = SolveHarmonic(raster, HarmonicSolverOptions{}, &stats);
    double err = 0.0;
    for (size_t i = 0; i < expected.size(); ++i) {
      err = std::max(err, std::abs(solved.attraction[i] - expected[i]));
    }
    EXPECT_LT(err, 1e-6) << "scene " << scene;
    EXPECT_LE(MaxRelativeResidual(solved), 1e-10);
  }
}

TEST(HarmonicTest, PathReachesGoalFromEveryFreeCell) {
  std::mt19937_64 rng(43);
  for (int scene = 0; scene < 5; ++scene) {
    const GridField field = SolveHarmonic(RandomScene(rng), HarmonicSolverOptions{});
    const Vec2 goal = field.CellCenter(field.goal_index);
    for (int i = 0; i < static_cast<int>(field.kinds.size()); ++i) {
      if (field.kinds[i] != CellKind::kFree) continue;
      const PathPolyline path = ExtractPath(field, field.CellCenter(i));
      ASSERT_FALSE(path.points.empty());
      EXPECT_EQ(path.points.back(), goal) << "scene " << scene << " cell " << i;
      for (const Vec2& p : path.points) {
        ASSERT_NE(field.kinds[field.CellIndexOf(p)], CellKind::kObstacle);
      }
    }
  }
}

TEST(HarmonicTest, MaximumPrinciple) {
  std::mt19937_64 rng(47);
  const GridField field = SolveHarmonic(RandomScene(rng), HarmonicSolverOptions{});
  for (size_t i = 0; i < field.kinds.size(); ++i) {
    if (field.kinds[i] != CellKind::kFree) continue;
    EXPECT_GT(field.attraction[i], 0.0);
    EXPECT_LT(field.attraction[i], 1.0);
  }
}

TEST(HarmonicTest, LongCorridorStillHasGradient) {
  // Far from the goal the attraction underflows a naive potential
  // representation; the path must still make it.
  WorldGeometry w;
  w.bounds = {{0.0, -0.5}, {12.0, 0.5}};
  const GridField field =
      SolveHarmonic(RasterizeWorld(w, 0.05, 0.0, {11.5, 0.0}), HarmonicSolverOptions{});
  const PathPolyline path = ExtractPath(field, {0.3, 0.0});
  EXPECT_EQ(path.points.back(), field.CellCenter(field.goal_index));
  EXPECT_NEAR(path.total_length(), 11.2, 0.2);
}

TEST(ExtractPathTest, PotentialNeverIncreasesAlongPath) {
  std::mt19937_64 rng(53);
  for (int scene = 0; scene < 5; ++scene) {
    const GridField field = SolveHarmonic(RandomScene(rng), HarmonicSolverOptions{});
    for (int i = 0; i < static_cast<int>(field.kinds.size()); i += 7) {
      if (field.kinds[i] != CellKind::kFree) continue;
      const PathPolyline path = ExtractPath(field, field.CellCenter(i));
      for (size_t k = 1; k < path.points.size(); ++k) {
        ASSERT_GE(field.InterpolatedAttraction(path.points[k]),
                  field.InterpolatedAttraction(path.points[k - 1]));
      }
    }
  }
}

TEST(ExtractPathTest, StraightCorridorAndAdjacentStart) {
  WorldGeometry w;
  w.bounds = {{0.0, -0.5}, {4.0, 0.5}};
  const GridField field =
      SolveHarmonic(RasterizeWorld(w, 0.05, 0.0, {3.525, 0.025}), HarmonicSolverOptions{});
  const PathPolyline path = ExtractPath(field, {0.525, 0.025});
  for (const Vec2& p : path.points) EXPECT_LT(std::abs(p.y - 0.025), 2 * 0.05);
  const PathPolyline hop = ExtractPath(field, {3.575, 0.075});
  EXPECT_EQ(hop.points.size(), 2u);
  EXPECT_LE(hop.total_length(), 0.05 * std::sqrt(2.0) + 1e-12);
  EXPECT_THROW(ExtractPath(field, {-1.0, 0.0}), std::invalid_argument);
}

TEST(PathMetricsTest, RandomWalksTelescopeAndAreLipschitz) {
  PathPolyline path;
  for (int i = 0; i <= 20; ++i) path.Append({0.2 * i, 0.3 * std::sin(0.5 * i)});
  std::mt19937_64 rng(59);
  std::normal_distribution<double> g(0.0, 0.05);
  for (int episode = 0; episode < 1000; ++episode) {
    Vec2 ee{g(rng), g(rng)};
    PathMetricsState s = InitPathMetrics(path, ee);
    const double initial = s.progress;
    double sum = 0.0;
    for (int t = 0; t < 50; ++t) {
      const Vec2 next{ee.x + g(rng) + 0.05, ee.y + g(rng)};
      const PathMetricsStep m = PathMetrics(path, s, next);
      ASSERT_LE(std::abs(m.deviation_delta), Distance(ee, next) + 1e-12);
      sum += m.progress_delta;
      s = m.state;
      ee = next;
    }
    ASSERT_NEAR(sum, s.progress - initial, 1e-9);
  }
}

TEST(PathMetricsTest, ProjectionAndDeltas) {
  PathPolyline path;
  path.Append({0.0, 0.0});
  path.Append({2.0, 0.0});
  path.Append({2.0, 2.0});
  EXPECT_DOUBLE_EQ(path.total_length(), 4.0);

  const PathProjection p = ProjectOntoPath(path, {1.0, 0.5});
  EXPECT_DOUBLE_EQ(p.arc_length, 1.0);
  EXPECT_DOUBLE_EQ(p.distance, 0.5);
  // Equidistant from both legs: the later one wins.
  const PathProjection tie = ProjectOntoPath(path, {1.5, 0.5});
  EXPECT_DOUBLE_EQ(tie.arc_length, 2.5);

  const PathMetricsState s0 = InitPathMetrics(path, {0.0, 0.1});
  EXPECT_DOUBLE_EQ(s0.deviation, 0.1);
  EXPECT_DOUBLE_EQ(s0.progress, 0.0);
  const PathMetricsStep s1 = PathMetrics(path, s0, {0.5, 0.3});
  EXPECT_NEAR(s1.deviation_delta, 0.2, 1e-15);
  EXPECT_NEAR(s1.progress_delta, 0.5, 1e-15);
  const PathMetricsStep back = PathMetrics(path, s1.state, {0.2, 0.3});
  EXPECT_NEAR(back.progress_delta, -0.3, 1e-15);
  const PathMetricsStep ratchet = PathMetrics(path, s1.state, {0.2, 0.3}, true);
  EXPECT_EQ(ratchet.progress_delta, 0.0);
}

TEST(PathMetricsTest, ProgressTelescopesAlongPath) {
  PathPolyline path;
  for (int i = 0; i <= 10; ++i) path.Append({0.3 * i, 0.1 * std::sin(i)});
  PathMetricsState s = InitPathMetrics(path, path.points.front());
  double total = 0.0;
  for (const Vec2& p : path.points) {
    const PathMetricsStep step = PathMetrics(path, s, p);
    total += step.progress_delta;
    s = step.state;
  }
  EXPECT_NEAR(total, path.total_length(), 1e-12);
}

}  // namespace
}  // namespace wbc
