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

#include "wbc/eval.h"

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "wbc/render.h"

namespace wbc {
namespace {

RunConfig EmptyCorridor() {
  RunConfig c;
  c.env.corridor.length = {4.0, 6.0};
  c.env.corridor.obstacle_count = {0, 0};
  return c;
}

ControllerFactory Scripted(const RunConfig& c) {
  return [c] { return std::make_unique<ScriptedController>(c.robot, c.episode.step_time); };
}

TEST(EvalTest, ScriptedControllerSolvesEmptyCorridors) {
  const RunConfig c = EmptyCorridor();
  EvalOptions opts;
  opts.episodes = 30;
  opts.tolerance = 0.5;
  const EvalReport r = Evaluate(c, Scripted(c), opts);
  EXPECT_EQ(r.successes, 30);
  EXPECT_EQ(r.controller, "scripted");
  EXPECT_TRUE(std::isnan(r.mean_failure_distance));
  EXPECT_NE(r.ToTable().find("mean_failure_distance_m  -"), std::string::npos);
  EXPECT_TRUE(r.ToJson()["mean_failure_distance"].is_null());
}

TEST(EvalTest, ZeroControllerTimesOut) {
  const RunConfig c = EmptyCorridor();
  EvalOptions opts;
  opts.episodes = 10;
  opts.tolerance = 0.3;
  const EvalReport r =
      Evaluate(c, [&c] { return std::make_unique<ZeroController>(c.robot); }, opts);
  EXPECT_EQ(r.successes, 0);
  EXPECT_EQ(r.timeouts, 10);
  EXPECT_GT(r.mean_failure_distance, 0.3);
  EXPECT_EQ(r.success_rate(), 0.0);
}

TEST(EvalTest, OutcomesAddUp) {
  RunConfig c;
  c.env.corridor.length = {4.0, 6.0};
  c.episode.timeout = 10.0;
  EvalOptions opts;
  opts.episodes = 12;
  const EvalReport r = Evaluate(c, Scripted(c), opts);
  EXPECT_EQ(r.successes + r.collisions + r.timeouts + r.joint_limits, 12);
  EXPECT_NEAR(r.percent(r.successes) + r.percent(r.collisions) + r.percent(r.timeouts) +
                  r.percent(r.joint_limits),
              100.0, 1e-9);
}

TEST(EvalTest, RejectsToleranceOutsideRange) {
  const RunConfig c = EmptyCorridor();
  EvalOptions opts;
  opts.tolerance = 0.7;
  EXPECT_THROW(Evaluate(c, Scripted(c), opts), ConfigError);
}

TEST(EvalTest, ReproducibleReportsAndLogs) {
  const RunConfig c = EmptyCorridor();
  NetworkConfig small = c.network();
  small.scan_hidden = 8;
  small.scan_embed = 4;
  small.trunk_hidden = {16};
  RunConfig cs = c;
  cs.policy = small;
  const NetworkParams params = InitNetwork(cs.network(), 3);
  auto run = [&](std::ostream* log) {
    EvalOptions opts;
    opts.episodes = 3;
    opts.seed = 5;
    opts.log = log;
    cs.episode.timeout = 4.0;
    return Evaluate(
        cs, [&] { return std::make_unique<PolicyController>(params, cs.robot, true); }, opts);
  };
  std::ostringstream log_a, log_b;
  const EvalReport a = run(&log_a);
  const EvalReport b = run(&log_b);
  EXPECT_EQ(a.ToJson().dump(), b.ToJson().dump());
  EXPECT_EQ(a.ToTable(), b.ToTable());
  EXPECT_EQ(log_a.str(), log_b.str());
  EXPECT_EQ(a.controller, "policy-sample");
}

TEST(EpisodeLogTest, RoundTripAndRender) {
  const RunConfig c = EmptyCorridor();
  std::stringstream log;
  EvalOptions opts;
  opts.episodes = 2;
  opts.log = &log;
  Evaluate(c, Scripted(c), opts);
  const std::vector<EpisodeTrace> traces = ReadEpisodeLog(log);
  ASSERT_EQ(traces.size(), 2u);
  for (const EpisodeTrace& t : traces) {
    EXPECT_EQ(t.termination, Termination::kSuccess);
    ASSERT_GE(t.states.size(), 2u);
    const Vec2 ee = ForwardKinematics(c.robot, t.states.back()).end_effector.position();
    EXPECT_LE(Distance(ee, t.scene.goal.position()), t.tolerance);
    EXPECT_LE(t.goal_distance, t.tolerance);
    EXPECT_FALSE(t.path.empty());
  }
  const std::string svg = RenderSvg(c.robot, traces[0].scene, traces[0].tolerance,
                                    traces[0].path, traces[0].states, RenderOptions{});
  EXPECT_TRUE(svg.starts_with("<svg") || svg.starts_with("<?xml"));
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_EQ(svg, RenderSvg(c.robot, traces[0].scene, traces[0].tolerance, traces[0].path,
                           traces[0].states, RenderOptions{}));
}

TEST(RenderTest, FieldPgmHeader) {
  WorldGeometry w;
  w.bounds = {{0, 0}, {1, 0.5}};
  GridField f = SolveHarmonic(RasterizeWorld(w, 0.05, 0.0, {0.5, 0.25}), {});
  const std::string pgm = FieldToPgm(f);
  EXPECT_TRUE(pgm.starts_with("P5\n22 12\n255\n"));
  EXPECT_EQ(pgm.size(), std::string("P5\n22 12\n255\n").size() + 22 * 12);
}

}  // namespace
}  // namespace wbc
