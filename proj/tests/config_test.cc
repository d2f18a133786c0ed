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

#include "wbc/config.h"

#include <algorithm>

#include <gtest/gtest.h>

namespace wbc {
namespace {

bool HasErrorFor(const ConfigError& e, const std::string& path) {
  return std::any_of(e.errors().begin(), e.errors().end(),
                     [&](const std::string& s) { return s.starts_with(path + ":"); });
}

ConfigError ErrorsFor(const std::string& text) {
  try {
    ConfigFromJson(Json::parse(text));
  } catch (const ConfigError& e) {
    return e;
  }
  ADD_FAILURE() << "no error for " << text;
  return ConfigError({});
}

TEST(ConfigTest, EmptyObjectGivesDefaults) {
  const RunConfig c = ConfigFromJson(Json::object());
  EXPECT_EQ(c.reward.w_t, -15.0);
  EXPECT_EQ(c.reward.w_hd, 40.0);
  EXPECT_EQ(c.reward.D_c, -60.0);
  EXPECT_EQ(c.episode.step_time, 0.04);
  EXPECT_EQ(c.train.clip_range, 0.2);
  EXPECT_EQ(c.train.epochs, 30);
  EXPECT_EQ(c.train.gamma, 0.999);
  EXPECT_EQ(c.train.n_steps, 2048);
  EXPECT_EQ(c.train.minibatches, 8);
  EXPECT_EQ(c.adr.min_tolerance, 0.05);
  EXPECT_EQ(c.adr.max_tolerance, 0.5);
  EXPECT_EQ(c.robot.lidar.beams, 64);
  EXPECT_EQ(c.network().input_size(), Observation::FlatSize(c.robot));
}

TEST(ConfigTest, ToleranceOutsideRangeCitesBounds) {
  const ConfigError e = ErrorsFor(R"({"episode": {"tolerance": 0.6}})");
  ASSERT_EQ(e.errors().size(), 1u);
  EXPECT_TRUE(HasErrorFor(e, "episode.tolerance"));
  EXPECT_NE(e.errors()[0].find("[0.05, 0.5]"), std::string::npos);
}

TEST(ConfigTest, UnknownKeysAreRejectedWithPaths) {
  const ConfigError e =
      ErrorsFor(R"({"bogus": 1, "env": {"corridor": {"lenght_range": [1, 2]}}})");
  EXPECT_TRUE(HasErrorFor(e, "bogus"));
  EXPECT_TRUE(HasErrorFor(e, "env.corridor.lenght_range"));
}

TEST(ConfigTest, UnknownKeysAndRangeErrorsTogether) {
  const ConfigError e = ErrorsFor(R"({"foo": 1, "episode": {"tolerance": 0.6}})");
  EXPECT_TRUE(HasErrorFor(e, "foo"));
  EXPECT_TRUE(HasErrorFor(e, "episode.tolerance"));
}

TEST(ConfigTest, TypeErrorsAreReported) {
  const ConfigError e = ErrorsFor(
      R"({"train": {"epochs": "thirty", "n_steps": 2.5}, "robot": {"link_lengths": 3}})");
  EXPECT_TRUE(HasErrorFor(e, "train.epochs"));
  EXPECT_TRUE(HasErrorFor(e, "train.n_steps"));
  EXPECT_TRUE(HasErrorFor(e, "robot.link_lengths"));
  EXPECT_EQ(e.errors().size(), 3u);
}

TEST(ConfigTest, AllRangeViolationsAreListed) {
  const ConfigError e = ErrorsFor(
      R"({"train": {"gamma": 2.0, "clip_range": 0}, "adr": {"window": 0},
          "pathfield": {"omega": 2.5}})");
  EXPECT_TRUE(HasErrorFor(e, "train.gamma"));
  EXPECT_TRUE(HasErrorFor(e, "train.clip_range"));
  EXPECT_TRUE(HasErrorFor(e, "adr.window"));
  EXPECT_TRUE(HasErrorFor(e, "pathfield.omega"));
  EXPECT_NE(std::string(e.what()).find("train.gamma"), std::string::npos);
}

TEST(ConfigTest, RoundTrip) {
  RunConfig c = ConfigFromJson(Json::parse(R"({
    "env": {"kind": "gap_test", "seed": 9},
    "episode": {"tolerance": 0.2, "variant": "baseline"},
    "robot": {"link_lengths": [0.4, 0.3], "joint_limits": [[-1, 1], [-2, 2]]},
    "policy": {"trunk_hidden": [32]},
    "train": {"workers": 2, "n_steps": 64, "linear_lr_decay": true}
  })"));
  EXPECT_EQ(c.env.kind, EnvKind::kGapTest);
  EXPECT_EQ(c.robot.num_joints(), 2);
  EXPECT_EQ(c.network().action_dims, 5);
  const Json dumped = ConfigToJson(c);
  const RunConfig again = ConfigFromJson(dumped);
  EXPECT_EQ(ConfigToJson(again).dump(), dumped.dump());
  EXPECT_EQ(RunHash(again), RunHash(c));
}

TEST(ConfigTest, RunHashIgnoresRunLengthAndEval) {
  RunConfig a = ConfigFromJson(Json::object());
  RunConfig b = a;
  b.train.total_steps = 5;
  b.train.checkpoint_interval = 1;
  b.eval.episodes = 3;
  EXPECT_EQ(RunHash(a), RunHash(b));
  b.reward.w_pt = 49.0;
  EXPECT_NE(RunHash(a), RunHash(b));
}

TEST(ConfigTest, DisabledAdrHoldsEpisodeTolerance) {
  const RunConfig c =
      ConfigFromJson(Json::parse(R"({"adr": {"enabled": false}, "episode": {"tolerance": 0.3}})"));
  EXPECT_EQ(c.training_adr().initial_tolerance, 0.3);
}

TEST(SerializationTest, SceneRoundTrip) {
  Scene s;
  s.world.bounds = {{0, -1}, {6, 1}};
  s.world.segments.push_back({{0, -1}, {6, -1}});
  s.world.boxes.push_back({{2, -0.5}, {2.5, 0.1}});
  s.start = RobotState::AtRest(RobotConfig{}, {0.7, 0.1, 0.2});
  s.start.joint_vel[1] = 0.3;
  s.goal = {5.0, 0.3, -1.0};
  const Scene t = SceneFromJson(Json::parse(SceneToJson(s).dump()));
  EXPECT_EQ(t.start, s.start);
  EXPECT_EQ(t.goal, s.goal);
  EXPECT_EQ(t.world.boxes.size(), 1u);
  EXPECT_EQ(t.world.boxes[0].hi, s.world.boxes[0].hi);
  EXPECT_EQ(t.world.segments[0].b, s.world.segments[0].b);
}

}  // namespace
}  // namespace wbc
