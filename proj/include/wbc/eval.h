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

#ifndef WBC_EVAL_H_
#define WBC_EVAL_H_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "wbc/config.h"
#include "wbc/env.h"
#include "wbc/policy.h"

namespace wbc {

struct EvalReport {
  EnvKind kind = EnvKind::kCorridor;
  double tolerance = 0.0;
  int episodes = 0;
  int successes = 0;
  int collisions = 0;
  int timeouts = 0;
  int joint_limits = 0;
  // Mean final end-effector distance over unsuccessful episodes; NaN when
  // every episode succeeded.
  double mean_failure_distance = 0.0;
  std::string controller;
  std::uint64_t seed = 0;

  double success_rate() const;
  double percent(int count) const;
  std::string ToTable() const;
  Json ToJson() const;
};

// Chooses an action for the current episode state.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual std::string name() const = 0;
  virtual Action Act(const Episode& episode, std::mt19937_64& rng) = 0;
  // Bins of the last action when the controller works on the discrete grid.
  virtual std::vector<int> last_bins() const { return {}; }
};

class PolicyController : public Controller {
 public:
  PolicyController(NetworkParams params, RobotConfig robot, bool sample);
  std::string name() const override;
  Action Act(const Episode& episode, std::mt19937_64& rng) override;
  std::vector<int> last_bins() const override { return bins_; }

 private:
  NetworkParams params_;
  RobotConfig robot_;
  bool sample_;
  std::vector<int> bins_;
};

// Arm held straight; the base translates so the end effector moves along the
// straight line to the goal. Only meaningful in obstacle-free scenes.
class ScriptedController : public Controller {
 public:
  ScriptedController(RobotConfig robot, double step_time);
  std::string name() const override { return "scripted"; }
  Action Act(const Episode& episode, std::mt19937_64& rng) override;

 private:
  RobotConfig robot_;
  double step_time_;
};

class ZeroController : public Controller {
 public:
  explicit ZeroController(RobotConfig robot) : robot_(std::move(robot)) {}
  std::string name() const override { return "zero"; }
  Action Act(const Episode&, std::mt19937_64&) override { return Action::Zero(robot_); }

 private:
  RobotConfig robot_;
};

// One logged episode as written to and read back from JSONL.
struct EpisodeTrace {
  std::int64_t index = 0;
  double tolerance = 0.0;
  Scene scene;
  std::vector<Vec2> path;
  std::vector<RobotState> states;  // initial state first
  Termination termination = Termination::kNone;
  double goal_distance = 0.0;
  double episode_return = 0.0;
};

// Writes one header record, one record per step (state, action, reward terms,
// termination), and a result record.
class EpisodeLogWriter {
 public:
  explicit EpisodeLogWriter(std::ostream* out) : out_(out) {}
  void Begin(std::int64_t index, const Episode& episode);
  void Step(const Episode& episode, const Action& action, const std::vector<int>& bins,
            const StepOutcome& outcome);
  void End(const Episode& episode, double goal_distance, double episode_return);

 private:
  std::ostream* out_;
};

std::vector<EpisodeTrace> ReadEpisodeLog(std::istream& in);
std::vector<EpisodeTrace> ReadEpisodeLog(const std::string& path);

struct EvalOptions {
  int episodes = 100;
  std::uint64_t seed = 1;
  double tolerance = 0.5;  // fixed d_h
  std::ostream* log = nullptr;  // JSONL episode log, optional
};

using ControllerFactory = std::function<std::unique_ptr<Controller>()>;

// Episode i runs on the scene seeded by DeriveSeed(seed, i) with its own
// controller RNG, so the report does not depend on evaluation order.
EvalReport Evaluate(const RunConfig& config, const ControllerFactory& factory,
                    const EvalOptions& options);

// Loads a policy checkpoint (network section) and evaluates it.
EvalReport EvaluateCheckpoint(const RunConfig& config, const std::string& checkpoint,
                              bool sample, const EvalOptions& options);

}  // namespace wbc

#endif  // WBC_EVAL_H_
