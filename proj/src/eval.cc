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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace wbc {

double EvalReport::success_rate() const {
  return episodes > 0 ? static_cast<double>(successes) / episodes : 0.0;
}

double EvalReport::percent(int count) const {
  return episodes > 0 ? 100.0 * count / episodes : 0.0;
}

std::string EvalReport::ToTable() const {
  std::vector<std::pair<std::string, std::string>> rows;
  auto fixed = [](double v, int digits) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
  };
  auto count = [&](int n) { return std::to_string(n) + " (" + fixed(percent(n), 1) + "%)"; };
  rows.emplace_back("environment", std::string(ToString(kind)));
  rows.emplace_back("controller", controller);
  rows.emplace_back("tolerance_m", fixed(tolerance, 3));
  rows.emplace_back("episodes", std::to_string(episodes));
  rows.emplace_back("seed", std::to_string(seed));
  rows.emplace_back("success_rate", fixed(100.0 * success_rate(), 1) + "%");
  rows.emplace_back("success", count(successes));
  rows.emplace_back("collision", count(collisions));
  rows.emplace_back("timeout", count(timeouts));
  rows.emplace_back("joint_limit", count(joint_limits));
  rows.emplace_back("mean_failure_distance_m",
                    std::isnan(mean_failure_distance) ? "-" : fixed(mean_failure_distance, 3));
  size_t width = 6;
  for (const auto& [k, v] : rows) width = std::max(width, k.size());
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(width)) << "metric" << "  value\n";
  out << std::string(width, '-') << "  " << std::string(16, '-') << "\n";
  for (const auto& [k, v] : rows) {
    out << std::left << std::setw(static_cast<int>(width)) << k << "  " << v << "\n";
  }
  return out.str();
}

Json EvalReport::ToJson() const {
  Json j;
  j["environment"] = std::string(ToString(kind));
  j["controller"] = controller;
  j["tolerance"] = tolerance;
  j["episodes"] = episodes;
  j["seed"] = seed;
  j["success_rate"] = success_rate();
  j["termination_percent"] = {{"success", percent(successes)},
                              {"collision", percent(collisions)},
                              {"timeout", percent(timeouts)},
                              {"joint_limit", percent(joint_limits)}};
  j["termination_counts"] = {{"success", successes},
                             {"collision", collisions},
                             {"timeout", timeouts},
                             {"joint_limit", joint_limits}};
  if (std::isnan(mean_failure_distance)) {
    j["mean_failure_distance"] = nullptr;
  } else {
    j["mean_failure_distance"] = mean_failure_distance;
  }
  return j;
}

PolicyController::PolicyController(NetworkParams params, RobotConfig robot, bool sample)
    : params_(std::move(params)), robot_(std::move(robot)), sample_(sample) {
  if (params_.config.input_size() != Observation::FlatSize(robot_) ||
      params_.config.action_dims != 3 + robot_.num_joints()) {
    throw std::invalid_argument("policy network does not match the robot");
  }
}

std::string PolicyController::name() const {
  return sample_ ? "policy-sample" : "policy-greedy";
}

Action PolicyController::Act(const Episode& episode, std::mt19937_64& rng) {
  const PolicyOutput out = Forward(params_, episode.observation().Flatten());
  const SampledAction a = sample_ ? SampleAction(out, rng) : GreedyAction(out);
  bins_ = a.bins;
  return BinsToAction(robot_, bins_, params_.config.bins);
}

ScriptedController::ScriptedController(RobotConfig robot, double step_time)
    : robot_(std::move(robot)), step_time_(step_time) {}

Action ScriptedController::Act(const Episode& episode, std::mt19937_64&) {
  constexpr double kGain = 1.5;
  constexpr double kMaxSpeed = 0.4;
  const RobotState& s = episode.state();
  Vec2 v = (episode.scene().goal.position() - episode.end_effector()) * kGain;
  const double speed = Norm(v);
  if (speed > kMaxSpeed) v = v * (kMaxSpeed / speed);
  const Vec2 body = Rotate(v, -s.base_pose.theta);
  const std::array<double, 3> target{body.x, body.y, 0.0};
  Action a = Action::Zero(robot_);
  for (int i = 0; i < 3; ++i) {
    const double lim = robot_.max_base_acc[i];
    a.base_acc[i] = std::clamp((target[i] - s.base_vel[i]) / step_time_, -lim, lim);
  }
  for (size_t j = 0; j < a.joint_acc.size(); ++j) {
    a.joint_acc[j] = std::clamp(-s.joint_vel[j] / step_time_, -robot_.max_joint_acc,
                                robot_.max_joint_acc);
  }
  return a;
}

// --- Episode logs -------------------------------------------------------------

void EpisodeLogWriter::Begin(std::int64_t index, const Episode& episode) {
  Json path = Json::array();
  for (const Vec2& p : episode.path().points) path.push_back(Json::array({p.x, p.y}));
  Json j;
  j["type"] = "episode";
  j["index"] = index;
  j["tolerance"] = episode.tolerance();
  j["scene"] = SceneToJson(episode.scene());
  j["path"] = path;
  *out_ << j.dump() << "\n";
}

void EpisodeLogWriter::Step(const Episode& episode, const Action& action,
                            const std::vector<int>& bins, const StepOutcome& outcome) {
  Json j;
  j["type"] = "step";
  j["t"] = episode.steps();
  j["state"] = StateToJson(episode.state());
  j["action"] = {{"base_acc", action.base_acc}, {"joint_acc", action.joint_acc}};
  if (!bins.empty()) j["action"]["bins"] = bins;
  j["reward"] = outcome.reward;
  j["terms"] = TermsToJson(outcome.terms);
  j["goal_distance"] = outcome.info.goal_distance;
  j["termination"] = std::string(ToString(outcome.terminated));
  *out_ << j.dump() << "\n";
}

void EpisodeLogWriter::End(const Episode& episode, double goal_distance, double episode_return) {
  Json j;
  j["type"] = "result";
  j["termination"] = std::string(ToString(episode.termination()));
  j["steps"] = episode.steps();
  j["goal_distance"] = goal_distance;
  j["return"] = episode_return;
  *out_ << j.dump() << "\n";
}

std::vector<EpisodeTrace> ReadEpisodeLog(std::istream& in) {
  std::vector<EpisodeTrace> traces;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const Json j = Json::parse(line);
      const std::string type = j.at("type").get<std::string>();
      if (type == "episode") {
        EpisodeTrace t;
        t.index = j.at("index").get<std::int64_t>();
        t.tolerance = j.at("tolerance").get<double>();
        t.scene = SceneFromJson(j.at("scene"));
        for (const Json& p : j.at("path")) t.path.push_back({p[0].get<double>(), p[1].get<double>()});
        t.states.push_back(t.scene.start);
        traces.push_back(std::move(t));
        continue;
      }
      if (traces.empty()) throw std::runtime_error("record before episode header");
      if (type == "step") {
        traces.back().states.push_back(StateFromJson(j.at("state")));
      } else if (type == "result") {
        traces.back().termination = ParseTermination(j.at("termination").get<std::string>());
        traces.back().goal_distance = j.at("goal_distance").get<double>();
        traces.back().episode_return = j.at("return").get<double>();
      } else {
        throw std::runtime_error("unknown record type '" + type + "'");
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("episode log line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return traces;
}

std::vector<EpisodeTrace> ReadEpisodeLog(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return ReadEpisodeLog(in);
}

// --- Evaluation ---------------------------------------------------------------

EvalReport Evaluate(const RunConfig& config, const ControllerFactory& factory,
                    const EvalOptions& options) {
  if (options.episodes < 1) throw std::invalid_argument("need at least one episode");
  EpisodeConfig probe = config.episode;
  probe.tolerance = options.tolerance;
  if (std::vector<std::string> errors = probe.Validate(); !errors.empty()) {
    throw ConfigError(errors);
  }
  const EpisodeSetup setup = config.episode_setup();
  EvalReport report;
  report.kind = config.env.kind;
  report.tolerance = options.tolerance;
  report.episodes = options.episodes;
  report.seed = options.seed;
  double failure_distance = 0.0;
  int failures = 0;
  EpisodeLogWriter log(options.log);
  for (int i = 0; i < options.episodes; ++i) {
    const std::uint64_t episode_seed = DeriveSeed(options.seed, static_cast<std::uint64_t>(i));
    Scene scene = GenerateScene(config.env, config.robot, config.pathfield, episode_seed);
    Episode episode(setup, std::move(scene), options.tolerance);
    std::unique_ptr<Controller> controller = factory();
    if (report.controller.empty()) report.controller = controller->name();
    std::mt19937_64 rng(DeriveSeed(episode_seed, 1));
    if (options.log != nullptr) log.Begin(i, episode);
    double goal_distance = 0.0;
    double episode_return = 0.0;
    while (!episode.terminated()) {
      const Action action = controller->Act(episode, rng);
      const StepOutcome out = episode.Step(action);
      goal_distance = out.info.goal_distance;
      episode_return += out.reward;
      if (options.log != nullptr) log.Step(episode, action, controller->last_bins(), out);
    }
    if (options.log != nullptr) log.End(episode, goal_distance, episode_return);
    switch (episode.termination()) {
      case Termination::kSuccess:
        ++report.successes;
        break;
      case Termination::kCollision:
        ++report.collisions;
        break;
      case Termination::kTimeout:
        ++report.timeouts;
        break;
      case Termination::kJointLimit:
        ++report.joint_limits;
        break;
      case Termination::kNone:
        throw std::logic_error("episode ended without a termination reason");
    }
    if (episode.termination() != Termination::kSuccess) {
      failure_distance += goal_distance;
      ++failures;
    }
  }
  report.mean_failure_distance =
      failures > 0 ? failure_distance / failures : std::numeric_limits<double>::quiet_NaN();
  return report;
}

EvalReport EvaluateCheckpoint(const RunConfig& config, const std::string& checkpoint,
                              bool sample, const EvalOptions& options) {
  const NetworkParams params = LoadNetwork(checkpoint, config.network());
  return Evaluate(
      config,
      [&] { return std::make_unique<PolicyController>(params, config.robot, sample); },
      options);
}

}  // namespace wbc
