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

#ifndef WBC_CONFIG_H_
#define WBC_CONFIG_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "wbc/adr.h"
#include "wbc/env.h"
#include "wbc/pathfield.h"
#include "wbc/policy.h"
#include "wbc/ppo.h"
#include "wbc/reward.h"
#include "wbc/sim.h"

namespace wbc {

using Json = nlohmann::ordered_json;

struct EvalConfig {
  int episodes = 100;
  std::uint64_t seed = 1;
  bool sample = false;  // sample actions instead of per-dimension argmax
};

// The whole configuration tree. Reward timing (tau, T_h, T_t) and the reward
// variant live under "episode"; "reward" holds the weights and terminal values.
struct RunConfig {
  RobotConfig robot;
  EnvSpec env;
  EpisodeConfig episode;
  RewardParams reward;
  PathfieldConfig pathfield;
  AdrParams adr;
  NetworkConfig policy;  // input and output sizes follow the robot
  TrainConfig train;
  EvalConfig eval;

  std::vector<std::string> Validate() const;
  EpisodeSetup episode_setup() const;
  NetworkConfig network() const { return policy.MatchRobot(robot); }
  // ADR parameters used for training; a disabled curriculum holds the
  // episode tolerance.
  AdrParams training_adr() const;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

// Missing fields keep their defaults. Throws ConfigError listing every
// unknown key, type mismatch, and invariant violation.
RunConfig ConfigFromJson(const Json& json);
RunConfig LoadConfig(const std::string& path);
Json ConfigToJson(const RunConfig& config);
void SaveConfig(const std::string& path, const RunConfig& config);

// Identifies a training run for resume: everything except total_steps and
// checkpoint_interval, which may change between sessions.
std::uint64_t RunHash(const RunConfig& config);

Json StateToJson(const RobotState& state);
RobotState StateFromJson(const Json& json);
Json WorldToJson(const WorldGeometry& world);
WorldGeometry WorldFromJson(const Json& json);
Json SceneToJson(const Scene& scene);
Scene SceneFromJson(const Json& json);
Json TermsToJson(const RewardTerms& terms);

}  // namespace wbc

#endif  // WBC_CONFIG_H_
