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

#include <fstream>
#include <set>
#include <sstream>

namespace wbc {

namespace {

// Per-type JSON decoding. Each returns false on a shape or type mismatch and
// names the expected shape in `expected`.
bool Decode(const Json& j, double& out, std::string& expected) {
  expected = "a number";
  if (!j.is_number()) return false;
  out = j.get<double>();
  return true;
}

bool Decode(const Json& j, int& out, std::string& expected) {
  expected = "an integer";
  if (!j.is_number_integer()) return false;
  const std::int64_t v = j.get<std::int64_t>();
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) return false;
  out = static_cast<int>(v);
  return true;
}

bool Decode(const Json& j, std::int64_t& out, std::string& expected) {
  expected = "an integer";
  if (!j.is_number_integer()) return false;
  out = j.get<std::int64_t>();
  return true;
}

bool Decode(const Json& j, std::uint64_t& out, std::string& expected) {
  expected = "a non-negative integer";
  if (j.is_number_unsigned()) {
    out = j.get<std::uint64_t>();
    return true;
  }
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) {
    out = static_cast<std::uint64_t>(j.get<std::int64_t>());
    return true;
  }
  return false;
}

bool Decode(const Json& j, bool& out, std::string& expected) {
  expected = "a boolean";
  if (!j.is_boolean()) return false;
  out = j.get<bool>();
  return true;
}

bool Decode(const Json& j, Vec2& out, std::string& expected) {
  expected = "[x, y]";
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) return false;
  out = {j[0].get<double>(), j[1].get<double>()};
  return true;
}

bool Decode(const Json& j, Range& out, std::string& expected) {
  expected = "[min, max]";
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) return false;
  out = {j[0].get<double>(), j[1].get<double>()};
  return true;
}

bool Decode(const Json& j, std::array<int, 2>& out, std::string& expected) {
  expected = "[min, max] integers";
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() ||
      !j[1].is_number_integer()) {
    return false;
  }
  out = {j[0].get<int>(), j[1].get<int>()};
  return true;
}

bool Decode(const Json& j, std::array<double, 3>& out, std::string& expected) {
  expected = "three numbers";
  if (!j.is_array() || j.size() != 3) return false;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) return false;
    out[i] = j[i].get<double>();
  }
  return true;
}

bool Decode(const Json& j, std::vector<double>& out, std::string& expected) {
  expected = "an array of numbers";
  if (!j.is_array()) return false;
  std::vector<double> v;
  for (const Json& e : j) {
    if (!e.is_number()) return false;
    v.push_back(e.get<double>());
  }
  out = std::move(v);
  return true;
}

bool Decode(const Json& j, std::vector<int>& out, std::string& expected) {
  expected = "an array of integers";
  if (!j.is_array()) return false;
  std::vector<int> v;
  for (const Json& e : j) {
    if (!e.is_number_integer()) return false;
    v.push_back(e.get<int>());
  }
  out = std::move(v);
  return true;
}

bool Decode(const Json& j, std::vector<JointLimit>& out, std::string& expected) {
  expected = "an array of [min, max] pairs";
  if (!j.is_array()) return false;
  std::vector<JointLimit> v;
  for (const Json& e : j) {
    Range r;
    std::string unused;
    if (!Decode(e, r, unused)) return false;
    v.push_back({r.min, r.max});
  }
  out = std::move(v);
  return true;
}

bool Decode(const Json& j, EnvKind& out, std::string& expected) {
  expected = "one of \"corridor\", \"gap_train\", \"gap_test\"";
  if (!j.is_string()) return false;
  try {
    out = ParseEnvKind(j.get<std::string>());
  } catch (const std::invalid_argument&) {
    return false;
  }
  return true;
}

bool Decode(const Json& j, RewardVariant& out, std::string& expected) {
  expected = "\"baseline\" or \"clamping\"";
  if (!j.is_string()) return false;
  try {
    out = ParseRewardVariant(j.get<std::string>());
  } catch (const std::invalid_argument&) {
    return false;
  }
  return true;
}

// Walks one JSON object, recording unknown keys and type errors by path.
class Reader {
 public:
  Reader(const Json* object, std::string path, std::vector<std::string>* errors)
      : object_(object), path_(std::move(path)), errors_(errors) {
    if (object_ != nullptr && !object_->is_object()) {
      errors_->push_back(path_ + ": expected an object");
      object_ = nullptr;
    }
  }

  ~Reader() {
    if (object_ == nullptr) return;
    for (const auto& [key, unused] : object_->items()) {
      if (!seen_.contains(key)) errors_->push_back(Path(key) + ": unknown key");
    }
  }

  template <typename T>
  void Read(const std::string& key, T& out) {
    seen_.insert(key);
    if (object_ == nullptr || !object_->contains(key)) return;
    std::string expected;
    if (!Decode(object_->at(key), out, expected)) {
      errors_->push_back(Path(key) + ": expected " + expected);
    }
  }

  Reader Child(const std::string& key) {
    seen_.insert(key);
    const Json* child = nullptr;
    if (object_ != nullptr && object_->contains(key)) child = &object_->at(key);
    return Reader(child, Path(key), errors_);
  }

 private:
  std::string Path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const Json* object_;
  std::string path_;
  std::vector<std::string>* errors_;
  std::set<std::string> seen_;
};

Json Pair(double a, double b) { return Json::array({a, b}); }
Json ToJson(const Vec2& v) { return Pair(v.x, v.y); }
Json ToJson(const Range& r) { return Pair(r.min, r.max); }

void ReadRobot(Reader r, RobotConfig& c) {
  r.Read("base_radius", c.base_radius);
  r.Read("arm_mount_offset", c.arm_mount_offset);
  r.Read("link_lengths", c.link_lengths);
  r.Read("link_capsule_radius", c.link_capsule_radius);
  r.Read("joint_limits", c.joint_limits);
  r.Read("clamp_margin", c.clamp_margin);
  r.Read("max_joint_vel", c.max_joint_vel);
  r.Read("max_base_vel", c.max_base_vel);
  r.Read("max_joint_acc", c.max_joint_acc);
  r.Read("max_base_acc", c.max_base_acc);
  Reader l = r.Child("lidar");
  l.Read("beams", c.lidar.beams);
  l.Read("field_of_view", c.lidar.field_of_view);
  l.Read("max_range", c.lidar.max_range);
  l.Read("front_mount", c.lidar.front_mount);
  l.Read("rear_mount", c.lidar.rear_mount);
}

Json RobotJson(const RobotConfig& c) {
  Json limits = Json::array();
  for (const JointLimit& l : c.joint_limits) limits.push_back(Pair(l.min, l.max));
  Json j;
  j["base_radius"] = c.base_radius;
  j["arm_mount_offset"] = ToJson(c.arm_mount_offset);
  j["link_lengths"] = c.link_lengths;
  j["link_capsule_radius"] = c.link_capsule_radius;
  j["joint_limits"] = limits;
  j["clamp_margin"] = c.clamp_margin;
  j["max_joint_vel"] = c.max_joint_vel;
  j["max_base_vel"] = c.max_base_vel;
  j["max_joint_acc"] = c.max_joint_acc;
  j["max_base_acc"] = c.max_base_acc;
  j["lidar"] = {{"beams", c.lidar.beams},
                {"field_of_view", c.lidar.field_of_view},
                {"max_range", c.lidar.max_range},
                {"front_mount", ToJson(c.lidar.front_mount)},
                {"rear_mount", ToJson(c.lidar.rear_mount)}};
  return j;
}

void ReadEnv(Reader r, EnvSpec& e) {
  r.Read("kind", e.kind);
  r.Read("seed", e.seed);
  Reader c = r.Child("corridor");
  c.Read("length_range", e.corridor.length);
  c.Read("width_range", e.corridor.width);
  c.Read("obstacle_count_range", e.corridor.obstacle_count);
  c.Read("min_passage_width", e.corridor.min_passage_width);
  c.Read("goal_lateral_span", e.corridor.goal_lateral_span);
  Reader g = r.Child("gap");
  g.Read("train_width", e.gap.train_width);
  g.Read("train_length", e.gap.train_length);
  g.Read("width_range", e.gap.width);
  g.Read("length_range", e.gap.length);
  g.Read("goal_position_noise", e.gap.goal_position_noise);
  g.Read("goal_angle_noise", e.gap.goal_angle_noise);
  g.Read("joint_noise", e.gap.joint_noise);
  g.Read("spawn_distance", e.gap.spawn_distance);
}

Json EnvJson(const EnvSpec& e) {
  Json j;
  j["kind"] = std::string(ToString(e.kind));
  j["seed"] = e.seed;
  j["corridor"] = {{"length_range", ToJson(e.corridor.length)},
                   {"width_range", ToJson(e.corridor.width)},
                   {"obstacle_count_range", e.corridor.obstacle_count},
                   {"min_passage_width", e.corridor.min_passage_width},
                   {"goal_lateral_span", e.corridor.goal_lateral_span}};
  j["gap"] = {{"train_width", e.gap.train_width},
              {"train_length", e.gap.train_length},
              {"width_range", ToJson(e.gap.width)},
              {"length_range", ToJson(e.gap.length)},
              {"goal_position_noise", e.gap.goal_position_noise},
              {"goal_angle_noise", e.gap.goal_angle_noise},
              {"joint_noise", e.gap.joint_noise},
              {"spawn_distance", e.gap.spawn_distance}};
  return j;
}

void ReadEpisode(Reader r, EpisodeConfig& e) {
  r.Read("tolerance", e.tolerance);
  r.Read("hold_time", e.hold_time);
  r.Read("timeout", e.timeout);
  r.Read("step_time", e.step_time);
  r.Read("variant", e.variant);
  r.Read("check_orientation", e.check_orientation);
  r.Read("orientation_tolerance", e.orientation_tolerance);
}

Json EpisodeJson(const EpisodeConfig& e) {
  return {{"tolerance", e.tolerance},
          {"hold_time", e.hold_time},
          {"timeout", e.timeout},
          {"step_time", e.step_time},
          {"variant", std::string(ToString(e.variant))},
          {"check_orientation", e.check_orientation},
          {"orientation_tolerance", e.orientation_tolerance}};
}

void ReadReward(Reader r, RewardParams& p) {
  r.Read("w_t", p.w_t);
  r.Read("w_pd", p.w_pd);
  r.Read("w_pt", p.w_pt);
  r.Read("w_ht", p.w_ht);
  r.Read("w_hd", p.w_hd);
  r.Read("D_c", p.D_c);
  r.Read("D_h", p.D_h);
  r.Read("D_jl", p.D_jl);
  r.Read("w_sm", p.w_sm);
  r.Read("d_safe", p.d_safe);
}

Json RewardJson(const RewardParams& p) {
  return {{"w_t", p.w_t},   {"w_pd", p.w_pd}, {"w_pt", p.w_pt}, {"w_ht", p.w_ht},
          {"w_hd", p.w_hd}, {"D_c", p.D_c},   {"D_h", p.D_h},   {"D_jl", p.D_jl},
          {"w_sm", p.w_sm}, {"d_safe", p.d_safe}};
}

void ReadPathfield(Reader r, PathfieldConfig& p) {
  r.Read("cell_size", p.cell_size);
  r.Read("omega", p.solver.omega);
  r.Read("tolerance", p.solver.tolerance);
  r.Read("max_iterations", p.solver.max_iterations);
  r.Read("ratchet_progress", p.ratchet_progress);
}

Json PathfieldJson(const PathfieldConfig& p) {
  return {{"cell_size", p.cell_size},
          {"omega", p.solver.omega},
          {"tolerance", p.solver.tolerance},
          {"max_iterations", p.solver.max_iterations},
          {"ratchet_progress", p.ratchet_progress}};
}

void ReadAdr(Reader r, AdrParams& a) {
  r.Read("enabled", a.enabled);
  r.Read("min_tolerance", a.min_tolerance);
  r.Read("max_tolerance", a.max_tolerance);
  r.Read("initial_tolerance", a.initial_tolerance);
  r.Read("window", a.window);
  r.Read("success_high", a.success_high);
  r.Read("success_low", a.success_low);
  r.Read("step", a.step);
}

Json AdrJson(const AdrParams& a) {
  return {{"enabled", a.enabled},
          {"min_tolerance", a.min_tolerance},
          {"max_tolerance", a.max_tolerance},
          {"initial_tolerance", a.initial_tolerance},
          {"window", a.window},
          {"success_high", a.success_high},
          {"success_low", a.success_low},
          {"step", a.step}};
}

void ReadPolicy(Reader r, NetworkConfig& n) {
  r.Read("scan_hidden", n.scan_hidden);
  r.Read("scan_embed", n.scan_embed);
  r.Read("trunk_hidden", n.trunk_hidden);
  r.Read("bins", n.bins);
}

Json PolicyJson(const NetworkConfig& n) {
  return {{"scan_hidden", n.scan_hidden},
          {"scan_embed", n.scan_embed},
          {"trunk_hidden", n.trunk_hidden},
          {"bins", n.bins}};
}

void ReadTrain(Reader r, TrainConfig& t) {
  r.Read("clip_range", t.clip_range);
  r.Read("clip_range_vf", t.clip_range_vf);
  r.Read("epochs", t.epochs);
  r.Read("gamma", t.gamma);
  r.Read("n_steps", t.n_steps);
  r.Read("minibatches", t.minibatches);
  r.Read("workers", t.workers);
  r.Read("total_steps", t.total_steps);
  r.Read("gae_lambda", t.gae_lambda);
  r.Read("learning_rate", t.learning_rate);
  r.Read("linear_lr_decay", t.linear_lr_decay);
  r.Read("value_coef", t.value_coef);
  r.Read("entropy_coef", t.entropy_coef);
  r.Read("max_grad_norm", t.max_grad_norm);
  r.Read("adam_epsilon", t.adam_epsilon);
  r.Read("normalize_advantages", t.normalize_advantages);
  r.Read("seed", t.seed);
  r.Read("checkpoint_interval", t.checkpoint_interval);
}

Json TrainJson(const TrainConfig& t, bool for_hash) {
  Json j = {{"clip_range", t.clip_range},
            {"clip_range_vf", t.clip_range_vf},
            {"epochs", t.epochs},
            {"gamma", t.gamma},
            {"n_steps", t.n_steps},
            {"minibatches", t.minibatches},
            {"workers", t.workers}};
  if (!for_hash) j["total_steps"] = t.total_steps;
  j["gae_lambda"] = t.gae_lambda;
  j["learning_rate"] = t.learning_rate;
  j["linear_lr_decay"] = t.linear_lr_decay;
  j["value_coef"] = t.value_coef;
  j["entropy_coef"] = t.entropy_coef;
  j["max_grad_norm"] = t.max_grad_norm;
  j["adam_epsilon"] = t.adam_epsilon;
  j["normalize_advantages"] = t.normalize_advantages;
  j["seed"] = t.seed;
  if (!for_hash) j["checkpoint_interval"] = t.checkpoint_interval;
  return j;
}

void ReadEval(Reader r, EvalConfig& e) {
  r.Read("episodes", e.episodes);
  r.Read("seed", e.seed);
  r.Read("sample", e.sample);
}

Json EvalJson(const EvalConfig& e) {
  return {{"episodes", e.episodes}, {"seed", e.seed}, {"sample", e.sample}};
}

std::string JoinErrors(const std::vector<std::string>& errors) {
  std::string msg = "invalid configuration:";
  for (const std::string& e : errors) msg += "\n  " + e;
  return msg;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error(JoinErrors(errors)), errors_(std::move(errors)) {}

std::vector<std::string> RunConfig::Validate() const {
  std::vector<std::string> errors;
  for (const std::string& e : robot.Validate()) errors.push_back("robot." + e);
  for (const std::string& e : env.Validate(robot)) errors.push_back(e);
  for (const std::string& e : episode.Validate()) errors.push_back(e);
  if (!(reward.d_safe > 0.0)) errors.push_back("reward.d_safe: must be > 0");
  if (!(pathfield.cell_size > 0.0)) errors.push_back("pathfield.cell_size: must be > 0");
  if (!(pathfield.solver.omega > 0.0 && pathfield.solver.omega < 2.0)) {
    errors.push_back("pathfield.omega: must be in (0, 2)");
  }
  if (!(pathfield.solver.tolerance > 0.0)) errors.push_back("pathfield.tolerance: must be > 0");
  if (pathfield.solver.max_iterations < 1) {
    errors.push_back("pathfield.max_iterations: must be >= 1");
  }
  for (const std::string& e : adr.Validate()) errors.push_back(e);
  for (const std::string& e : network().Validate()) errors.push_back(e);
  for (const std::string& e : train.Validate()) errors.push_back(e);
  if (eval.episodes < 1) errors.push_back("eval.episodes: must be >= 1");
  return errors;
}

EpisodeSetup RunConfig::episode_setup() const { return {robot, episode, reward, pathfield}; }

AdrParams RunConfig::training_adr() const {
  AdrParams p = adr;
  if (!p.enabled) p.initial_tolerance = episode.tolerance;
  return p;
}

RunConfig ConfigFromJson(const Json& json) {
  RunConfig config;
  std::vector<std::string> errors;
  {
    Reader root(&json, "", &errors);
    ReadRobot(root.Child("robot"), config.robot);
    ReadEnv(root.Child("env"), config.env);
    ReadEpisode(root.Child("episode"), config.episode);
    ReadReward(root.Child("reward"), config.reward);
    ReadPathfield(root.Child("pathfield"), config.pathfield);
    ReadAdr(root.Child("adr"), config.adr);
    ReadPolicy(root.Child("policy"), config.policy);
    ReadTrain(root.Child("train"), config.train);
    ReadEval(root.Child("eval"), config.eval);
  }
  for (std::string& e : config.Validate()) errors.push_back(std::move(e));
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return config;
}

RunConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  Json json;
  try {
    json = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw std::runtime_error("cannot parse " + path + ": " + e.what());
  }
  return ConfigFromJson(json);
}

Json ConfigToJson(const RunConfig& c) {
  Json j;
  j["robot"] = RobotJson(c.robot);
  j["env"] = EnvJson(c.env);
  j["episode"] = EpisodeJson(c.episode);
  j["reward"] = RewardJson(c.reward);
  j["pathfield"] = PathfieldJson(c.pathfield);
  j["adr"] = AdrJson(c.adr);
  j["policy"] = PolicyJson(c.policy);
  j["train"] = TrainJson(c.train, /*for_hash=*/false);
  j["eval"] = EvalJson(c.eval);
  return j;
}

void SaveConfig(const std::string& path, const RunConfig& config) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << ConfigToJson(config).dump(2) << "\n";
}

std::uint64_t RunHash(const RunConfig& config) {
  Json j = ConfigToJson(config);
  j["train"] = TrainJson(config.train, /*for_hash=*/true);
  j.erase("eval");
  std::uint64_t hash = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char ch : j.dump()) {
    hash ^= ch;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

Json StateToJson(const RobotState& s) {
  return {{"base_pose", Json::array({s.base_pose.x, s.base_pose.y, s.base_pose.theta})},
          {"base_vel", s.base_vel},
          {"joint_pos", s.joint_pos},
          {"joint_vel", s.joint_vel}};
}

RobotState StateFromJson(const Json& j) {
  RobotState s;
  const auto pose = j.at("base_pose").get<std::array<double, 3>>();
  s.base_pose = {pose[0], pose[1], pose[2]};
  s.base_vel = j.at("base_vel").get<std::array<double, 3>>();
  s.joint_pos = j.at("joint_pos").get<std::vector<double>>();
  s.joint_vel = j.at("joint_vel").get<std::vector<double>>();
  return s;
}

Json WorldToJson(const WorldGeometry& w) {
  Json segments = Json::array();
  for (const Segment& s : w.segments) {
    segments.push_back(Json::array({s.a.x, s.a.y, s.b.x, s.b.y}));
  }
  Json boxes = Json::array();
  for (const Box& b : w.boxes) boxes.push_back(Json::array({b.lo.x, b.lo.y, b.hi.x, b.hi.y}));
  return {{"segments", segments},
          {"boxes", boxes},
          {"bounds", Json::array({w.bounds.lo.x, w.bounds.lo.y, w.bounds.hi.x, w.bounds.hi.y})}};
}

WorldGeometry WorldFromJson(const Json& j) {
  WorldGeometry w;
  for (const Json& s : j.at("segments")) {
    const auto v = s.get<std::array<double, 4>>();
    w.segments.push_back({{v[0], v[1]}, {v[2], v[3]}});
  }
  for (const Json& b : j.at("boxes")) {
    const auto v = b.get<std::array<double, 4>>();
    w.boxes.push_back({{v[0], v[1]}, {v[2], v[3]}});
  }
  const auto v = j.at("bounds").get<std::array<double, 4>>();
  w.bounds = {{v[0], v[1]}, {v[2], v[3]}};
  return w;
}

Json SceneToJson(const Scene& scene) {
  return {{"world", WorldToJson(scene.world)},
          {"start", StateToJson(scene.start)},
          {"goal", Json::array({scene.goal.x, scene.goal.y, scene.goal.theta})}};
}

Scene SceneFromJson(const Json& j) {
  Scene scene;
  scene.world = WorldFromJson(j.at("world"));
  scene.start = StateFromJson(j.at("start"));
  const auto g = j.at("goal").get<std::array<double, 3>>();
  scene.goal = {g[0], g[1], g[2]};
  return scene;
}

Json TermsToJson(const RewardTerms& t) {
  return {{"time", t.time},
          {"path_deviation", t.path_deviation},
          {"path_progress", t.path_progress},
          {"hold_time", t.hold_time},
          {"hold_distance", t.hold_distance},
          {"hold_refund", t.hold_refund},
          {"safety_margin", t.safety_margin},
          {"terminal", t.terminal}};
}

}  // namespace wbc
