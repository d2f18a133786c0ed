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

// Command-line entry point: train, eval, inspect-env, hpf-dump, render.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "wbc/config.h"
#include "wbc/eval.h"
#include "wbc/harness.h"
#include "wbc/render.h"

namespace {

namespace fs = std::filesystem;
using namespace wbc;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void AddCommon(CLI::App* cmd, CommonFlags& flags, const std::string& seed_help) {
  cmd->add_option("--config", flags.config, "JSON configuration file (defaults if omitted)");
  cmd->add_option("--seed", flags.seed, seed_help);
  cmd->add_option("--out", flags.out, "output directory (default: $WBC_OUT_DIR or wbc_out)");
}

RunConfig LoadOrDefault(const CommonFlags& flags) {
  return flags.config.empty() ? ConfigFromJson(Json::object()) : LoadConfig(flags.config);
}

fs::path OutDir(const CommonFlags& flags) {
  const fs::path dir = flags.out.empty() ? fs::path(DefaultOutputDir()) : fs::path(flags.out);
  fs::create_directories(dir);
  return dir;
}

int Train(const CommonFlags& flags, const std::string& resume,
          std::optional<std::int64_t> total_steps) {
  RunConfig config = LoadOrDefault(flags);
  if (flags.seed) config.train.seed = *flags.seed;
  if (total_steps) config.train.total_steps = *total_steps;
  if (std::vector<std::string> errors = config.Validate(); !errors.empty()) {
    throw ConfigError(errors);
  }
  const TrainOutputs out = RunTraining(config, OutDir(flags).string(), resume, &std::cout);
  std::cout << "trained " << out.steps << " steps in " << out.updates << " updates; final tolerance "
            << out.tolerance << "\ncheckpoint: " << out.final_checkpoint << "\n";
  return 0;
}

int Eval(const CommonFlags& flags, const std::string& checkpoint, const std::string& controller,
         std::optional<double> tolerance, std::optional<int> episodes, bool sample) {
  const RunConfig config = LoadOrDefault(flags);
  EvalOptions options;
  options.episodes = episodes.value_or(config.eval.episodes);
  options.seed = flags.seed.value_or(config.eval.seed);
  options.tolerance = tolerance.value_or(config.episode.tolerance);
  const fs::path dir = OutDir(flags);
  std::ofstream log(dir / "episodes.jsonl", std::ios::trunc);
  if (!log) throw std::runtime_error("cannot write " + (dir / "episodes.jsonl").string());
  options.log = &log;

  EvalReport report;
  if (controller == "policy") {
    if (checkpoint.empty()) throw CLI::ValidationError("--checkpoint", "required for the policy controller");
    report = EvaluateCheckpoint(config, checkpoint, sample || config.eval.sample, options);
  } else if (controller == "scripted") {
    report = Evaluate(
        config,
        [&] { return std::make_unique<ScriptedController>(config.robot, config.episode.step_time); },
        options);
  } else {
    report = Evaluate(config, [&] { return std::make_unique<ZeroController>(config.robot); },
                      options);
  }
  const std::string table = report.ToTable();
  std::cout << table;
  WriteFile((dir / "eval_report.txt").string(), table);
  WriteFile((dir / "eval_report.json").string(), report.ToJson().dump(2) + "\n");
  return 0;
}

Scene SceneForSeed(const RunConfig& config, const CommonFlags& flags) {
  return GenerateScene(config.env, config.robot, config.pathfield,
                       flags.seed.value_or(config.env.seed));
}

int InspectEnv(const CommonFlags& flags) {
  const RunConfig config = LoadOrDefault(flags);
  Scene scene = SceneForSeed(config, flags);
  const Episode episode(config.episode_setup(), scene, config.episode.tolerance);
  const fs::path dir = OutDir(flags);
  const Box& b = scene.world.bounds;
  std::cout << "kind            " << ToString(config.env.kind) << "\n"
            << "bounds          [" << b.lo.x << ", " << b.hi.x << "] x [" << b.lo.y << ", "
            << b.hi.y << "]\n"
            << "walls           " << scene.world.segments.size() << "\n"
            << "boxes           " << scene.world.boxes.size() << "\n"
            << "start           (" << scene.start.base_pose.x << ", " << scene.start.base_pose.y
            << ", " << scene.start.base_pose.theta << ")\n"
            << "goal            (" << scene.goal.x << ", " << scene.goal.y << ", "
            << scene.goal.theta << ")\n"
            << "ee path length  " << episode.path().total_length() << "\n"
            << "min clearance   " << MinClearance(config.robot, scene.start, scene.world) << "\n";
  WriteFile((dir / "scene.json").string(), SceneToJson(scene).dump(2) + "\n");
  const std::vector<RobotState> states{scene.start};
  WriteFile((dir / "scene.svg").string(),
            RenderSvg(config.robot, scene, config.episode.tolerance, episode.path().points,
                      states, RenderOptions{}));
  std::cout << "wrote " << (dir / "scene.json").string() << " and "
            << (dir / "scene.svg").string() << "\n";
  return 0;
}

int HpfDump(const CommonFlags& flags) {
  const RunConfig config = LoadOrDefault(flags);
  const Scene scene = SceneForSeed(config, flags);
  GridField field = RasterizeWorld(scene.world, config.pathfield.cell_size,
                                   config.robot.link_capsule_radius, scene.goal.position());
  HarmonicSolveStats stats;
  field = SolveHarmonic(std::move(field), config.pathfield.solver, &stats);
  const Vec2 ee = ForwardKinematics(config.robot, scene.start).end_effector.position();
  const PathPolyline path = ExtractPath(field, ee);
  const fs::path dir = OutDir(flags);
  WriteFile((dir / "field.pgm").string(), FieldToPgm(field));
  WriteFile((dir / "path.json").string(), PathToJson(path).dump(2) + "\n");
  std::cout << "grid " << field.width << " x " << field.height << ", " << stats.iterations
            << " SOR sweeps, residual " << stats.residual << ", path length "
            << path.total_length() << "\nwrote " << (dir / "field.pgm").string() << " and "
            << (dir / "path.json").string() << "\n";
  return 0;
}

int Render(const CommonFlags& flags, const std::string& log_path, int episode_index, bool lidar) {
  const RunConfig config = LoadOrDefault(flags);
  RenderOptions options;
  options.lidar = lidar;
  const fs::path dir = OutDir(flags);
  std::string svg;
  if (log_path.empty()) {
    const Scene scene = SceneForSeed(config, flags);
    const Episode episode(config.episode_setup(), scene, config.episode.tolerance);
    const std::vector<RobotState> states{scene.start};
    svg = RenderSvg(config.robot, scene, config.episode.tolerance, episode.path().points, states,
                    options);
  } else {
    const std::vector<EpisodeTrace> traces = ReadEpisodeLog(log_path);
    const EpisodeTrace* trace = nullptr;
    for (const EpisodeTrace& t : traces) {
      if (t.index == episode_index) trace = &t;
    }
    if (trace == nullptr) {
      throw std::runtime_error("episode " + std::to_string(episode_index) + " not in " + log_path);
    }
    svg = RenderSvg(config.robot, trace->scene, trace->tolerance, trace->path, trace->states,
                    options);
  }
  const fs::path file = dir / "render.svg";
  WriteFile(file.string(), svg);
  std::cout << "wrote " << file.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Planar mobile-manipulator whole-body control: training, evaluation, inspection"};
  app.require_subcommand(1);

  CommonFlags train_flags;
  std::string resume;
  std::optional<std::int64_t> total_steps;
  CLI::App* train = app.add_subcommand("train", "train a PPO policy");
  AddCommon(train, train_flags, "training seed (overrides train.seed)");
  train->add_option("--resume", resume, "checkpoint to resume from");
  train->add_option("--total-steps", total_steps, "override train.total_steps");

  CommonFlags eval_flags;
  std::string checkpoint;
  std::string controller = "policy";
  std::optional<double> tolerance;
  std::optional<int> episodes;
  bool sample = false;
  CLI::App* eval = app.add_subcommand("eval", "evaluate success rate at a fixed tolerance");
  AddCommon(eval, eval_flags, "evaluation seed (overrides eval.seed)");
  eval->add_option("--checkpoint", checkpoint, "policy checkpoint");
  eval->add_option("--controller", controller, "policy, scripted, or zero")
      ->check(CLI::IsMember({"policy", "scripted", "zero"}));
  eval->add_option("--tolerance", tolerance, "goal tolerance d_h in m (default episode.tolerance)");
  eval->add_option("--episodes", episodes, "number of episodes (default eval.episodes)");
  eval->add_flag("--sample", sample, "sample actions instead of taking the argmax");

  CommonFlags inspect_flags;
  CLI::App* inspect = app.add_subcommand("inspect-env", "generate one scene and summarize it");
  AddCommon(inspect, inspect_flags, "scene seed (overrides env.seed)");

  CommonFlags hpf_flags;
  CLI::App* hpf = app.add_subcommand("hpf-dump", "solve the path field of one scene");
  AddCommon(hpf, hpf_flags, "scene seed (overrides env.seed)");

  CommonFlags render_flags;
  std::string log_path;
  int episode_index = 0;
  bool lidar = false;
  CLI::App* render = app.add_subcommand("render", "render a scene or a logged episode to SVG");
  AddCommon(render, render_flags, "scene seed when no log is given");
  render->add_option("--log", log_path, "JSONL episode log written by eval");
  render->add_option("--episode", episode_index, "episode index within the log");
  render->add_flag("--lidar", lidar, "draw LIDAR rays at the final state");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*train) return Train(train_flags, resume, total_steps);
    if (*eval) return Eval(eval_flags, checkpoint, controller, tolerance, episodes, sample);
    if (*inspect) return InspectEnv(inspect_flags);
    if (*hpf) return HpfDump(hpf_flags);
    if (*render) return Render(render_flags, log_path, episode_index, lidar);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
