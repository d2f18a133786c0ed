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

#include "wbc/harness.h"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace wbc {

std::uint64_t WorkerEnvSeed(const RunConfig& config, int worker) {
  return DeriveSeed(DeriveSeed(config.env.seed, config.train.seed),
                    static_cast<std::uint64_t>(worker));
}

EnvFactory TrainingEnvFactory(const RunConfig& config) {
  return [config](int worker) -> std::unique_ptr<RlEnvironment> {
    EnvSpec spec = config.env;
    spec.seed = WorkerEnvSeed(config, worker);
    return std::make_unique<ManipulatorEnvironment>(spec, config.episode_setup(),
                                                    config.network().bins);
  };
}

std::string DefaultOutputDir() {
  const char* env = std::getenv("WBC_OUT_DIR");
  return env != nullptr && *env != '\0' ? std::string(env) : std::string("wbc_out");
}

namespace {

std::string CheckpointName(int update) {
  std::ostringstream s;
  s << "checkpoint_" << std::setw(6) << std::setfill('0') << update << ".bin";
  return s.str();
}

std::ofstream OpenLog(const std::filesystem::path& path, bool append, const char* header) {
  const bool fresh = !append || !std::filesystem::exists(path);
  std::ofstream out(path, fresh ? std::ios::trunc : std::ios::app);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  if (fresh && header != nullptr) out << header << "\n";
  return out;
}

}  // namespace

TrainOutputs RunTraining(const RunConfig& config, const std::string& out_dir,
                         const std::string& resume_from, std::ostream* progress) {
  namespace fs = std::filesystem;
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  SaveConfig((dir / "config.json").string(), config);

  Trainer trainer(config.train, config.network(), config.training_adr(),
                  TrainingEnvFactory(config), RunHash(config));
  const bool resume = !resume_from.empty();
  if (resume) trainer.LoadCheckpoint(resume_from);

  std::ofstream metrics = OpenLog(
      dir / "metrics.csv", resume,
      "step,worker,episode_return,length,termination,tolerance,goal_distance");
  std::ofstream adr = OpenLog(dir / "adr.csv", resume, "step,tolerance");
  std::ofstream updates = OpenLog(dir / "updates.jsonl", resume, nullptr);
  metrics << std::setprecision(17);
  adr << std::setprecision(17);

  int episodes = 0;
  int successes = 0;
  trainer.on_episode = [&](const EpisodeRecord& r) {
    metrics << r.step << "," << r.worker << "," << r.episode_return << "," << r.length << ","
            << ToString(r.termination) << "," << r.tolerance << "," << r.goal_distance << "\n";
    adr << r.step << "," << r.next_tolerance << "\n";
    ++episodes;
    if (r.termination == Termination::kSuccess) ++successes;
  };

  TrainOutputs result;
  while (!trainer.done()) {
    episodes = 0;
    successes = 0;
    const UpdateStats s = trainer.Iterate();
    Json j;
    j["update"] = s.update;
    j["steps"] = s.steps;
    j["learning_rate"] = s.learning_rate;
    j["policy_loss"] = s.policy_loss;
    j["value_loss"] = s.value_loss;
    j["entropy"] = s.entropy;
    j["clip_fraction"] = s.clip_fraction;
    j["mean_ratio"] = s.mean_ratio;
    j["approx_kl"] = s.approx_kl;
    j["grad_norm"] = s.grad_norm;
    j["explained_variance"] = s.explained_variance;
    j["episodes"] = episodes;
    j["success_rate"] = episodes > 0 ? static_cast<double>(successes) / episodes : 0.0;
    j["tolerance"] = trainer.adr_state().tolerance;
    updates << j.dump() << "\n";
    metrics.flush();
    adr.flush();
    updates.flush();
    if (progress != nullptr) {
      *progress << "update " << s.update << "  steps " << s.steps << "  episodes " << episodes
                << "  success " << std::fixed << std::setprecision(2)
                << j["success_rate"].get<double>() << "  tolerance "
                << trainer.adr_state().tolerance << "  entropy " << s.entropy << std::defaultfloat
                << std::endl;
    }
    const int interval = config.train.checkpoint_interval;
    if (interval > 0 && s.update % interval == 0) {
      trainer.SaveCheckpoint((dir / CheckpointName(s.update)).string());
    }
  }
  result.final_checkpoint = (dir / "checkpoint_final.bin").string();
  trainer.SaveCheckpoint(result.final_checkpoint);
  result.steps = trainer.steps();
  result.updates = trainer.updates();
  result.tolerance = trainer.adr_state().tolerance;
  return result;
}

}  // namespace wbc
