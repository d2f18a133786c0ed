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

#ifndef WBC_PPO_H_
#define WBC_PPO_H_

#include <condition_variable>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "wbc/adr.h"
#include "wbc/env.h"
#include "wbc/policy.h"
#include "wbc/reward.h"

namespace wbc {

struct TrainConfig {
  double clip_range = 0.2;
  double clip_range_vf = -1.0;  // <= 0 disables value clipping
  int epochs = 30;
  double gamma = 0.999;
  int n_steps = 2048;  // per worker per update
  int minibatches = 8;
  int workers = 4;
  std::int64_t total_steps = 1'000'000;
  double gae_lambda = 0.95;
  double learning_rate = 3e-4;
  bool linear_lr_decay = false;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  double max_grad_norm = 0.5;  // <= 0 disables clipping
  double adam_epsilon = 1e-5;
  bool normalize_advantages = true;
  std::uint64_t seed = 0;
  int checkpoint_interval = 10;  // updates; 0 keeps only the final checkpoint

  std::int64_t rollout_size() const { return static_cast<std::int64_t>(workers) * n_steps; }
  std::vector<std::string> Validate() const;
};

// --- Environments -----------------------------------------------------------

struct EnvTransition {
  std::vector<double> observation;
  double reward = 0.0;
  Termination termination = Termination::kNone;
  double goal_distance = 0.0;
};

// Enough to rebuild an environment mid-episode: which episode is running, at
// which tolerance, and the actions applied so far.
struct EnvSnapshot {
  std::uint64_t episode_index = 0;
  double tolerance = 0.0;
  std::vector<int> actions;  // flattened bins

  bool operator==(const EnvSnapshot&) const = default;
};

class RlEnvironment {
 public:
  virtual ~RlEnvironment() = default;

  virtual int observation_size() const = 0;
  virtual int action_dims() const = 0;
  virtual std::vector<double> Reset(double tolerance) = 0;
  virtual EnvTransition Step(std::span<const int> bins) = 0;
  virtual EnvSnapshot Snapshot() const = 0;
  // Returns the observation of the restored state.
  virtual std::vector<double> Restore(const EnvSnapshot& snapshot) = 0;
};

// Goal-reaching episodes on procedurally generated scenes. Episode k uses the
// scene seed DeriveSeed(spec.seed, k).
class ManipulatorEnvironment : public RlEnvironment {
 public:
  ManipulatorEnvironment(EnvSpec spec, EpisodeSetup setup, int bins);

  int observation_size() const override;
  int action_dims() const override;
  std::vector<double> Reset(double tolerance) override;
  EnvTransition Step(std::span<const int> bins) override;
  EnvSnapshot Snapshot() const override;
  std::vector<double> Restore(const EnvSnapshot& snapshot) override;

  const Episode* episode() const { return episode_.get(); }

 private:
  void StartEpisode(std::uint64_t index, double tolerance);

  EnvSpec spec_;
  EpisodeSetup setup_;
  int bins_;
  std::uint64_t next_episode_ = 0;
  EnvSnapshot current_;
  std::unique_ptr<Episode> episode_;
};

using EnvFactory = std::function<std::unique_ptr<RlEnvironment>(int worker)>;

// --- Rollouts and GAE -------------------------------------------------------

// Worker-major storage: transition t of worker w lives at row w * n_steps + t.
struct RolloutBuffer {
  int workers = 0;
  int n_steps = 0;
  int action_dims = 0;
  RowMatrix observations;
  std::vector<int> bins;  // row-major, action_dims per transition
  std::vector<double> log_probs;
  std::vector<double> values;
  std::vector<double> rewards;
  std::vector<std::uint8_t> dones;
  std::vector<Termination> terminations;
  std::vector<double> bootstrap_values;  // per worker, V(s_n)
  std::vector<double> advantages;
  std::vector<double> returns;

  std::size_t size() const { return rewards.size(); }
  std::size_t Index(int worker, int t) const {
    return static_cast<std::size_t>(worker) * n_steps + t;
  }
};

// Fills advantages and returns. A done transition does not bootstrap; the last
// transition of each worker bootstraps from bootstrap_values unless done.
void ComputeGae(RolloutBuffer& buffer, double gamma, double lambda);

// Zero mean, unit variance. Leaves a constant vector centered at 0.
std::vector<double> NormalizeAdvantages(std::span<const double> advantages);

// --- Loss and optimizer -----------------------------------------------------

struct PpoBatch {
  RowMatrix observations;
  std::vector<int> bins;
  std::vector<double> old_log_probs;
  std::vector<double> old_values;
  std::vector<double> advantages;  // already normalized if requested
  std::vector<double> returns;
};

struct PpoLoss {
  double total = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double mean_ratio = 0.0;
  double approx_kl = 0.0;
  std::vector<double> gradient;  // empty unless requested
};

PpoLoss ComputePpoLoss(const NetworkParams& params, const PpoBatch& batch,
                       const TrainConfig& config, bool with_gradient);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t t = 0;

  bool operator==(const AdamState&) const = default;
};

AdamState InitialAdamState(std::size_t size);
void AdamStep(std::vector<double>& params, std::span<const double> grad, AdamState& state,
              double learning_rate, double epsilon);
// Scales grad in place so its L2 norm is at most max_norm; returns the norm
// before scaling.
double ClipGradNorm(std::vector<double>& grad, double max_norm);

struct UpdateStats {
  int update = 0;
  std::int64_t steps = 0;
  double learning_rate = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double mean_ratio = 0.0;
  double approx_kl = 0.0;
  double grad_norm = 0.0;
  double explained_variance = 0.0;
};

// Runs config.epochs passes of config.minibatches shuffled minibatches.
// Throws std::runtime_error on a non-finite loss.
UpdateStats PpoUpdate(NetworkParams& params, AdamState& adam, const RolloutBuffer& buffer,
                      const TrainConfig& config, double learning_rate, std::mt19937_64& rng);

// --- Training loop ----------------------------------------------------------

// Runs a function over [0, n) on a fixed set of threads; n == 1 runs inline.
class WorkerPool {
 public:
  explicit WorkerPool(int threads);
  ~WorkerPool();
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  // Exceptions are rethrown on the caller, lowest index first.
  void Run(int n, const std::function<void(int)>& fn);

 private:
  void Loop();

  std::vector<std::thread> threads_;
  std::mutex mu_;
  std::condition_variable work_cv_;
  std::condition_variable done_cv_;
  const std::function<void(int)>* fn_ = nullptr;
  int n_ = 0;
  int next_ = 0;
  int pending_ = 0;
  std::uint64_t generation_ = 0;
  bool stop_ = false;
  std::vector<std::exception_ptr> errors_;
};

struct EpisodeRecord {
  std::int64_t step = 0;  // global environment steps when the episode ended
  int worker = 0;
  double episode_return = 0.0;
  int length = 0;
  Termination termination = Termination::kNone;
  double tolerance = 0.0;  // tolerance the episode was run at
  double next_tolerance = 0.0;  // ADR tolerance after the report
  double goal_distance = 0.0;
};

class Trainer {
 public:
  // run_hash identifies the configuration for resume compatibility.
  Trainer(TrainConfig config, NetworkConfig network, AdrParams adr, EnvFactory factory,
          std::uint64_t run_hash);

  // Collects one rollout with the current parameters.
  RolloutBuffer CollectRollouts();
  // One collect / GAE / update cycle.
  UpdateStats Iterate();
  bool done() const { return steps_ >= config_.total_steps; }

  void SaveCheckpoint(const std::string& path) const;
  void WriteCheckpoint(std::ostream& out) const;
  // Restores parameters, optimizer, curriculum, RNG, and environment state.
  void LoadCheckpoint(const std::string& path);
  void ReadCheckpoint(std::istream& in);

  std::function<void(const EpisodeRecord&)> on_episode;

  const NetworkParams& params() const { return params_; }
  const AdamState& adam() const { return adam_; }
  AdrState adr_state() const { return adr_.snapshot(); }
  std::int64_t steps() const { return steps_; }
  int updates() const { return updates_; }
  const TrainConfig& config() const { return config_; }

 private:
  struct Worker {
    std::unique_ptr<RlEnvironment> env;
    std::mt19937_64 rng;
    std::vector<double> observation;
    double episode_return = 0.0;
    int episode_length = 0;
    double tolerance = 0.0;
  };

  double CurrentLearningRate() const;

  TrainConfig config_;
  std::uint64_t run_hash_;
  NetworkParams params_;
  AdamState adam_;
  AdrController adr_;
  std::mt19937_64 update_rng_;
  std::vector<Worker> workers_;
  std::unique_ptr<WorkerPool> pool_;
  std::int64_t steps_ = 0;
  int updates_ = 0;
};

}  // namespace wbc

#endif  // WBC_PPO_H_
