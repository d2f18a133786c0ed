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

#include "wbc/ppo.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace wbc {

std::vector<std::string> TrainConfig::Validate() const {
  std::vector<std::string> errors;
  auto fail = [&errors](const std::string& field, const std::string& what) {
    errors.push_back("train." + field + ": " + what);
  };
  if (!(clip_range > 0.0 && clip_range < 1.0)) fail("clip_range", "must be in (0, 1)");
  if (!std::isfinite(clip_range_vf)) fail("clip_range_vf", "must be finite");
  if (epochs < 1) fail("epochs", "must be >= 1");
  if (!(gamma > 0.0 && gamma <= 1.0)) fail("gamma", "must be in (0, 1]");
  if (n_steps < 1) fail("n_steps", "must be >= 1");
  if (minibatches < 1) fail("minibatches", "must be >= 1");
  if (workers < 1) fail("workers", "must be >= 1");
  if (n_steps >= 1 && workers >= 1 && minibatches >= 1 && rollout_size() % minibatches != 0) {
    fail("minibatches", "must divide workers * n_steps (" + std::to_string(rollout_size()) + ")");
  }
  if (total_steps < 1) fail("total_steps", "must be >= 1");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) fail("gae_lambda", "must be in [0, 1]");
  if (!(learning_rate > 0.0 && std::isfinite(learning_rate))) fail("learning_rate", "must be > 0");
  if (!(value_coef >= 0.0)) fail("value_coef", "must be >= 0");
  if (!(entropy_coef >= 0.0)) fail("entropy_coef", "must be >= 0");
  if (!std::isfinite(max_grad_norm)) fail("max_grad_norm", "must be finite");
  if (!(adam_epsilon > 0.0)) fail("adam_epsilon", "must be > 0");
  if (checkpoint_interval < 0) fail("checkpoint_interval", "must be >= 0");
  return errors;
}

// --- ManipulatorEnvironment --------------------------------------------------

ManipulatorEnvironment::ManipulatorEnvironment(EnvSpec spec, EpisodeSetup setup, int bins)
    : spec_(std::move(spec)), setup_(std::move(setup)), bins_(bins) {
  if (bins_ < 2) throw std::invalid_argument("need at least two action bins");
}

int ManipulatorEnvironment::observation_size() const {
  return Observation::FlatSize(setup_.robot);
}

int ManipulatorEnvironment::action_dims() const { return 3 + setup_.robot.num_joints(); }

void ManipulatorEnvironment::StartEpisode(std::uint64_t index, double tolerance) {
  Scene scene = GenerateScene(spec_, setup_.robot, setup_.pathfield, DeriveSeed(spec_.seed, index));
  episode_ = std::make_unique<Episode>(setup_, std::move(scene), tolerance);
  current_ = EnvSnapshot{index, tolerance, {}};
}

std::vector<double> ManipulatorEnvironment::Reset(double tolerance) {
  StartEpisode(next_episode_++, tolerance);
  return episode_->observation().Flatten();
}

EnvTransition ManipulatorEnvironment::Step(std::span<const int> bins) {
  if (episode_ == nullptr || episode_->terminated()) {
    throw std::logic_error("step called without an active episode");
  }
  const Action action = BinsToAction(setup_.robot, bins, bins_);
  StepOutcome out = episode_->Step(action);
  current_.actions.insert(current_.actions.end(), bins.begin(), bins.end());
  return {out.observation.Flatten(), out.reward, out.terminated, out.info.goal_distance};
}

EnvSnapshot ManipulatorEnvironment::Snapshot() const { return current_; }

std::vector<double> ManipulatorEnvironment::Restore(const EnvSnapshot& snapshot) {
  const int dims = action_dims();
  if (snapshot.actions.size() % dims != 0) {
    throw std::invalid_argument("snapshot action log does not match action dimensions");
  }
  StartEpisode(snapshot.episode_index, snapshot.tolerance);
  next_episode_ = snapshot.episode_index + 1;
  std::span<const int> actions(snapshot.actions);
  for (size_t i = 0; i < actions.size(); i += dims) {
    if (episode_->terminated()) throw std::runtime_error("snapshot replays past episode end");
    Step(actions.subspan(i, dims));
  }
  return episode_->observation().Flatten();
}

// --- GAE ---------------------------------------------------------------------

void ComputeGae(RolloutBuffer& buffer, double gamma, double lambda) {
  const size_t n = buffer.size();
  if (buffer.values.size() != n || buffer.dones.size() != n ||
      buffer.bootstrap_values.size() != static_cast<size_t>(buffer.workers) ||
      static_cast<size_t>(buffer.workers) * buffer.n_steps != n) {
    throw std::invalid_argument("inconsistent rollout buffer");
  }
  buffer.advantages.assign(n, 0.0);
  buffer.returns.assign(n, 0.0);
  for (int w = 0; w < buffer.workers; ++w) {
    double next_value = buffer.bootstrap_values[w];
    double running = 0.0;
    for (int t = buffer.n_steps - 1; t >= 0; --t) {
      const size_t i = buffer.Index(w, t);
      const double live = buffer.dones[i] ? 0.0 : 1.0;
      const double delta = buffer.rewards[i] + gamma * next_value * live - buffer.values[i];
      running = delta + gamma * lambda * live * running;
      buffer.advantages[i] = running;
      buffer.returns[i] = running + buffer.values[i];
      next_value = buffer.values[i];
    }
  }
}

std::vector<double> NormalizeAdvantages(std::span<const double> advantages) {
  std::vector<double> out(advantages.begin(), advantages.end());
  if (out.empty()) return out;
  const double mean = std::accumulate(out.begin(), out.end(), 0.0) / out.size();
  double var = 0.0;
  for (double a : out) var += (a - mean) * (a - mean);
  var /= out.size();
  const double scale = var > 0.0 ? 1.0 / std::sqrt(var) : 0.0;
  for (double& a : out) a = (a - mean) * scale;
  return out;
}

// --- Loss --------------------------------------------------------------------

PpoLoss ComputePpoLoss(const NetworkParams& params, const PpoBatch& batch,
                       const TrainConfig& config, bool with_gradient) {
  const NetworkConfig& net = params.config;
  const Eigen::Index m = batch.observations.rows();
  const int dims = net.action_dims;
  const int nb = net.bins;
  if (m == 0 || batch.bins.size() != static_cast<size_t>(m) * dims ||
      batch.old_log_probs.size() != static_cast<size_t>(m) ||
      batch.old_values.size() != static_cast<size_t>(m) ||
      batch.advantages.size() != static_cast<size_t>(m) ||
      batch.returns.size() != static_cast<size_t>(m)) {
    throw std::invalid_argument("inconsistent PPO batch");
  }
  ForwardTape tape;
  const PolicyBatchOutput out = tape.Forward(params, batch.observations);

  RowMatrix d_logits = RowMatrix::Zero(m, net.logits_size());
  Eigen::VectorXd d_value = Eigen::VectorXd::Zero(m);
  const double inv_m = 1.0 / static_cast<double>(m);
  const double eps = config.clip_range;
  PpoLoss loss;
  std::vector<double> log_p(nb);
  for (Eigen::Index i = 0; i < m; ++i) {
    double logp = 0.0;
    double entropy = 0.0;
    for (int d = 0; d < dims; ++d) {
      const double* z = out.logits.data() + i * net.logits_size() + d * nb;
      const double zmax = *std::max_element(z, z + nb);
      double sum = 0.0;
      for (int k = 0; k < nb; ++k) sum += std::exp(z[k] - zmax);
      const double log_z = zmax + std::log(sum);
      for (int k = 0; k < nb; ++k) {
        log_p[k] = z[k] - log_z;
        entropy -= std::exp(log_p[k]) * log_p[k];
      }
      logp += log_p[batch.bins[i * dims + d]];
    }
    const double adv = batch.advantages[i];
    const double ratio = std::exp(logp - batch.old_log_probs[i]);
    const double surr1 = ratio * adv;
    const double surr2 = std::clamp(ratio, 1.0 - eps, 1.0 + eps) * adv;
    const bool unclipped = surr1 <= surr2;
    loss.policy_loss -= std::min(surr1, surr2);
    loss.entropy += entropy;
    loss.mean_ratio += ratio;
    loss.approx_kl += (ratio - 1.0) - (logp - batch.old_log_probs[i]);
    if (std::abs(ratio - 1.0) > eps) loss.clip_fraction += 1.0;

    const double v = out.value(i);
    const double err = v - batch.returns[i];
    double v_grad = 2.0 * err;
    double v_loss = err * err;
    if (config.clip_range_vf > 0.0) {
      const double dv = v - batch.old_values[i];
      const double vc = batch.old_values[i] + std::clamp(dv, -config.clip_range_vf, config.clip_range_vf);
      const double errc = vc - batch.returns[i];
      if (errc * errc > v_loss) {
        v_loss = errc * errc;
        v_grad = std::abs(dv) < config.clip_range_vf ? 2.0 * errc : 0.0;
      }
    }
    loss.value_loss += v_loss;
    if (!with_gradient) continue;

    d_value(i) = config.value_coef * v_grad * inv_m;
    // d(policy term)/d logp; zero when the clipped branch is active.
    const double g_logp = unclipped ? -ratio * adv * inv_m : 0.0;
    for (int d = 0; d < dims; ++d) {
      const double* z = out.logits.data() + i * net.logits_size() + d * nb;
      const double zmax = *std::max_element(z, z + nb);
      double sum = 0.0;
      for (int k = 0; k < nb; ++k) sum += std::exp(z[k] - zmax);
      const double log_z = zmax + std::log(sum);
      double h = 0.0;
      for (int k = 0; k < nb; ++k) {
        log_p[k] = z[k] - log_z;
        h -= std::exp(log_p[k]) * log_p[k];
      }
      const int chosen = batch.bins[i * dims + d];
      double* g = d_logits.data() + i * net.logits_size() + d * nb;
      for (int k = 0; k < nb; ++k) {
        const double p = std::exp(log_p[k]);
        const double d_logp = (k == chosen ? 1.0 : 0.0) - p;
        const double d_entropy = -p * (log_p[k] + h);
        g[k] = g_logp * d_logp - config.entropy_coef * inv_m * d_entropy;
      }
    }
  }
  loss.policy_loss *= inv_m;
  loss.value_loss *= inv_m;
  loss.entropy *= inv_m;
  loss.mean_ratio *= inv_m;
  loss.approx_kl *= inv_m;
  loss.clip_fraction *= inv_m;
  loss.total = loss.policy_loss + config.value_coef * loss.value_loss -
               config.entropy_coef * loss.entropy;
  if (with_gradient) loss.gradient = tape.Backward(params, d_logits, d_value);
  return loss;
}

// --- Optimizer ---------------------------------------------------------------

AdamState InitialAdamState(std::size_t size) {
  return {std::vector<double>(size, 0.0), std::vector<double>(size, 0.0), 0};
}

void AdamStep(std::vector<double>& params, std::span<const double> grad, AdamState& state,
              double learning_rate, double epsilon) {
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  if (grad.size() != params.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw std::invalid_argument("optimizer state does not match parameters");
  }
  ++state.t;
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(state.t));
  for (size_t i = 0; i < params.size(); ++i) {
    state.m[i] = kBeta1 * state.m[i] + (1.0 - kBeta1) * grad[i];
    state.v[i] = kBeta2 * state.v[i] + (1.0 - kBeta2) * grad[i] * grad[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + epsilon);
  }
}

double ClipGradNorm(std::vector<double>& grad, double max_norm) {
  double sq = 0.0;
  for (double g : grad) sq += g * g;
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / (norm + 1e-6);
    for (double& g : grad) g *= scale;
  }
  return norm;
}

namespace {

// Fisher-Yates with the portable integer draw.
std::vector<size_t> Permutation(size_t n, std::mt19937_64& rng) {
  std::vector<size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (size_t i = n; i > 1; --i) {
    const size_t j = static_cast<size_t>(UniformInt(rng, 0, static_cast<int>(i) - 1));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

double ExplainedVariance(std::span<const double> values, std::span<const double> returns) {
  const size_t n = values.size();
  if (n == 0) return 0.0;
  double mr = 0.0, md = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mr += returns[i];
    md += returns[i] - values[i];
  }
  mr /= n;
  md /= n;
  double vr = 0.0, vd = 0.0;
  for (size_t i = 0; i < n; ++i) {
    vr += (returns[i] - mr) * (returns[i] - mr);
    const double d = returns[i] - values[i] - md;
    vd += d * d;
  }
  return vr > 0.0 ? 1.0 - vd / vr : 0.0;
}

}  // namespace

UpdateStats PpoUpdate(NetworkParams& params, AdamState& adam, const RolloutBuffer& buffer,
                      const TrainConfig& config, double learning_rate, std::mt19937_64& rng) {
  const size_t n = buffer.size();
  if (buffer.advantages.size() != n || buffer.returns.size() != n) {
    throw std::invalid_argument("advantages not computed");
  }
  if (n % config.minibatches != 0) {
    throw std::invalid_argument("minibatch count must divide the rollout size");
  }
  const std::vector<double> adv = config.normalize_advantages
                                      ? NormalizeAdvantages(buffer.advantages)
                                      : buffer.advantages;
  const size_t mb = n / config.minibatches;
  const int dims = buffer.action_dims;
  const Eigen::Index cols = buffer.observations.cols();

  UpdateStats stats;
  stats.learning_rate = learning_rate;
  stats.explained_variance = ExplainedVariance(buffer.values, buffer.returns);
  int count = 0;
  PpoBatch batch;
  batch.observations.resize(static_cast<Eigen::Index>(mb), cols);
  batch.bins.resize(mb * dims);
  batch.old_log_probs.resize(mb);
  batch.old_values.resize(mb);
  batch.advantages.resize(mb);
  batch.returns.resize(mb);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const std::vector<size_t> perm = Permutation(n, rng);
    for (int b = 0; b < config.minibatches; ++b) {
      for (size_t j = 0; j < mb; ++j) {
        const size_t src = perm[b * mb + j];
        batch.observations.row(static_cast<Eigen::Index>(j)) =
            buffer.observations.row(static_cast<Eigen::Index>(src));
        std::copy_n(buffer.bins.begin() + src * dims, dims, batch.bins.begin() + j * dims);
        batch.old_log_probs[j] = buffer.log_probs[src];
        batch.old_values[j] = buffer.values[src];
        batch.advantages[j] = adv[src];
        batch.returns[j] = buffer.returns[src];
      }
      PpoLoss loss = ComputePpoLoss(params, batch, config, /*with_gradient=*/true);
      if (!std::isfinite(loss.total)) {
        std::ostringstream msg;
        msg << "non-finite PPO loss at epoch " << epoch << ", minibatch " << b
            << ": policy " << loss.policy_loss << ", value " << loss.value_loss
            << ", entropy " << loss.entropy;
        throw std::runtime_error(msg.str());
      }
      stats.grad_norm += ClipGradNorm(loss.gradient, config.max_grad_norm);
      AdamStep(params.values, loss.gradient, adam, learning_rate, config.adam_epsilon);
      stats.policy_loss += loss.policy_loss;
      stats.value_loss += loss.value_loss;
      stats.entropy += loss.entropy;
      stats.clip_fraction += loss.clip_fraction;
      stats.mean_ratio += loss.mean_ratio;
      stats.approx_kl += loss.approx_kl;
      ++count;
    }
  }
  const double inv = 1.0 / count;
  stats.policy_loss *= inv;
  stats.value_loss *= inv;
  stats.entropy *= inv;
  stats.clip_fraction *= inv;
  stats.mean_ratio *= inv;
  stats.approx_kl *= inv;
  stats.grad_norm *= inv;
  return stats;
}

// --- WorkerPool --------------------------------------------------------------

WorkerPool::WorkerPool(int threads) {
  for (int i = 0; i < threads; ++i) threads_.emplace_back([this] { Loop(); });
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard<std::mutex> lock(mu_);
    stop_ = true;
  }
  work_cv_.notify_all();
  for (std::thread& t : threads_) t.join();
}

void WorkerPool::Loop() {
  std::uint64_t seen = 0;
  std::unique_lock<std::mutex> lock(mu_);
  while (true) {
    work_cv_.wait(lock, [&] { return stop_ || (generation_ != seen && next_ < n_); });
    if (stop_) return;
    while (next_ < n_) {
      const int i = next_++;
      lock.unlock();
      try {
        (*fn_)(i);
      } catch (...) {
        lock.lock();
        errors_[i] = std::current_exception();
        lock.unlock();
      }
      lock.lock();
      if (--pending_ == 0) done_cv_.notify_all();
    }
    seen = generation_;
  }
}

void WorkerPool::Run(int n, const std::function<void(int)>& fn) {
  if (threads_.empty() || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::unique_lock<std::mutex> lock(mu_);
  fn_ = &fn;
  n_ = n;
  next_ = 0;
  pending_ = n;
  errors_.assign(n, nullptr);
  ++generation_;
  work_cv_.notify_all();
  while (next_ < n_) {
    const int i = next_++;
    lock.unlock();
    try {
      fn(i);
    } catch (...) {
      lock.lock();
      errors_[i] = std::current_exception();
      lock.unlock();
    }
    lock.lock();
    --pending_;
  }
  done_cv_.wait(lock, [&] { return pending_ == 0; });
  fn_ = nullptr;
  for (const std::exception_ptr& e : errors_) {
    if (e) std::rethrow_exception(e);
  }
}

// --- Trainer -----------------------------------------------------------------

namespace {

constexpr char kTrainMagic[8] = {'W', 'B', 'C', 'T', 'R', 'A', 'I', 'N'};
constexpr std::uint32_t kTrainVersion = 1;

void WriteString(std::ostream& out, const std::string& s) {
  WriteU64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string ReadString(std::istream& in) {
  const std::uint64_t n = ReadU64(in);
  if (n > (1u << 20)) throw std::runtime_error("corrupt checkpoint string");
  std::string s(n, '\0');
  if (!in.read(s.data(), static_cast<std::streamsize>(n))) {
    throw std::runtime_error("truncated checkpoint");
  }
  return s;
}

void WriteDoubles(std::ostream& out, const std::vector<double>& v) {
  WriteU64(out, v.size());
  for (double x : v) WriteF64(out, x);
}

std::vector<double> ReadDoubles(std::istream& in, size_t expected) {
  if (ReadU64(in) != expected) throw std::runtime_error("checkpoint array size mismatch");
  std::vector<double> v(expected);
  for (double& x : v) x = ReadF64(in);
  return v;
}

std::string RngState(const std::mt19937_64& rng) {
  std::ostringstream s;
  s << rng;
  return s.str();
}

void SetRngState(std::mt19937_64& rng, const std::string& state) {
  std::istringstream s(state);
  s >> rng;
  if (!s) throw std::runtime_error("corrupt RNG state in checkpoint");
}

// Runs fn for every worker and tags failures with the worker index.
void ForEachWorker(WorkerPool& pool, int n, const std::function<void(int)>& fn) {
  pool.Run(n, [&fn](int w) {
    try {
      fn(w);
    } catch (const std::exception& e) {
      throw std::runtime_error("worker " + std::to_string(w) + ": " + e.what());
    }
  });
}

}  // namespace

Trainer::Trainer(TrainConfig config, NetworkConfig network, AdrParams adr, EnvFactory factory,
                 std::uint64_t run_hash)
    : config_(std::move(config)),
      run_hash_(run_hash),
      adr_(std::move(adr)),
      update_rng_(DeriveSeed(config_.seed, 1)) {
  std::vector<std::string> errors = config_.Validate();
  for (const std::string& e : network.Validate()) errors.push_back(e);
  if (!errors.empty()) {
    std::string msg = "invalid training configuration:";
    for (const std::string& e : errors) msg += "\n  " + e;
    throw std::invalid_argument(msg);
  }
  params_ = InitNetwork(network, DeriveSeed(config_.seed, 0));
  adam_ = InitialAdamState(params_.values.size());
  // Environment work is cheap relative to the update; extra threads only pay
  // off with real cores behind them.
  const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  pool_ = std::make_unique<WorkerPool>(std::min(config_.workers, hw) - 1);
  workers_.resize(config_.workers);
  for (int w = 0; w < config_.workers; ++w) {
    Worker& worker = workers_[w];
    worker.env = factory(w);
    if (worker.env->observation_size() != network.input_size() ||
        worker.env->action_dims() != network.action_dims) {
      throw std::invalid_argument("network config does not match the environment");
    }
    worker.rng.seed(DeriveSeed(config_.seed, 100 + static_cast<std::uint64_t>(w)));
    worker.tolerance = adr_.tolerance();
  }
  ForEachWorker(*pool_, config_.workers, [this](int w) {
    workers_[w].observation = workers_[w].env->Reset(workers_[w].tolerance);
  });
}

double Trainer::CurrentLearningRate() const {
  if (!config_.linear_lr_decay) return config_.learning_rate;
  const double frac = 1.0 - static_cast<double>(steps_) / static_cast<double>(config_.total_steps);
  return config_.learning_rate * std::max(frac, 0.0);
}

RolloutBuffer Trainer::CollectRollouts() {
  const int nw = config_.workers;
  const int n = config_.n_steps;
  const int dims = params_.config.action_dims;
  const int obs_size = params_.config.input_size();
  RolloutBuffer buf;
  buf.workers = nw;
  buf.n_steps = n;
  buf.action_dims = dims;
  const size_t total = static_cast<size_t>(nw) * n;
  buf.observations.resize(static_cast<Eigen::Index>(total), obs_size);
  buf.bins.resize(total * dims);
  buf.log_probs.resize(total);
  buf.values.resize(total);
  buf.rewards.resize(total);
  buf.dones.resize(total);
  buf.terminations.resize(total);
  buf.bootstrap_values.resize(nw);

  ForwardTape tape;
  RowMatrix obs(nw, obs_size);
  std::vector<EnvTransition> results(nw);
  std::vector<int> resets;
  for (int t = 0; t < n; ++t) {
    for (int w = 0; w < nw; ++w) {
      const std::vector<double>& o = workers_[w].observation;
      for (int j = 0; j < obs_size; ++j) obs(w, j) = o[j];
      buf.observations.row(static_cast<Eigen::Index>(buf.Index(w, t))) = obs.row(w);
    }
    const PolicyBatchOutput out = tape.Forward(params_, obs);
    PolicyOutput po;
    po.action_dims = dims;
    po.bins = params_.config.bins;
    for (int w = 0; w < nw; ++w) {
      po.logits.assign(out.logits.row(w).data(), out.logits.row(w).data() + out.logits.cols());
      po.value = out.value(w);
      const SampledAction a = SampleAction(po, workers_[w].rng);
      const size_t i = buf.Index(w, t);
      std::copy(a.bins.begin(), a.bins.end(), buf.bins.begin() + i * dims);
      buf.log_probs[i] = a.log_prob;
      buf.values[i] = po.value;
    }
    ForEachWorker(*pool_, nw, [&](int w) {
      const size_t i = buf.Index(w, t);
      results[w] = workers_[w].env->Step(std::span<const int>(buf.bins).subspan(i * dims, dims));
    });
    resets.clear();
    for (int w = 0; w < nw; ++w) {
      Worker& worker = workers_[w];
      EnvTransition& r = results[w];
      const size_t i = buf.Index(w, t);
      buf.rewards[i] = r.reward;
      buf.terminations[i] = r.termination;
      buf.dones[i] = r.termination != Termination::kNone;
      worker.episode_return += r.reward;
      ++worker.episode_length;
      if (!buf.dones[i]) {
        worker.observation = std::move(r.observation);
        continue;
      }
      EpisodeRecord record;
      record.step = steps_ + static_cast<std::int64_t>(t) * nw + w + 1;
      record.worker = w;
      record.episode_return = worker.episode_return;
      record.length = worker.episode_length;
      record.termination = r.termination;
      record.tolerance = worker.tolerance;
      record.goal_distance = r.goal_distance;
      record.next_tolerance = adr_.Report(r.termination == Termination::kSuccess);
      if (on_episode) on_episode(record);
      worker.tolerance = record.next_tolerance;
      worker.episode_return = 0.0;
      worker.episode_length = 0;
      resets.push_back(w);
    }
    ForEachWorker(*pool_, static_cast<int>(resets.size()), [&](int k) {
      Worker& worker = workers_[resets[k]];
      worker.observation = worker.env->Reset(worker.tolerance);
    });
  }
  for (int w = 0; w < nw; ++w) {
    for (int j = 0; j < obs_size; ++j) obs(w, j) = workers_[w].observation[j];
  }
  const PolicyBatchOutput last = tape.Forward(params_, obs);
  for (int w = 0; w < nw; ++w) buf.bootstrap_values[w] = last.value(w);
  steps_ += static_cast<std::int64_t>(total);
  return buf;
}

UpdateStats Trainer::Iterate() {
  const double lr = CurrentLearningRate();
  RolloutBuffer buffer = CollectRollouts();
  ComputeGae(buffer, config_.gamma, config_.gae_lambda);
  UpdateStats stats = PpoUpdate(params_, adam_, buffer, config_, lr, update_rng_);
  stats.update = ++updates_;
  stats.steps = steps_;
  return stats;
}

void Trainer::WriteCheckpoint(std::ostream& out) const {
  WriteNetwork(out, params_);
  out.write(kTrainMagic, sizeof(kTrainMagic));
  WriteU32(out, kTrainVersion);
  WriteU64(out, run_hash_);
  WriteU64(out, static_cast<std::uint64_t>(steps_));
  WriteU64(out, static_cast<std::uint64_t>(updates_));
  WriteU64(out, static_cast<std::uint64_t>(adam_.t));
  WriteDoubles(out, adam_.m);
  WriteDoubles(out, adam_.v);
  const AdrState adr = adr_.snapshot();
  WriteF64(out, adr.tolerance);
  WriteU64(out, static_cast<std::uint64_t>(adr.episodes));
  WriteU64(out, adr.outcomes.size());
  for (bool b : adr.outcomes) WriteU32(out, b ? 1 : 0);
  WriteString(out, RngState(update_rng_));
  WriteU64(out, workers_.size());
  for (const Worker& w : workers_) {
    WriteString(out, RngState(w.rng));
    WriteF64(out, w.episode_return);
    WriteU64(out, static_cast<std::uint64_t>(w.episode_length));
    WriteF64(out, w.tolerance);
    const EnvSnapshot snap = w.env->Snapshot();
    WriteU64(out, snap.episode_index);
    WriteF64(out, snap.tolerance);
    WriteU64(out, snap.actions.size());
    for (int a : snap.actions) WriteU32(out, static_cast<std::uint32_t>(a));
  }
}

void Trainer::SaveCheckpoint(const std::string& path) const {
  // Write-then-rename so an interrupted save never leaves a torn file.
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
    WriteCheckpoint(out);
    if (!out) throw std::runtime_error("failed writing " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw std::runtime_error("cannot move checkpoint into place at " + path);
  }
}

void Trainer::ReadCheckpoint(std::istream& in) {
  NetworkParams params = ReadNetwork(in, params_.config);
  char magic[8];
  if (!in.read(magic, sizeof(magic)) ||
      !std::equal(magic, magic + sizeof(magic), kTrainMagic)) {
    throw std::runtime_error("checkpoint has no trainer state");
  }
  if (ReadU32(in) != kTrainVersion) throw std::runtime_error("unsupported trainer state version");
  if (ReadU64(in) != run_hash_) {
    throw std::runtime_error("checkpoint was written with an incompatible configuration");
  }
  const std::int64_t steps = static_cast<std::int64_t>(ReadU64(in));
  const int updates = static_cast<int>(ReadU64(in));
  AdamState adam;
  adam.t = static_cast<std::int64_t>(ReadU64(in));
  adam.m = ReadDoubles(in, params.values.size());
  adam.v = ReadDoubles(in, params.values.size());
  AdrState adr;
  adr.tolerance = ReadF64(in);
  adr.episodes = static_cast<std::int64_t>(ReadU64(in));
  const std::uint64_t outcomes = ReadU64(in);
  if (outcomes > static_cast<std::uint64_t>(adr_.params().window)) {
    throw std::runtime_error("checkpoint ADR window exceeds the configured window");
  }
  for (std::uint64_t i = 0; i < outcomes; ++i) adr.outcomes.push_back(ReadU32(in) != 0);
  std::mt19937_64 update_rng;
  SetRngState(update_rng, ReadString(in));
  if (ReadU64(in) != workers_.size()) {
    throw std::runtime_error("checkpoint worker count does not match the configuration");
  }
  struct Saved {
    std::string rng;
    double episode_return;
    int length;
    double tolerance;
    EnvSnapshot snapshot;
  };
  std::vector<Saved> saved(workers_.size());
  for (Saved& s : saved) {
    s.rng = ReadString(in);
    s.episode_return = ReadF64(in);
    s.length = static_cast<int>(ReadU64(in));
    s.tolerance = ReadF64(in);
    s.snapshot.episode_index = ReadU64(in);
    s.snapshot.tolerance = ReadF64(in);
    const std::uint64_t count = ReadU64(in);
    if (count > (1u << 26)) throw std::runtime_error("corrupt checkpoint action log");
    s.snapshot.actions.resize(count);
    for (int& a : s.snapshot.actions) a = static_cast<int>(ReadU32(in));
  }
  // Everything parsed; commit.
  params_ = std::move(params);
  adam_ = std::move(adam);
  adr_.Restore(std::move(adr));
  update_rng_ = update_rng;
  steps_ = steps;
  updates_ = updates;
  for (size_t w = 0; w < workers_.size(); ++w) {
    Worker& worker = workers_[w];
    SetRngState(worker.rng, saved[w].rng);
    worker.episode_return = saved[w].episode_return;
    worker.episode_length = saved[w].length;
    worker.tolerance = saved[w].tolerance;
    worker.observation = worker.env->Restore(saved[w].snapshot);
  }
}

void Trainer::LoadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  ReadCheckpoint(in);
}

}  // namespace wbc
