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

#include "wbc/policy.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <Eigen/QR>

namespace wbc {

namespace {

constexpr char kMagic[8] = {'W', 'B', 'C', 'P', 'O', 'L', 'C', 'Y'};
constexpr std::uint32_t kVersion = 1;

struct DenseOffsets {
  std::size_t weight = 0;
  std::size_t bias = 0;
  int out = 0;
  int in = 0;
};

// Order: front l1, front l2, rear l1, rear l2, trunk..., policy, value.
std::vector<DenseOffsets> ComputeOffsets(const NetworkConfig& c) {
  std::vector<std::pair<int, int>> shapes = {
      {c.scan_hidden, c.beams}, {c.scan_embed, c.scan_hidden},
      {c.scan_hidden, c.beams}, {c.scan_embed, c.scan_hidden}};
  int width = 2 * c.scan_embed + c.proprio;
  for (int h : c.trunk_hidden) {
    shapes.emplace_back(h, width);
    width = h;
  }
  shapes.emplace_back(c.logits_size(), width);
  shapes.emplace_back(1, width);
  std::vector<DenseOffsets> offsets;
  std::size_t at = 0;
  for (const auto& [out, in] : shapes) {
    DenseOffsets d;
    d.out = out;
    d.in = in;
    d.weight = at;
    at += static_cast<std::size_t>(out) * in;
    d.bias = at;
    at += out;
    offsets.push_back(d);
  }
  return offsets;
}

void CheckParams(const NetworkParams& params) {
  if (params.values.size() != ParamCount(params.config)) {
    throw std::invalid_argument("parameter vector does not match network config");
  }
}

// Parameter blocks are copied into Eigen-owned storage before use: vectorized
// kernels peel differently depending on the address alignment of their
// operands, and std::vector storage gives no fixed alignment, which would make
// results depend on where the allocator placed the parameters.
RowMatrix Weights(const double* p, const DenseOffsets& d) {
  return Eigen::Map<const RowMatrix>(p + d.weight, d.out, d.in);
}

RowMatrix Dense(const double* p, const DenseOffsets& d, const RowMatrix& x, bool tanh) {
  const RowMatrix w = Weights(p, d);
  const Eigen::RowVectorXd b = Eigen::Map<const Eigen::RowVectorXd>(p + d.bias, d.out);
  RowMatrix y = x * w.transpose();
  y.rowwise() += b;
  if (tanh) y = y.array().tanh().matrix();
  return y;
}

// Accumulates weight/bias gradients for pre-activation gradient `dz` and
// returns the gradient with respect to the layer input when requested.
RowMatrix DenseBackward(const double* p, double* g, const DenseOffsets& d,
                        const RowMatrix& x, const RowMatrix& dz, bool want_input) {
  const RowMatrix gw = dz.transpose() * x;
  const Eigen::RowVectorXd gb = dz.colwise().sum();
  Eigen::Map<RowMatrix>(g + d.weight, d.out, d.in) += gw;
  Eigen::Map<Eigen::RowVectorXd>(g + d.bias, d.out) += gb;
  if (!want_input) return {};
  return dz * Weights(p, d);
}

RowMatrix TanhGrad(const RowMatrix& dy, const RowMatrix& y) {
  return (dy.array() * (1.0 - y.array().square())).matrix();
}

double Gaussian(std::mt19937_64& rng) {
  // Box-Muller on 53-bit uniforms; portable across standard libraries.
  const double u1 = (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void Orthogonal(double* w, int rows, int cols, double gain, std::mt19937_64& rng) {
  const int tall = std::max(rows, cols);
  const int thin = std::min(rows, cols);
  Eigen::MatrixXd g(tall, thin);
  for (int j = 0; j < thin; ++j) {
    for (int i = 0; i < tall; ++i) g(i, j) = Gaussian(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(tall, thin);
  // Sign fix so the factorization is unique.
  for (int j = 0; j < thin; ++j) {
    if (qr.matrixQR()(j, j) < 0.0) q.col(j) *= -1.0;
  }
  Eigen::Map<RowMatrix> out(w, rows, cols);
  if (rows >= cols) {
    out = gain * q;
  } else {
    out = gain * q.transpose();
  }
}

}  // namespace

std::vector<std::string> NetworkConfig::Validate() const {
  std::vector<std::string> errors;
  if (beams < 1) errors.push_back("policy.beams: must be >= 1");
  if (proprio < 0) errors.push_back("policy.proprio: must be >= 0");
  if (scan_hidden < 1) errors.push_back("policy.scan_hidden: must be >= 1");
  if (scan_embed < 1) errors.push_back("policy.scan_embed: must be >= 1");
  if (trunk_hidden.empty()) errors.push_back("policy.trunk_hidden: at least one layer");
  for (int h : trunk_hidden) {
    if (h < 1) errors.push_back("policy.trunk_hidden: sizes must be >= 1");
  }
  if (action_dims < 1) errors.push_back("policy.action_dims: must be >= 1");
  if (bins < 2) errors.push_back("policy.bins: must be >= 2");
  return errors;
}

NetworkConfig NetworkConfig::MatchRobot(const RobotConfig& robot) const {
  NetworkConfig c = *this;
  c.beams = robot.lidar.beams;
  c.proprio = 2 * robot.num_joints() + 6;
  c.action_dims = 3 + robot.num_joints();
  return c;
}

std::uint64_t ConfigHash(const NetworkConfig& c) {
  std::ostringstream key;
  key << "beams=" << c.beams << ";proprio=" << c.proprio << ";scan_hidden=" << c.scan_hidden
      << ";scan_embed=" << c.scan_embed << ";trunk=";
  for (int h : c.trunk_hidden) key << h << ",";
  key << ";action_dims=" << c.action_dims << ";bins=" << c.bins;
  std::uint64_t hash = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char ch : key.str()) {
    hash ^= ch;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::vector<ParamBlock> ParamLayout(const NetworkConfig& config) {
  const std::vector<DenseOffsets> offsets = ComputeOffsets(config);
  std::vector<std::string> names = {"front.l1", "front.l2", "rear.l1", "rear.l2"};
  for (size_t i = 0; i < config.trunk_hidden.size(); ++i) {
    names.push_back("trunk." + std::to_string(i));
  }
  names.push_back("policy");
  names.push_back("value");
  std::vector<ParamBlock> blocks;
  for (size_t i = 0; i < offsets.size(); ++i) {
    const DenseOffsets& d = offsets[i];
    blocks.push_back({names[i] + ".weight", d.out, d.in, d.weight});
    blocks.push_back({names[i] + ".bias", d.out, 1, d.bias});
  }
  return blocks;
}

std::size_t ParamCount(const NetworkConfig& config) {
  const DenseOffsets last = ComputeOffsets(config).back();
  return last.bias + last.out;
}

NetworkParams ZeroNetwork(const NetworkConfig& config) {
  return {config, std::vector<double>(ParamCount(config), 0.0)};
}

NetworkParams InitNetwork(const NetworkConfig& config, std::uint64_t seed) {
  NetworkParams params = ZeroNetwork(config);
  std::mt19937_64 rng(seed);
  const std::vector<DenseOffsets> offsets = ComputeOffsets(config);
  for (size_t i = 0; i < offsets.size(); ++i) {
    const bool head = i + 2 >= offsets.size();
    const double gain = head ? 0.01 : std::sqrt(2.0);
    Orthogonal(params.values.data() + offsets[i].weight, offsets[i].out, offsets[i].in, gain, rng);
  }
  return params;
}

PolicyBatchOutput ForwardTape::Forward(const NetworkParams& params,
                                       const RowMatrix& observations) {
  CheckParams(params);
  const NetworkConfig& c = params.config;
  if (observations.cols() != c.input_size()) {
    std::ostringstream msg;
    msg << "observation has " << observations.cols() << " entries, network expects "
        << c.input_size();
    throw std::invalid_argument(msg.str());
  }
  const std::vector<DenseOffsets> off = ComputeOffsets(c);
  const double* p = params.values.data();
  const Eigen::Index n = observations.rows();

  front_[0].input = observations.leftCols(c.beams);
  front_[0].output = Dense(p, off[0], front_[0].input, true);
  front_[1].input = front_[0].output;
  front_[1].output = Dense(p, off[1], front_[1].input, true);
  rear_[0].input = observations.middleCols(c.beams, c.beams);
  rear_[0].output = Dense(p, off[2], rear_[0].input, true);
  rear_[1].input = rear_[0].output;
  rear_[1].output = Dense(p, off[3], rear_[1].input, true);

  RowMatrix joined(n, 2 * c.scan_embed + c.proprio);
  joined << front_[1].output, rear_[1].output, observations.rightCols(c.proprio);
  trunk_.resize(c.trunk_hidden.size());
  RowMatrix x = std::move(joined);
  for (size_t i = 0; i < trunk_.size(); ++i) {
    trunk_[i].input = std::move(x);
    trunk_[i].output = Dense(p, off[4 + i], trunk_[i].input, true);
    x = trunk_[i].output;
  }
  head_input_ = std::move(x);

  PolicyBatchOutput out;
  out.logits = Dense(p, off[off.size() - 2], head_input_, false);
  const RowMatrix v = Dense(p, off.back(), head_input_, false);
  out.value = v.col(0);
  recorded_ = true;
  param_count_ = params.values.size();
  return out;
}

std::vector<double> ForwardTape::Backward(const NetworkParams& params,
                                          const RowMatrix& d_logits,
                                          const Eigen::VectorXd& d_value) const {
  if (!recorded_) throw std::logic_error("backward called before forward");
  if (params.values.size() != param_count_) {
    throw std::invalid_argument("parameters changed shape since the forward pass");
  }
  const NetworkConfig& c = params.config;
  if (d_logits.rows() != head_input_.rows() || d_logits.cols() != c.logits_size() ||
      d_value.size() != head_input_.rows()) {
    throw std::invalid_argument("output gradient shape does not match the recorded batch");
  }
  const std::vector<DenseOffsets> off = ComputeOffsets(c);
  const double* p = params.values.data();
  std::vector<double> grad(params.values.size(), 0.0);
  double* g = grad.data();

  RowMatrix dv(d_value.size(), 1);
  dv.col(0) = d_value;
  RowMatrix dx = DenseBackward(p, g, off[off.size() - 2], head_input_, d_logits, true);
  dx += DenseBackward(p, g, off.back(), head_input_, dv, true);

  for (size_t i = trunk_.size(); i-- > 0;) {
    const RowMatrix dz = TanhGrad(dx, trunk_[i].output);
    dx = DenseBackward(p, g, off[4 + i], trunk_[i].input, dz, true);
  }
  // dx now spans [front embed | rear embed | proprio]; inputs need no gradient.
  const RowMatrix d_front = dx.leftCols(c.scan_embed);
  const RowMatrix d_rear = dx.middleCols(c.scan_embed, c.scan_embed);

  RowMatrix dz = TanhGrad(d_front, front_[1].output);
  RowMatrix dh = DenseBackward(p, g, off[1], front_[1].input, dz, true);
  DenseBackward(p, g, off[0], front_[0].input, TanhGrad(dh, front_[0].output), false);

  dz = TanhGrad(d_rear, rear_[1].output);
  dh = DenseBackward(p, g, off[3], rear_[1].input, dz, true);
  DenseBackward(p, g, off[2], rear_[0].input, TanhGrad(dh, rear_[0].output), false);
  return grad;
}

PolicyOutput Forward(const NetworkParams& params, std::span<const double> observation) {
  RowMatrix obs(1, static_cast<Eigen::Index>(observation.size()));
  for (size_t i = 0; i < observation.size(); ++i) obs(0, static_cast<Eigen::Index>(i)) = observation[i];
  ForwardTape tape;
  const PolicyBatchOutput batch = tape.Forward(params, obs);
  PolicyOutput out;
  out.action_dims = params.config.action_dims;
  out.bins = params.config.bins;
  out.logits.assign(batch.logits.data(), batch.logits.data() + batch.logits.size());
  out.value = batch.value(0);
  return out;
}

double BinToAcceleration(int bin, int bins, double max_acc) {
  if (bin < 0 || bin >= bins) throw std::out_of_range("action bin out of range");
  return max_acc * (2.0 * bin / (bins - 1) - 1.0);
}

std::vector<double> ActionLimits(const RobotConfig& robot) {
  std::vector<double> limits(robot.max_base_acc.begin(), robot.max_base_acc.end());
  limits.insert(limits.end(), robot.link_lengths.size(), robot.max_joint_acc);
  return limits;
}

Action BinsToAction(const RobotConfig& robot, std::span<const int> bins, int num_bins) {
  const std::vector<double> limits = ActionLimits(robot);
  if (bins.size() != limits.size()) {
    throw std::invalid_argument("action bin count does not match robot action dimensions");
  }
  Action action = Action::Zero(robot);
  for (int i = 0; i < 3; ++i) action.base_acc[i] = BinToAcceleration(bins[i], num_bins, limits[i]);
  for (size_t j = 0; j < action.joint_acc.size(); ++j) {
    action.joint_acc[j] = BinToAcceleration(bins[3 + j], num_bins, limits[3 + j]);
  }
  return action;
}

std::vector<double> Softmax(std::span<const double> logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (size_t k = 0; k < logits.size(); ++k) {
    p[k] = std::exp(logits[k] - m);
    sum += p[k];
  }
  for (double& v : p) v /= sum;
  return p;
}

namespace {

// log p_k and entropy of one categorical.
double LogProb(std::span<const double> logits, int k, double* entropy) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - m);
  const double log_z = m + std::log(sum);
  if (entropy != nullptr) {
    double h = 0.0;
    for (double z : logits) {
      const double lp = z - log_z;
      const double pk = std::exp(lp);
      if (pk > 0.0) h -= pk * lp;
    }
    *entropy = h;
  }
  return logits[k] - log_z;
}

}  // namespace

SampledAction EvaluateAction(const PolicyOutput& output, std::span<const int> bins) {
  if (static_cast<int>(bins.size()) != output.action_dims) {
    throw std::invalid_argument("bin vector does not match action dimensions");
  }
  SampledAction a;
  a.bins.assign(bins.begin(), bins.end());
  for (int d = 0; d < output.action_dims; ++d) {
    double h = 0.0;
    a.log_prob += LogProb(output.logits_for(d), bins[d], &h);
    a.entropy += h;
  }
  return a;
}

SampledAction SampleAction(const PolicyOutput& output, std::mt19937_64& rng) {
  std::vector<int> bins(output.action_dims);
  for (int d = 0; d < output.action_dims; ++d) {
    const std::vector<double> p = Softmax(output.logits_for(d));
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    double cum = 0.0;
    int k = output.bins - 1;
    for (int i = 0; i < output.bins; ++i) {
      cum += p[i];
      if (u < cum) {
        k = i;
        break;
      }
    }
    bins[d] = k;
  }
  return EvaluateAction(output, bins);
}

SampledAction GreedyAction(const PolicyOutput& output) {
  std::vector<int> bins(output.action_dims);
  for (int d = 0; d < output.action_dims; ++d) {
    const auto l = output.logits_for(d);
    bins[d] = static_cast<int>(std::max_element(l.begin(), l.end()) - l.begin());
  }
  return EvaluateAction(output, bins);
}

void WriteU32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

void WriteU64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

void WriteF64(std::ostream& out, double v) { WriteU64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint32_t ReadU32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error("truncated checkpoint");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t ReadU64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw std::runtime_error("truncated checkpoint");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double ReadF64(std::istream& in) { return std::bit_cast<double>(ReadU64(in)); }

void WriteNetwork(std::ostream& out, const NetworkParams& params) {
  CheckParams(params);
  out.write(kMagic, sizeof(kMagic));
  WriteU32(out, kVersion);
  WriteU64(out, ConfigHash(params.config));
  WriteU64(out, params.values.size());
  for (double v : params.values) WriteF64(out, v);
}

NetworkParams ReadNetwork(std::istream& in, const NetworkConfig& expected) {
  char magic[8];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not a policy checkpoint (bad magic)");
  }
  const std::uint32_t version = ReadU32(in);
  if (version != kVersion) {
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  }
  const std::uint64_t hash = ReadU64(in);
  if (hash != ConfigHash(expected)) {
    throw std::runtime_error("checkpoint config hash does not match the network config");
  }
  const std::uint64_t count = ReadU64(in);
  if (count != ParamCount(expected)) {
    throw std::runtime_error("checkpoint parameter count does not match the network config");
  }
  NetworkParams params{expected, std::vector<double>(count)};
  for (double& v : params.values) v = ReadF64(in);
  return params;
}

void SaveNetwork(const std::string& path, const NetworkParams& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  WriteNetwork(out, params);
  if (!out) throw std::runtime_error("failed writing " + path);
}

NetworkParams LoadNetwork(const std::string& path, const NetworkConfig& expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return ReadNetwork(in, expected);
}

}  // namespace wbc
