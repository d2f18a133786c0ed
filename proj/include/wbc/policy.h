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

#ifndef WBC_POLICY_H_
#define WBC_POLICY_H_

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "wbc/sim.h"

namespace wbc {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Actor-critic network. Each LIDAR scan goes through its own two-layer tanh
// encoder; the embeddings are concatenated with the proprioceptive inputs and
// the goal pose and fed to a tanh trunk, which ends in one categorical head
// per action dimension and a scalar value head.
struct NetworkConfig {
  int beams = 64;     // per scan
  int proprio = 12;   // joint pos, joint vel, base vel, goal in EE frame
  int scan_hidden = 128;
  int scan_embed = 64;
  std::vector<int> trunk_hidden{256, 256};
  int action_dims = 6;
  int bins = 7;

  int input_size() const { return 2 * beams + proprio; }
  int logits_size() const { return action_dims * bins; }
  std::vector<std::string> Validate() const;

  // Input and output sizes follow the robot; hidden sizes keep their values.
  NetworkConfig MatchRobot(const RobotConfig& robot) const;
};

// Stable across processes; stored in checkpoint headers.
std::uint64_t ConfigHash(const NetworkConfig& config);

// One named block of the flat parameter array. Weights are row-major
// [rows = outputs, cols = inputs]; biases have cols == 1.
struct ParamBlock {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::size_t offset = 0;

  std::size_t size() const { return static_cast<std::size_t>(rows) * cols; }
};

// Layout table, in storage order:
//   front.l1.{weight,bias}  front.l2.{weight,bias}
//   rear.l1.{weight,bias}   rear.l2.{weight,bias}
//   trunk.<i>.{weight,bias} for each hidden layer
//   policy.{weight,bias}    value.{weight,bias}
std::vector<ParamBlock> ParamLayout(const NetworkConfig& config);
std::size_t ParamCount(const NetworkConfig& config);

struct NetworkParams {
  NetworkConfig config;
  std::vector<double> values;
};

NetworkParams ZeroNetwork(const NetworkConfig& config);
// Orthogonal init with gain sqrt(2) on hidden layers and 0.01 on both heads.
NetworkParams InitNetwork(const NetworkConfig& config, std::uint64_t seed);

struct PolicyOutput {
  int action_dims = 0;
  int bins = 0;
  std::vector<double> logits;  // action_dims x bins, row-major
  double value = 0.0;

  std::span<const double> logits_for(int dim) const {
    return std::span<const double>(logits).subspan(static_cast<std::size_t>(dim) * bins, bins);
  }
};

struct PolicyBatchOutput {
  RowMatrix logits;       // batch x (action_dims * bins)
  Eigen::VectorXd value;  // batch
};

// Records the activations of a batched forward pass so that Backward can
// propagate output gradients to every parameter.
class ForwardTape {
 public:
  PolicyBatchOutput Forward(const NetworkParams& params, const RowMatrix& observations);

  // Gradient of sum_i <d_logits_i, logits_i> + d_value_i * value_i with
  // respect to the flat parameter vector.
  std::vector<double> Backward(const NetworkParams& params, const RowMatrix& d_logits,
                               const Eigen::VectorXd& d_value) const;

  bool recorded() const { return recorded_; }

 private:
  struct LayerRecord {
    RowMatrix input;
    RowMatrix output;  // post-activation
  };
  bool recorded_ = false;
  std::size_t param_count_ = 0;
  LayerRecord front_[2];
  LayerRecord rear_[2];
  std::vector<LayerRecord> trunk_;
  RowMatrix head_input_;
};

PolicyOutput Forward(const NetworkParams& params, std::span<const double> observation);

// Bin b of B maps to max_acc * (2b / (B - 1) - 1); the middle bin is exactly 0.
double BinToAcceleration(int bin, int bins, double max_acc);
// Dimension order: base (ax, ay, alpha), then one per arm joint.
Action BinsToAction(const RobotConfig& robot, std::span<const int> bins, int num_bins);
std::vector<double> ActionLimits(const RobotConfig& robot);

struct SampledAction {
  std::vector<int> bins;
  double log_prob = 0.0;  // summed over dimensions
  double entropy = 0.0;   // summed over dimensions
};

std::vector<double> Softmax(std::span<const double> logits);
SampledAction SampleAction(const PolicyOutput& output, std::mt19937_64& rng);
SampledAction GreedyAction(const PolicyOutput& output);
// Log-probability and entropy of given bins under `output`.
SampledAction EvaluateAction(const PolicyOutput& output, std::span<const int> bins);

// Checkpoint: magic "WBCPOLCY", u32 version, u64 config hash, u64 parameter
// count, then the flat parameters as little-endian IEEE-754 doubles.
void WriteNetwork(std::ostream& out, const NetworkParams& params);
NetworkParams ReadNetwork(std::istream& in, const NetworkConfig& expected);
void SaveNetwork(const std::string& path, const NetworkParams& params);
NetworkParams LoadNetwork(const std::string& path, const NetworkConfig& expected);

// Little-endian primitives shared with the trainer checkpoint.
void WriteU32(std::ostream& out, std::uint32_t v);
void WriteU64(std::ostream& out, std::uint64_t v);
void WriteF64(std::ostream& out, double v);
std::uint32_t ReadU32(std::istream& in);
std::uint64_t ReadU64(std::istream& in);
double ReadF64(std::istream& in);

}  // namespace wbc

#endif  // WBC_POLICY_H_
