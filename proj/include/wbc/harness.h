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

#ifndef WBC_HARNESS_H_
#define WBC_HARNESS_H_

#include <cstdint>
#include <iosfwd>
#include <string>

#include "wbc/config.h"
#include "wbc/ppo.h"

namespace wbc {

// Worker w trains on scenes from DeriveSeed(env seed, train seed, w).
EnvFactory TrainingEnvFactory(const RunConfig& config);
std::uint64_t WorkerEnvSeed(const RunConfig& config, int worker);

struct TrainOutputs {
  std::string final_checkpoint;
  std::int64_t steps = 0;
  int updates = 0;
  double tolerance = 0.0;  // ADR tolerance at exit
};

// Runs the training loop and writes into out_dir:
//   config.json      effective configuration
//   metrics.csv      step, worker, episode_return, length, termination, tolerance, goal_distance
//   adr.csv          step, tolerance (one row per finished episode)
//   updates.jsonl    one record of update statistics per update
//   checkpoint_NNNNNN.bin every checkpoint_interval updates, checkpoint_final.bin at exit
// With a resume path the run continues from that checkpoint and appends to
// the logs. `progress` receives one line per update when non-null.
TrainOutputs RunTraining(const RunConfig& config, const std::string& out_dir,
                         const std::string& resume_from, std::ostream* progress);

// Output directory from $WBC_OUT_DIR, falling back to "wbc_out".
std::string DefaultOutputDir();

}  // namespace wbc

#endif  // WBC_HARNESS_H_
