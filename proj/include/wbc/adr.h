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

#ifndef WBC_ADR_H_
#define WBC_ADR_H_

#include <cstdint>
#include <deque>
#include <mutex>
#include <string>
#include <vector>

namespace wbc {

// Curriculum over the goal tolerance: tighten after a window of mostly
// successful episodes, loosen after a window of mostly failed ones.
struct AdrParams {
  bool enabled = true;
  double min_tolerance = 0.05;
  double max_tolerance = 0.5;
  double initial_tolerance = 0.5;
  int window = 50;
  double success_high = 0.8;
  double success_low = 0.5;
  double step = 0.02;

  std::vector<std::string> Validate() const;
};

struct AdrState {
  double tolerance = 0.5;
  std::deque<bool> outcomes;  // most recent last, at most `window` entries
  std::int64_t episodes = 0;

  bool operator==(const AdrState&) const = default;
};

AdrState InitialAdrState(const AdrParams& params);
AdrState RecordEpisode(const AdrParams& params, AdrState state, bool success);
inline double CurrentTolerance(const AdrState& state) { return state.tolerance; }

// Single logical ADR controller shared by rollout workers. Reports are
// applied in call order; callers that need reproducibility serialize them.
class AdrController {
 public:
  explicit AdrController(AdrParams params);
  AdrController(AdrParams params, AdrState state);

  // Returns the tolerance after the report is applied.
  double Report(bool success);
  double tolerance() const;
  AdrState snapshot() const;
  void Restore(AdrState state);
  const AdrParams& params() const { return params_; }

 private:
  AdrParams params_;
  mutable std::mutex mu_;
  AdrState state_;
};

}  // namespace wbc

#endif  // WBC_ADR_H_
