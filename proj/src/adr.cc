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

#include "wbc/adr.h"

#include <algorithm>
#include <utility>

namespace wbc {

std::vector<std::string> AdrParams::Validate() const {
  std::vector<std::string> errors;
  if (!(min_tolerance >= 0.05 && max_tolerance <= 0.5 && min_tolerance <= max_tolerance)) {
    errors.push_back("adr: tolerance bounds must lie within [0.05, 0.5]");
  }
  if (!(initial_tolerance >= min_tolerance && initial_tolerance <= max_tolerance)) {
    errors.push_back("adr.initial_tolerance: outside [min_tolerance, max_tolerance]");
  }
  if (window < 1) errors.push_back("adr.window: must be >= 1");
  if (!(success_low >= 0.0 && success_low <= success_high && success_high <= 1.0)) {
    errors.push_back("adr: thresholds must satisfy 0 <= success_low <= success_high <= 1");
  }
  if (!(step > 0.0)) errors.push_back("adr.step: must be > 0");
  return errors;
}

AdrState InitialAdrState(const AdrParams& params) {
  AdrState state;
  state.tolerance = params.initial_tolerance;
  return state;
}

AdrState RecordEpisode(const AdrParams& params, AdrState state, bool success) {
  ++state.episodes;
  if (!params.enabled) return state;
  state.outcomes.push_back(success);
  while (static_cast<int>(state.outcomes.size()) > params.window) state.outcomes.pop_front();
  if (static_cast<int>(state.outcomes.size()) < params.window) return state;

  const auto wins = std::count(state.outcomes.begin(), state.outcomes.end(), true);
  const double rate = static_cast<double>(wins) / params.window;
  if (rate > params.success_high) {
    state.tolerance -= params.step;
    state.outcomes.clear();
  } else if (rate < params.success_low) {
    state.tolerance += params.step;
    state.outcomes.clear();
  }
  state.tolerance = std::clamp(state.tolerance, params.min_tolerance, params.max_tolerance);
  return state;
}

AdrController::AdrController(AdrParams params)
    : params_(params), state_(InitialAdrState(params)) {}

AdrController::AdrController(AdrParams params, AdrState state)
    : params_(params), state_(std::move(state)) {}

double AdrController::Report(bool success) {
  std::lock_guard<std::mutex> lock(mu_);
  state_ = RecordEpisode(params_, std::move(state_), success);
  return state_.tolerance;
}

double AdrController::tolerance() const {
  std::lock_guard<std::mutex> lock(mu_);
  return state_.tolerance;
}

AdrState AdrController::snapshot() const {
  std::lock_guard<std::mutex> lock(mu_);
  return state_;
}

void AdrController::Restore(AdrState state) {
  std::lock_guard<std::mutex> lock(mu_);
  state_ = std::move(state);
}

}  // namespace wbc
