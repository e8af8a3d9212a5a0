// Copyright 2026 The owrlab authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <vector>

#include "owrlab/common.hpp"

namespace owrlab {

// The unknown decision; real class ids are non-negative.
inline constexpr int kUnknownLabel = -1;

// Fraction of known-class samples predicted correctly. With rejection, a
// prediction of unknown counts as wrong; without, the caller must already
// have disabled the unknown branch of the prediction rule.
inline double closed_world_accuracy(const std::vector<int>& predictions,
                                    const std::vector<int>& labels,
                                    bool with_rejection) {
  if (predictions.size() != labels.size())
    throw DimensionError(concat("closed_world_accuracy: ", predictions.size(),
                                " predictions for ", labels.size(), " labels"));
  if (labels.empty())
    throw ContractError("closed_world_accuracy: empty test set");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == kUnknownLabel)
      throw ContractError("closed_world_accuracy: unknown-class sample in a "
                          "closed-world population");
    if (!with_rejection && predictions[i] == kUnknownLabel)
      throw ContractError("closed_world_accuracy: rejection disabled but a "
                          "prediction is unknown");
    if (predictions[i] == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / labels.size();
}

// Fraction of unknown-class samples predicted unknown.
inline double open_set_accuracy(const std::vector<int>& predictions) {
  if (predictions.empty()) throw ContractError("open_set_accuracy: empty unknown set");
  std::size_t rejected = 0;
  for (int p : predictions)
    if (p == kUnknownLabel) ++rejected;
  return static_cast<double>(rejected) / predictions.size();
}

// 2ab / (a+b); 0 when both are 0.
inline double owr_harmonic(double cwr, double osa) {
  if (cwr < 0 || cwr > 1 || osa < 0 || osa > 1)
    throw ContractError(concat("owr_harmonic: inputs out of [0,1]: ", cwr, ", ", osa));
  if (cwr + osa == 0.0) return 0.0;
  return 2.0 * cwr * osa / (cwr + osa);
}

// Metrics for one incremental step on one test domain.
struct StepResult {
  std::size_t step = 0;
  double closed_world_no_reject = 0;
  double closed_world_with_reject = 0;
  double open_set_acc = 0;
  double owr_h = 0;
};

}  // namespace owrlab
