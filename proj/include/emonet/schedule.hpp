// Copyright 2026 The emonet-cpp Authors
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
#include <string>
#include <vector>

namespace emonet {

enum class DecayLaw { InverseTime, Exponential };
DecayLaw parse_decay_law(std::string_view text);
std::string_view to_string(DecayLaw law);

struct ScheduleConfig {
  std::vector<double> stage_lrs = {0.1, 0.01, 0.001};
  std::vector<double> finetune_lrs = {0.01, 0.001};
  int patience = 50;
  int rounds_per_stage = 2500;
  double decay = 1e-6;
  DecayLaw decay_law = DecayLaw::InverseTime;
  int batch_size = 64;
  double momentum = 0.9;
  double l2 = 1e-6;
  /// Hard epoch cap for single-domain runs; 0 means the automaton decides.
  int max_epochs = 0;
  /// Devel evaluation interval of multi-domain runs (history only).
  int eval_every_rounds = 250;

  void validate() const;
  bool operator==(const ScheduleConfig&) const = default;
};

/// inverse_time: lr / (1 + decay * step); exponential: lr * (1 - decay)^step.
double effective_lr(double stage_lr, std::uint64_t step, double decay = 1e-6,
                    DecayLaw law = DecayLaw::InverseTime);

/// Early stopping on devel UAR with staged learning rates. An epoch is stale
/// unless its UAR strictly exceeds the best so far; the `patience`-th
/// consecutive stale epoch moves to the next stage, or stops after the last.
class PatienceAutomaton {
 public:
  enum class Event { Improved, Stale, NextStage, Stop };

  PatienceAutomaton(std::size_t stages, int patience);

  Event observe(double uar);

  std::size_t stage() const { return stage_; }
  int epoch() const { return epoch_; }
  int stale() const { return stale_; }
  double best() const { return best_; }
  int best_epoch() const { return best_epoch_; }
  bool stopped() const { return stopped_; }

 private:
  std::size_t stages_;
  int patience_;
  std::size_t stage_ = 0;
  int epoch_ = 0;
  int stale_ = 0;
  double best_ = -1.0;
  int best_epoch_ = 0;
  bool stopped_ = false;
};

struct RoundRobinStep {
  std::size_t round = 0;   // 0-based
  std::size_t domain = 0;  // index into the domain order
  std::size_t stage = 0;
  double stage_lr = 0.0;
};

/// One batch per domain per round, `rounds_per_stage` rounds per LR stage.
std::vector<RoundRobinStep> round_robin_plan(std::size_t domains,
                                             const std::vector<double>& stage_lrs,
                                             std::size_t rounds_per_stage);

/// Endless stream of index batches over [0, n): one seeded permutation per
/// pass, consecutive slices of `batch` (the last one may be short), then a
/// fresh permutation.
class BatchStream {
 public:
  BatchStream(std::size_t n, std::size_t batch, std::uint64_t seed);

  std::vector<std::size_t> next();
  std::size_t pass() const { return pass_; }
  std::size_t batches_per_pass() const { return (n_ + batch_ - 1) / batch_; }

 private:
  void reshuffle();

  std::size_t n_;
  std::size_t batch_;
  std::uint64_t seed_;
  std::size_t pass_ = 0;
  std::size_t pos_ = 0;
  std::vector<std::size_t> order_;
};

}  // namespace emonet
