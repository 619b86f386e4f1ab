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

#include "emonet/schedule.hpp"

#include <cmath>
#include <numeric>

#include "emonet/error.hpp"
#include "emonet/random.hpp"

namespace emonet {

DecayLaw parse_decay_law(std::string_view text) {
  if (text == "inverse_time") return DecayLaw::InverseTime;
  if (text == "exponential") return DecayLaw::Exponential;
  fail(ErrorKind::InvalidConfig, "unknown decay law '" + std::string(text) + "'");
}

std::string_view to_string(DecayLaw law) {
  return law == DecayLaw::InverseTime ? "inverse_time" : "exponential";
}

void ScheduleConfig::validate() const {
  auto bad = [](const std::string& why) { fail(ErrorKind::InvalidConfig, "schedule: " + why); };
  for (const auto* lrs : {&stage_lrs, &finetune_lrs}) {
    if (lrs->empty()) bad("learning-rate ladder is empty");
    for (std::size_t i = 0; i < lrs->size(); ++i) {
      if (!((*lrs)[i] > 0.0)) bad("learning rates must be positive");
      if (i > 0 && !((*lrs)[i] < (*lrs)[i - 1])) bad("learning rates must strictly decrease");
    }
  }
  if (patience < 1) bad("patience must be >= 1");
  if (rounds_per_stage < 1) bad("rounds_per_stage must be >= 1");
  if (decay < 0.0 || decay >= 1.0) bad("decay must be in [0, 1)");
  if (batch_size < 1) bad("batch_size must be >= 1");
  if (momentum < 0.0 || momentum >= 1.0) bad("momentum must be in [0, 1)");
  if (l2 < 0.0) bad("l2 must be >= 0");
  if (max_epochs < 0) bad("max_epochs must be >= 0");
  if (eval_every_rounds < 1) bad("eval_every_rounds must be >= 1");
}

double effective_lr(double stage_lr, std::uint64_t step, double decay, DecayLaw law) {
  const double t = static_cast<double>(step);
  if (law == DecayLaw::Exponential) return stage_lr * std::pow(1.0 - decay, t);
  return stage_lr / (1.0 + decay * t);
}

PatienceAutomaton::PatienceAutomaton(std::size_t stages, int patience)
    : stages_(stages), patience_(patience) {
  if (stages == 0 || patience < 1) {
    fail(ErrorKind::InvalidConfig, "patience automaton needs >= 1 stage and patience >= 1");
  }
}

PatienceAutomaton::Event PatienceAutomaton::observe(double uar) {
  if (stopped_) fail(ErrorKind::InvalidConfig, "patience automaton already stopped");
  ++epoch_;
  if (uar > best_) {
    best_ = uar;
    best_epoch_ = epoch_;
    stale_ = 0;
    return Event::Improved;
  }
  if (++stale_ < patience_) return Event::Stale;
  stale_ = 0;
  if (stage_ + 1 < stages_) {
    ++stage_;
    return Event::NextStage;
  }
  stopped_ = true;
  return Event::Stop;
}

std::vector<RoundRobinStep> round_robin_plan(std::size_t domains,
                                             const std::vector<double>& stage_lrs,
                                             std::size_t rounds_per_stage) {
  std::vector<RoundRobinStep> plan;
  plan.reserve(domains * stage_lrs.size() * rounds_per_stage);
  std::size_t round = 0;
  for (std::size_t s = 0; s < stage_lrs.size(); ++s) {
    for (std::size_t r = 0; r < rounds_per_stage; ++r, ++round) {
      for (std::size_t d = 0; d < domains; ++d) plan.push_back({round, d, s, stage_lrs[s]});
    }
  }
  return plan;
}

BatchStream::BatchStream(std::size_t n, std::size_t batch, std::uint64_t seed)
    : n_(n), batch_(batch), seed_(seed) {
  if (n == 0) fail(ErrorKind::EmptyPartition, "batch stream over an empty set");
  if (batch == 0) fail(ErrorKind::InvalidConfig, "batch size must be positive");
  reshuffle();
}

void BatchStream::reshuffle() {
  order_.resize(n_);
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  Rng rng(derive_seed(seed_, "pass", pass_));
  shuffle(std::span<std::size_t>(order_), rng);
  pos_ = 0;
}

std::vector<std::size_t> BatchStream::next() {
  if (pos_ >= n_) {
    ++pass_;
    reshuffle();
  }
  const std::size_t end = std::min(n_, pos_ + batch_);
  std::vector<std::size_t> out(order_.begin() + static_cast<std::ptrdiff_t>(pos_),
                               order_.begin() + static_cast<std::ptrdiff_t>(end));
  pos_ = end;
  return out;
}

}  // namespace emonet
