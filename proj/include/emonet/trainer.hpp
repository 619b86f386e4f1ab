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
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "emonet/corpus.hpp"
#include "emonet/eval.hpp"
#include "emonet/frontend.hpp"
#include "emonet/model.hpp"
#include "emonet/schedule.hpp"

namespace emonet {

/// Decoded audio of one partition with class indices into `labels`.
struct AudioSet {
  std::string corpus_id;
  std::vector<std::string> labels;
  std::vector<std::string> sample_ids;
  std::vector<std::vector<float>> audio;
  std::vector<int> targets;

  std::size_t size() const { return audio.size(); }
};

/// Loads and decodes every record of `partition`; labels index `labels`
/// (UnmappedLabel for a label outside it).
AudioSet load_audio(const CorpusManifest& manifest, Partition partition,
                    const std::vector<std::string>& labels);

/// Crops (seeded random for training, centre otherwise), extracts log-mels
/// and zero-pads to the longest item.
PaddedBatch make_batch(const AudioSet& set, const std::vector<std::size_t>& indices, bool train,
                       std::uint64_t crop_seed, const FrontendConfig& cfg);

/// Eval-mode predictions over a whole set, in set order.
Predictions predict(Model<float>& model, const std::string& domain, const AudioSet& set,
                    const FrontendConfig& cfg, std::size_t batch_size = 64);

/// Class weights N / (K n_c) in label order.
std::vector<double> class_weight_vector(const AudioSet& train);

struct HistoryRecord {
  std::uint64_t step = 0;
  std::uint64_t epoch = 0;  // 0 for round-robin records
  std::string domain;
  std::size_t stage = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double devel_uar = 0.0;
  double wall_ms = 0.0;
  int threads = 1;
};

Json to_json(const HistoryRecord& r);
/// JSON-lines; wall_ms is left out when `with_wall_clock` is false.
void write_history(const std::filesystem::path& path, const std::vector<HistoryRecord>& history,
                   bool with_wall_clock = true);

using ProgressFn = std::function<void(const HistoryRecord&)>;

struct DomainData {
  std::string id;
  AudioSet train;
  AudioSet devel;
};

struct TrainResult {
  std::vector<HistoryRecord> history;
  std::vector<Tensor<float>> best_values;  // store order
  double best_uar = 0.0;
  int best_epoch = 0;
  std::uint64_t steps = 0;
  std::string rng_state;  // dropout engine state at the end of training
};

/// Copies stored values back into the model (store order).
void restore_values(Model<float>& model, const std::vector<Tensor<float>>& values);
std::vector<Tensor<float>> snapshot_values(const Model<float>& model);

/// Epochs of ceil(N / batch) seeded batches with staged learning rates and
/// early stopping on devel UAR. The model ends in its final state; the best
/// state is returned in the result.
TrainResult train_single(Model<float>& model, const DomainData& data, Regime regime,
                         const ScheduleConfig& schedule, const FrontendConfig& frontend,
                         std::uint64_t seed, const ProgressFn& progress = {});

/// Round-robin over all registered domains of `data`: one batch per domain
/// per round, `rounds_per_stage` rounds per stage, shared plus the active
/// domain's parameters updated.
struct RoundRobinResult {
  std::vector<HistoryRecord> history;
  std::uint64_t steps = 0;
  std::string rng_state;
};
RoundRobinResult train_round_robin(Model<float>& model, const std::vector<DomainData>& data,
                                   const ScheduleConfig& schedule, const FrontendConfig& frontend,
                                   std::uint64_t seed, bool categorical = true,
                                   const ProgressFn& progress = {});

/// Registers `target` on a copy of the pretrained model with fresh modules
/// (backbone BN state copied from `bn_source`, zero adapters, re-drawn
/// head) and trains it under `regime`.
struct TransferResult {
  Model<float> model;
  TrainResult train;
};
TransferResult transfer(const Model<float>& pretrained, const DomainSpec& target,
                        const DomainData& data, Regime regime, const ScheduleConfig& schedule,
                        const FrontendConfig& frontend, std::uint64_t seed,
                        const std::string& bn_source = {}, const ProgressFn& progress = {});

}  // namespace emonet
