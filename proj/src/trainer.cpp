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

#include "emonet/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "emonet/kernels.hpp"
#include "emonet/wav.hpp"

namespace emonet {

namespace fs = std::filesystem;

AudioSet load_audio(const CorpusManifest& manifest, Partition partition,
                    const std::vector<std::string>& labels) {
  AudioSet set;
  set.corpus_id = manifest.corpus_id;
  set.labels = labels;
  for (const SampleRecord* rec : manifest.partition(partition)) {
    const auto it = std::find(labels.begin(), labels.end(), rec->label);
    if (it == labels.end()) {
      fail(ErrorKind::UnmappedLabel, "label '" + rec->label + "' of " + rec->sample_id +
                                         " is not in the domain's label space");
    }
    set.sample_ids.push_back(rec->sample_id);
    set.audio.push_back(read_wav(manifest.resolve(*rec)).samples);
    set.targets.push_back(static_cast<int>(it - labels.begin()));
  }
  return set;
}

PaddedBatch make_batch(const AudioSet& set, const std::vector<std::size_t>& indices, bool train,
                       std::uint64_t crop_seed, const FrontendConfig& cfg) {
  std::vector<MelSpectrogram> specs;
  specs.reserve(indices.size());
  for (std::size_t i : indices) {
    const auto& audio = set.audio.at(i);
    const std::vector<float> clip = train ? crop_random(audio, derive_seed(crop_seed, i), cfg)
                                          : crop_center(audio, cfg);
    specs.push_back(log_mel(clip, cfg));
  }
  return pad_batch(specs);
}

Predictions predict(Model<float>& model, const std::string& domain, const AudioSet& set,
                    const FrontendConfig& cfg, std::size_t batch_size) {
  Predictions p;
  p.corpus_id = set.corpus_id;
  p.labels = set.labels;
  p.sample_ids = set.sample_ids;
  p.reference = set.targets;
  ForwardOptions<float> opt;
  opt.mode = Mode::Eval;
  for (std::size_t start = 0; start < set.size(); start += batch_size) {
    std::vector<std::size_t> idx;
    for (std::size_t i = start; i < std::min(set.size(), start + batch_size); ++i) idx.push_back(i);
    const PaddedBatch batch = make_batch(set, idx, false, 0, cfg);
    const Tensor<float> logits = model.forward(batch.input, batch.valid_frames, domain, opt);
    const std::size_t k = logits.dim(1);
    for (std::size_t b = 0; b < idx.size(); ++b) {
      const float* row = logits.data() + b * k;
      p.prediction.push_back(static_cast<int>(std::max_element(row, row + k) - row));
    }
  }
  return p;
}

std::vector<double> class_weight_vector(const AudioSet& train) {
  if (train.size() == 0) fail(ErrorKind::EmptyPartition, train.corpus_id + ": empty train set");
  std::vector<std::size_t> counts(train.labels.size(), 0);
  for (int t : train.targets) ++counts[static_cast<std::size_t>(t)];
  std::size_t present = 0;
  for (std::size_t c : counts) present += c > 0 ? 1 : 0;
  std::vector<double> w(counts.size(), 1.0);
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] > 0) {
      w[k] = static_cast<double>(train.size()) /
             (static_cast<double>(present) * static_cast<double>(counts[k]));
    }
  }
  return w;
}

Json to_json(const HistoryRecord& r) {
  Json j{{"step", r.step}, {"epoch", r.epoch}, {"domain", r.domain},
         {"stage", r.stage}, {"lr", r.lr},     {"train_loss", r.train_loss},
         {"devel_uar", r.devel_uar}, {"wall_ms", r.wall_ms}, {"threads", r.threads}};
  return j;
}

void write_history(const fs::path& path, const std::vector<HistoryRecord>& history,
                   bool with_wall_clock) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot write " + path.string());
  for (const auto& r : history) {
    Json j = to_json(r);
    if (!with_wall_clock) j.erase("wall_ms");
    out << j.dump() << '\n';
  }
}

std::vector<Tensor<float>> snapshot_values(const Model<float>& model) {
  std::vector<Tensor<float>> out;
  for (const auto& p : model.store().params()) out.push_back(p.value);
  return out;
}

void restore_values(Model<float>& model, const std::vector<Tensor<float>>& values) {
  auto& params = model.store().params();
  if (values.size() != params.size()) {
    fail(ErrorKind::ShapeMismatch, "snapshot does not match the model's parameters");
  }
  for (std::size_t i = 0; i < params.size(); ++i) params[i].value = values[i];
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// One SGD step on one batch; returns the batch loss.
double train_step(Model<float>& model, const std::string& domain, const AudioSet& set,
                  const std::vector<std::size_t>& idx, const std::vector<double>& weights,
                  const std::set<std::string>& trainable, double lr, const SgdSettings& sgd,
                  std::uint64_t crop_seed, Rng& dropout_rng, const FrontendConfig& cfg) {
  const PaddedBatch batch = make_batch(set, idx, true, crop_seed, cfg);
  std::vector<int> labels;
  labels.reserve(idx.size());
  for (std::size_t i : idx) labels.push_back(set.targets[i]);
  ForwardOptions<float> opt;
  opt.mode = Mode::Train;
  opt.trainable = &trainable;
  opt.dropout_rng = &dropout_rng;
  model.store().zero_grad();
  const Tensor<float> logits = model.forward(batch.input, batch.valid_frames, domain, opt);
  Tensor<float> dlogits;
  const double loss = softmax_xent(logits, labels, weights, &dlogits);
  if (!std::isfinite(loss)) {
    fail(ErrorKind::DivergedLoss, "loss became " + std::to_string(loss) + " on domain '" +
                                      domain + "' at lr " + std::to_string(lr));
  }
  model.backward(dlogits, &trainable);
  sgd_step(model.store(), lr, sgd, &trainable);
  return loss;
}

std::string engine_state(const Rng& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

void require_sets(const DomainData& data) {
  if (data.train.size() == 0) fail(ErrorKind::EmptyPartition, data.id + ": train partition is empty");
  if (data.devel.size() == 0) fail(ErrorKind::EmptyPartition, data.id + ": devel partition is empty");
}

}  // namespace

TrainResult train_single(Model<float>& model, const DomainData& data, Regime regime,
                         const ScheduleConfig& schedule, const FrontendConfig& frontend,
                         std::uint64_t seed, const ProgressFn& progress) {
  schedule.validate();
  require_sets(data);
  model.domain(data.id);
  const auto start = Clock::now();
  const std::set<std::string> trainable = model.trainable_set(regime, data.id);
  const bool finetune = regime == Regime::HeadOnly || regime == Regime::FullFinetune;
  const std::vector<double>& lrs = finetune ? schedule.finetune_lrs : schedule.stage_lrs;
  const std::vector<double> weights = class_weight_vector(data.train);
  const SgdSettings sgd{schedule.momentum, schedule.l2};

  PatienceAutomaton automaton(lrs.size(), schedule.patience);
  BatchStream stream(data.train.size(), static_cast<std::size_t>(schedule.batch_size),
                     derive_seed(seed, "batches", data.id));
  Rng dropout_rng(derive_seed(seed, "dropout", data.id));

  TrainResult result;
  result.best_values = snapshot_values(model);
  std::uint64_t step = 0;
  for (int epoch = 1;; ++epoch) {
    const std::size_t stage = automaton.stage();
    double loss_sum = 0.0;
    double lr = 0.0;
    const std::size_t batches = stream.batches_per_pass();
    for (std::size_t k = 0; k < batches; ++k) {
      lr = effective_lr(lrs[stage], step, schedule.decay, schedule.decay_law);
      loss_sum += train_step(model, data.id, data.train, stream.next(), weights, trainable, lr,
                             sgd, derive_seed(seed, "crop", step), dropout_rng, frontend);
      ++step;
    }
    const Predictions devel = predict(model, data.id, data.devel, frontend,
                                      static_cast<std::size_t>(schedule.batch_size));
    HistoryRecord rec;
    rec.step = step;
    rec.epoch = static_cast<std::uint64_t>(epoch);
    rec.domain = data.id;
    rec.stage = stage;
    rec.lr = lr;
    rec.train_loss = loss_sum / static_cast<double>(batches);
    rec.devel_uar = uar(confusion(devel.reference, devel.prediction, devel.labels.size()));
    rec.wall_ms = elapsed_ms(start);
    rec.threads = kernels::thread_count();
    result.history.push_back(rec);
    if (progress) progress(rec);

    const auto event = automaton.observe(rec.devel_uar);
    if (event == PatienceAutomaton::Event::Improved) {
      result.best_values = snapshot_values(model);
      result.best_uar = automaton.best();
      result.best_epoch = automaton.best_epoch();
    }
    if (event == PatienceAutomaton::Event::Stop) break;
    if (schedule.max_epochs > 0 && epoch >= schedule.max_epochs) break;
  }
  result.steps = step;
  result.rng_state = engine_state(dropout_rng);
  return result;
}

RoundRobinResult train_round_robin(Model<float>& model, const std::vector<DomainData>& data,
                                   const ScheduleConfig& schedule, const FrontendConfig& frontend,
                                   std::uint64_t seed, bool categorical,
                                   const ProgressFn& progress) {
  schedule.validate();
  if (data.empty()) fail(ErrorKind::EmptyPartition, "round robin without domains");
  if (categorical && data.size() < 2) {
    fail(ErrorKind::SingleDomainCategorical,
         "categorical multi-domain training needs at least two corpora");
  }
  const auto start = Clock::now();
  std::vector<std::set<std::string>> trainable;
  std::vector<std::vector<double>> weights;
  std::vector<BatchStream> streams;
  std::vector<double> loss_sum(data.size(), 0.0);
  std::vector<std::size_t> loss_count(data.size(), 0);
  for (const auto& d : data) {
    require_sets(d);
    trainable.push_back(model.trainable_set(Regime::MultiDomain, d.id));
    weights.push_back(class_weight_vector(d.train));
    streams.emplace_back(d.train.size(), static_cast<std::size_t>(schedule.batch_size),
                         derive_seed(seed, "batches", d.id));
  }
  const SgdSettings sgd{schedule.momentum, schedule.l2};
  Rng dropout_rng(derive_seed(seed, "dropout", "round_robin"));
  const auto plan = round_robin_plan(data.size(), schedule.stage_lrs,
                                     static_cast<std::size_t>(schedule.rounds_per_stage));

  RoundRobinResult result;
  std::vector<HistoryRecord>& history = result.history;
  std::uint64_t step = 0;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const RoundRobinStep& s = plan[i];
    const DomainData& d = data[s.domain];
    const double lr = effective_lr(s.stage_lr, step, schedule.decay, schedule.decay_law);
    loss_sum[s.domain] += train_step(model, d.id, d.train, streams[s.domain].next(),
                                     weights[s.domain], trainable[s.domain], lr, sgd,
                                     derive_seed(seed, "crop", step), dropout_rng, frontend);
    ++loss_count[s.domain];
    ++step;

    const bool round_end = s.domain + 1 == data.size();
    const std::size_t rounds_done = s.round + 1;
    const bool last = i + 1 == plan.size();
    if (!round_end ||
        (rounds_done % static_cast<std::size_t>(schedule.eval_every_rounds) != 0 && !last)) {
      continue;
    }
    for (std::size_t k = 0; k < data.size(); ++k) {
      const Predictions devel = predict(model, data[k].id, data[k].devel, frontend,
                                        static_cast<std::size_t>(schedule.batch_size));
      HistoryRecord rec;
      rec.step = rounds_done;
      rec.domain = data[k].id;
      rec.stage = s.stage;
      rec.lr = lr;
      rec.train_loss = loss_count[k] ? loss_sum[k] / static_cast<double>(loss_count[k]) : 0.0;
      rec.devel_uar = uar(confusion(devel.reference, devel.prediction, devel.labels.size()));
      rec.wall_ms = elapsed_ms(start);
      rec.threads = kernels::thread_count();
      history.push_back(rec);
      if (progress) progress(rec);
      loss_sum[k] = 0.0;
      loss_count[k] = 0;
    }
  }
  result.steps = step;
  result.rng_state = engine_state(dropout_rng);
  return result;
}

TransferResult transfer(const Model<float>& pretrained, const DomainSpec& target,
                        const DomainData& data, Regime regime, const ScheduleConfig& schedule,
                        const FrontendConfig& frontend, std::uint64_t seed,
                        const std::string& bn_source, const ProgressFn& progress) {
  if (regime != Regime::Adapters && regime != Regime::HeadOnly &&
      regime != Regime::FullFinetune) {
    fail(ErrorKind::UnknownRegime, "transfer supports adapters, head_only and full_finetune");
  }
  if (pretrained.domains().empty()) {
    fail(ErrorKind::CorruptCheckpoint, "pretrained model has no domains");
  }
  TransferResult out{pretrained, {}};
  out.model.add_domain(target);
  out.model.copy_backbone_state(bn_source.empty() ? pretrained.domains().front().id : bn_source,
                                target.id);
  out.model.reinitialize_domain(target.id, derive_seed(seed, "transfer"));
  out.train = train_single(out.model, data, regime, schedule, frontend, seed, progress);
  return out;
}

}  // namespace emonet
