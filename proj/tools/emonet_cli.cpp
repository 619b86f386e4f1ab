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

// Command-line entry point: fixture generation, inspection, features,
// training regimes, evaluation and significance comparison.

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>

#include "emonet/checkpoint.hpp"
#include "emonet/corpus.hpp"
#include "emonet/eval.hpp"
#include "emonet/grad_check.hpp"
#include "emonet/kernels.hpp"
#include "emonet/run_config.hpp"
#include "emonet/synth.hpp"
#include "emonet/trainer.hpp"

namespace fs = std::filesystem;
using namespace emonet;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidConfig:
    case ErrorKind::UnknownRegime:
      return kUsage;
    case ErrorKind::DivergedLoss:
      return kNumeric;
    default:
      return kData;
  }
}

void print_record(const HistoryRecord& r) {
  std::cerr << std::fixed << std::setprecision(4);
  if (r.epoch > 0) {
    std::cerr << "[" << r.domain << "] epoch " << r.epoch;
  } else {
    std::cerr << "[" << r.domain << "] round " << r.step;
  }
  std::cerr << "  stage " << r.stage << "  lr " << r.lr << "  loss " << r.train_loss
            << "  devel UAR " << r.devel_uar << '\n';
}

// Audio paths made absolute so manifests from different directories merge.
CorpusManifest absolutize(CorpusManifest m) {
  for (auto& rec : m.records) rec.audio_path = fs::absolute(m.resolve(rec)).string();
  m.base_dir.clear();
  return m;
}

DomainData domain_data(const CorpusManifest& m, const std::string& id,
                       const std::vector<std::string>& labels) {
  return {id, load_audio(m, Partition::Train, labels), load_audio(m, Partition::Devel, labels)};
}

RunConfig load_config(const std::string& path, const std::optional<std::uint64_t>& seed,
                      const std::string& out) {
  RunConfig cfg = load_run_config(path);
  if (seed) cfg.seed = *seed;
  if (!out.empty()) cfg.output_dir = out;
  return cfg;
}

CorpusManifest single_manifest(const RunConfig& cfg) {
  if (cfg.manifests.size() != 1) {
    fail(ErrorKind::InvalidConfig, "this command expects exactly one manifest in the config");
  }
  return load_manifest(cfg.manifests.front());
}

void save_training(const fs::path& out, Model<float>& model, const TrainResult& r,
                   const FrontendConfig& frontend) {
  save_checkpoint(out / "final", model, frontend, r.rng_state);
  const auto final_values = snapshot_values(model);
  restore_values(model, r.best_values);
  save_checkpoint(out / "best", model, frontend, r.rng_state);
  restore_values(model, final_values);
  write_history(out / "history.jsonl", r.history);
  std::cout << "best devel UAR " << std::fixed << std::setprecision(4) << r.best_uar
            << " at epoch " << r.best_epoch << " (" << r.steps << " steps); checkpoints in "
            << out.string() << '\n';
}

int cmd_synth(const std::string& spec_path, const std::string& out) {
  const SynthSpec spec = synth_spec_from_json(read_json_file(spec_path));
  const auto manifests = generate(spec, out);
  for (const auto& m : manifests) {
    std::cout << m.corpus_id << ": " << m.size() << " samples, " << m.label_space.size()
              << " classes -> " << (fs::path(out) / (m.corpus_id + ".csv")).string() << '\n';
  }
  return kOk;
}

int cmd_inspect(const std::vector<std::string>& paths) {
  std::vector<CorpusManifest> manifests;
  std::map<std::string, double> durations;
  for (const auto& p : paths) {
    manifests.push_back(load_manifest(p));
    for (const auto& rec : manifests.back().records) {
      try {
        durations[sample_key(rec)] = wav_duration(manifests.back().resolve(rec));
      } catch (const Error&) {
        // counted as a missing duration
      }
    }
    for (const auto& w : manifests.back().warnings) std::cerr << "warning: " << w << '\n';
  }
  std::cout << format_inspection(inspect(manifests, durations));
  return kOk;
}

int cmd_features(const std::string& manifest_path, const std::string& out) {
  const CorpusManifest m = load_manifest(manifest_path);
  const FrontendConfig cfg;
  std::size_t n = 0;
  for (const auto& rec : m.records) {
    const fs::path dir = fs::path(out) / rec.corpus_id;
    fs::create_directories(dir);
    save_mels(dir / (rec.sample_id + ".mels"), log_mel(read_wav(m.resolve(rec)).samples, cfg));
    ++n;
  }
  std::cout << n << " MELS files written to " << out << '\n';
  return kOk;
}

int cmd_train(const RunConfig& cfg) {
  if (cfg.regime != Regime::Scratch && cfg.regime != Regime::FullFinetune) {
    fail(ErrorKind::InvalidConfig, "train runs the scratch regime; use transfer or train-multi");
  }
  write_effective_config(cfg);
  const CorpusManifest m = single_manifest(cfg);
  Model<float> model(cfg.model, cfg.seed);
  model.add_domain({m.corpus_id, m.label_space});
  const DomainData data = domain_data(m, m.corpus_id, m.label_space);
  const TrainResult r = train_single(model, data, Regime::Scratch, cfg.schedule, cfg.frontend,
                                     cfg.seed, print_record);
  save_training(cfg.output_dir, model, r, cfg.frontend);
  return kOk;
}

int cmd_train_multi(RunConfig cfg, const std::string& target_flag) {
  if (!target_flag.empty()) cfg.target = parse_multi_target(target_flag);
  write_effective_config(cfg);
  std::vector<CorpusManifest> manifests;
  for (const auto& p : cfg.manifests) manifests.push_back(absolutize(load_manifest(p)));
  if (manifests.empty()) fail(ErrorKind::InvalidConfig, "config lists no manifests");

  std::vector<std::pair<CorpusManifest, std::vector<std::string>>> domains;
  auto av = [&](AvTarget t) {
    std::vector<CorpusManifest> out;
    for (const auto& m : manifests) out.push_back(relabel_av(balance_subsample(m, t, cfg.seed), t));
    return out;
  };
  switch (cfg.target) {
    case MultiTarget::Categorical:
      for (const auto& m : manifests) domains.emplace_back(m, m.label_space);
      break;
    case MultiTarget::Arousal:
    case MultiTarget::Valence: {
      const AvTarget t = cfg.target == MultiTarget::Arousal ? AvTarget::Arousal : AvTarget::Valence;
      for (auto& m : av(t)) domains.emplace_back(m, av_class_names(t));
      break;
    }
    case MultiTarget::ArousalValence:
      for (AvTarget t : {AvTarget::Arousal, AvTarget::Valence}) {
        std::vector<SampleRecord> records;
        for (const auto& m : av(t)) records.insert(records.end(), m.records.begin(), m.records.end());
        const std::string id(to_string(t));
        for (auto& r : records) r.corpus_id = id;
        domains.emplace_back(make_manifest(std::move(records), id), av_class_names(t));
      }
      break;
  }

  Model<float> model(cfg.model, cfg.seed);
  std::vector<DomainData> data;
  for (const auto& [m, labels] : domains) {
    model.add_domain({m.corpus_id, labels});
    data.push_back(domain_data(m, m.corpus_id, labels));
  }
  const RoundRobinResult r =
      train_round_robin(model, data, cfg.schedule, cfg.frontend, cfg.seed,
                        cfg.target == MultiTarget::Categorical, print_record);
  save_checkpoint(cfg.output_dir / "shared", model, cfg.frontend, r.rng_state);
  write_history(cfg.output_dir / "history.jsonl", r.history);
  std::cout << r.steps << " steps over " << data.size() << " domains; checkpoint in "
            << (cfg.output_dir / "shared").string() << '\n';
  return kOk;
}

int cmd_transfer(const RunConfig& cfg, const std::string& from, const std::string& regime_flag,
                 const std::string& bn_source) {
  const std::map<std::string, Regime> regimes = {{"adapters", Regime::Adapters},
                                                 {"head", Regime::HeadOnly},
                                                 {"head_only", Regime::HeadOnly},
                                                 {"full", Regime::FullFinetune},
                                                 {"full_finetune", Regime::FullFinetune}};
  const auto it = regimes.find(regime_flag);
  if (it == regimes.end()) {
    fail(ErrorKind::UnknownRegime, "transfer regime must be adapters, head or full");
  }
  write_effective_config(cfg);
  const Checkpoint ck = load_checkpoint(from);
  const CorpusManifest m = single_manifest(cfg);
  const DomainData data = domain_data(m, m.corpus_id, m.label_space);
  TransferResult r = transfer(ck.model, {m.corpus_id, m.label_space}, data, it->second,
                              cfg.schedule, ck.frontend, cfg.seed, bn_source, print_record);
  save_training(cfg.output_dir, r.model, r.train, ck.frontend);
  return kOk;
}

int cmd_map_av(const std::string& manifest_path, const std::string& target, const std::string& out,
               std::uint64_t seed) {
  const AvTarget t = parse_av_target(target);
  const CorpusManifest m = load_manifest(manifest_path);
  CorpusManifest mapped = relabel_av(balance_subsample(m, t, seed), t);
  const fs::path out_dir = fs::absolute(fs::path(out)).parent_path();
  for (auto& rec : mapped.records) {
    rec.audio_path = fs::relative(fs::absolute(m.resolve(rec)), out_dir).string();
  }
  for (const auto& w : mapped.warnings) std::cerr << "warning: " << w << '\n';
  save_manifest(out, mapped);
  std::cout << mapped.size() << " of " << m.size() << " samples kept -> " << out << '\n';
  return kOk;
}

int cmd_eval(const std::string& ckpt, const std::string& manifest_path,
             const std::string& partition, std::string domain, const std::string& out) {
  Checkpoint ck = load_checkpoint(ckpt);
  const CorpusManifest m = load_manifest(manifest_path);
  if (domain.empty()) domain = m.corpus_id;
  const DomainSpec& spec = ck.model.domain(domain);
  const AudioSet set = load_audio(m, parse_partition(partition), spec.labels);
  if (set.size() == 0) fail(ErrorKind::EmptyPartition, "partition '" + partition + "' is empty");
  const Predictions p = predict(ck.model, domain, set, ck.frontend);
  const EvalReport report = make_report(p, partition);
  const fs::path dir = out.empty() ? fs::path(ckpt) / ("eval_" + partition) : fs::path(out);
  fs::create_directories(dir);
  write_json_file(dir / "report.json", to_json(report));
  save_predictions(dir / "predictions.csv", p);
  std::cout << format_report(report) << "report and predictions in " << dir.string() << '\n';
  return kOk;
}

int cmd_compare(const std::string& baseline, const std::vector<std::string>& candidates,
                const std::string& json_out) {
  std::vector<std::pair<std::string, Predictions>> runs;
  for (const auto& c : candidates) runs.emplace_back(fs::path(c).stem().string(), load_predictions(c));
  const CompareTable t = compare_report(load_predictions(baseline), runs);
  std::cout << format_compare(t);
  if (!json_out.empty()) write_json_file(json_out, to_json(t));
  return kOk;
}

int cmd_grad_check(bool full, std::uint64_t seed) {
  std::vector<GradCheckResult> results = check_ops(seed);
  if (full) results.push_back(check_model(ModelConfig{}, 2, 12, 300, seed));
  bool ok = true;
  std::cout << std::left << std::setw(42) << "check" << std::right << std::setw(8) << "coords"
            << std::setw(14) << "max rel err" << std::setw(11) << "restepped" << "  status\n";
  for (const auto& r : results) {
    std::cout << std::left << std::setw(42) << r.name << std::right << std::setw(8)
              << r.coordinates << std::setw(14) << std::scientific << std::setprecision(2)
              << r.max_relative_error << std::setw(11) << r.restepped << "  " << (r.passed ? "ok" : "FAIL (" + r.worst + ")")
              << '\n';
    ok = ok && r.passed;
  }
  std::cout << (ok ? "all gradient checks passed\n" : "gradient check failed\n");
  return ok ? kOk : kNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  kernels::configure_threads_from_env();
  CLI::App app{"Multi-domain speech emotion recognition with residual adapters"};
  app.require_subcommand(1);

  std::string spec_path, out, config_path, target, from, regime, manifest, partition = "test",
                                                                           domain, ckpt, baseline,
                                                                           json_out, bn_source;
  std::vector<std::string> manifests, candidates;
  std::optional<std::uint64_t> seed;
  std::uint64_t map_seed = 0;
  std::uint64_t check_seed = 1;
  bool full = false;

  auto* synth = app.add_subcommand("synth", "Generate the synthetic fixture corpora");
  synth->add_option("--spec", spec_path, "Synthesis spec (JSON)")->required();
  synth->add_option("--out", out, "Output directory")->required();

  auto* insp = app.add_subcommand("inspect", "Summarise corpora");
  insp->add_option("--manifest", manifests, "Manifest CSV files")->required();

  auto* feat = app.add_subcommand("features", "Extract log-mel MELS files");
  feat->add_option("--manifest", manifest, "Manifest CSV")->required();
  feat->add_option("--out", out, "Output directory")->required();

  auto* train = app.add_subcommand("train", "Train a single-domain model from scratch");
  train->add_option("--config", config_path, "Run config (JSON)")->required();
  train->add_option("--seed", seed, "Override the config seed");
  train->add_option("--out", out, "Override the output directory");

  auto* multi = app.add_subcommand("train-multi", "Round-robin multi-domain training");
  multi->add_option("--config", config_path, "Run config (JSON)")->required();
  multi->add_option("--target", target, "categorical|arousal|valence|av");
  multi->add_option("--seed", seed, "Override the config seed");
  multi->add_option("--out", out, "Override the output directory");

  auto* xfer = app.add_subcommand("transfer", "Transfer a pretrained model to a new corpus");
  xfer->add_option("--from", from, "Pretrained checkpoint directory")->required();
  xfer->add_option("--regime", regime, "adapters|head|full")->required();
  xfer->add_option("--config", config_path, "Run config (JSON)")->required();
  xfer->add_option("--bn-source", bn_source, "Domain whose BN state seeds the new domain");
  xfer->add_option("--seed", seed, "Override the config seed");
  xfer->add_option("--out", out, "Override the output directory");

  auto* mapav = app.add_subcommand("map-av", "Map labels to arousal/valence and balance");
  mapav->add_option("--manifest", manifest, "Manifest CSV")->required();
  mapav->add_option("--target", target, "arousal|valence")->required();
  mapav->add_option("--out", out, "Output manifest CSV")->required();
  mapav->add_option("--seed", map_seed, "Subsampling seed");

  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a partition");
  ev->add_option("--ckpt", ckpt, "Checkpoint directory")->required();
  ev->add_option("--manifest", manifest, "Manifest CSV")->required();
  ev->add_option("--partition", partition, "train|devel|test");
  ev->add_option("--domain", domain, "Domain id (defaults to the corpus id)");
  ev->add_option("--out", out, "Report directory");

  auto* cmp = app.add_subcommand("compare", "McNemar comparison of prediction files");
  cmp->add_option("--baseline", baseline, "Baseline predictions CSV")->required();
  cmp->add_option("--candidate", candidates, "Candidate predictions CSV")->required();
  cmp->add_option("--json", json_out, "Also write the table as JSON");

  auto* grad = app.add_subcommand("grad-check", "Finite-difference gradient verification");
  grad->add_flag("--full", full, "Include the full model");
  grad->add_option("--seed", check_seed, "Seed for inputs and coordinate sampling");

  auto* avt = app.add_subcommand("av-table", "Print the category to arousal/valence table");
  avt->add_option("--out", out, "Write to a file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*synth) return cmd_synth(spec_path, out);
    if (*insp) return cmd_inspect(manifests);
    if (*feat) return cmd_features(manifest, out);
    if (*train) return cmd_train(load_config(config_path, seed, out));
    if (*multi) return cmd_train_multi(load_config(config_path, seed, out), target);
    if (*xfer) return cmd_transfer(load_config(config_path, seed, out), from, regime, bn_source);
    if (*mapav) return cmd_map_av(manifest, target, out, map_seed);
    if (*ev) return cmd_eval(ckpt, manifest, partition, domain, out);
    if (*cmp) return cmd_compare(baseline, candidates, json_out);
    if (*grad) return cmd_grad_check(full, check_seed);
    if (*avt) {
      if (out.empty()) {
        export_av_table(std::cout);
      } else {
        std::ofstream f(out);
        export_av_table(f);
      }
      return kOk;
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}
