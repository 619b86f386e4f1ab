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

// Acceptance run: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (0 when everything holds).
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "emonet/checkpoint.hpp"
#include "emonet/error.hpp"
#include "emonet/eval.hpp"
#include "emonet/frontend.hpp"
#include "emonet/model.hpp"
#include "emonet/run_config.hpp"
#include "emonet/schedule.hpp"
#include "emonet/trainer.hpp"

using namespace emonet;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

std::vector<std::string> labels(std::size_t k) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back("c" + std::to_string(i));
  return out;
}

Tensor<float> noise(std::size_t batch, std::size_t frames, std::uint64_t seed) {
  Rng rng(seed);
  Tensor<float> t({batch, 64, frames, 1});
  for (auto& v : t.values()) v = static_cast<float>(standard_normal(rng));
  return t;
}

std::size_t count_params(const Model<float>& m, const std::string& prefix) {
  std::size_t n = 0;
  for (const auto& p : m.store().params()) {
    if (!p.trainable() || !p.name.starts_with(prefix)) continue;
    std::size_t s = 1;
    for (auto d : p.value.shape()) s *= d;
    n += s;
  }
  return n;
}

// Parameter name -> raw bytes, read straight from a checkpoint directory.
std::map<std::string, std::string> checkpoint_bytes(const fs::path& dir) {
  const Json meta = read_json_file(dir / "meta.json");
  const std::string blob = slurp(dir / "params.bin");
  std::map<std::string, std::string> out;
  for (const auto& e : meta.at("parameters")) {
    std::size_t len = sizeof(float);
    for (auto d : e.at("shape")) len *= d.get<std::size_t>();
    out[e.at("name").get<std::string>()] = blob.substr(e.at("offset").get<std::size_t>(), len);
  }
  return out;
}

std::string strip_wall_clock(const fs::path& history) {
  std::istringstream in(slurp(history));
  std::string line, out;
  while (std::getline(in, line)) {
    Json j = Json::parse(line);
    j.erase("wall_ms");
    out += j.dump() + '\n';
  }
  return out;
}

// Runs the CLI and the checks that depend on its artifacts. Each stage runs
// at most once, on first use.
class Fixture {
 public:
  explicit Fixture(fs::path work) : work_(std::move(work)) {}

  int cli(const std::string& args, const std::string& log) {
    fs::create_directories(work_ / "logs");
    const std::string cmd = std::string(EMONET_CLI) + " " + args + " > \"" +
                            (work_ / "logs" / (log + ".log")).string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  const fs::path& work() const { return work_; }

  void prepare() {
    if (prepared_) return;
    fs::remove_all(work_);
    fs::create_directories(work_);
    fs::copy_file(fs::path(EMONET_FIXTURES) / "fixture.json", work_ / "fixture.json");
    const fs::path spec = fs::path(EMONET_FIXTURES) / "synth_default.json";
    expect(cli("synth --spec \"" + spec.string() + "\" --out \"" + (work_ / "data").string() + "\"",
               "synth"),
           "synth");
    base_ = read_json_file(work_ / "fixture.json");
    prepared_ = true;
  }

  /// Writes a variant of fixture.json next to it and returns its path.
  fs::path variant(const std::string& name, const std::vector<std::string>& manifests,
                   const std::function<void(Json&)>& edit = {}) {
    prepare();
    Json j = base_;
    j["manifests"] = manifests;
    j["output_dir"] = name;
    if (edit) edit(j);
    const fs::path p = work_ / (name + ".json");
    write_json_file(p, j);
    return p;
  }

  /// Scratch training with fixture.json (seed 7) into `dir`.
  const fs::path& scratch_a(int which) {
    auto& slot = which == 0 ? scratch_a0_ : scratch_a1_;
    if (!slot) {
      prepare();
      const fs::path out = work_ / (which == 0 ? "scratch_a" : "scratch_a_repeat");
      expect(cli("train --config \"" + (work_ / "fixture.json").string() + "\" --seed 7 --out \"" +
                     out.string() + "\"",
                 out.filename().string()),
             "train " + out.filename().string());
      slot = out;
    }
    return *slot;
  }

  const fs::path& scratch_c() {
    if (!scratch_c_) {
      const fs::path cfg = variant("scratch_c", {"data/synth_c.csv"});
      expect(cli("train --config \"" + cfg.string() + "\"", "scratch_c"), "train scratch_c");
      scratch_c_ = work_ / "scratch_c";
    }
    return *scratch_c_;
  }

  const fs::path& pretrained() {
    if (!pretrained_) {
      const fs::path cfg = variant("pretrain", {"data/synth_a.csv", "data/synth_b.csv"},
                                   [](Json& j) {
                                     j["regime"] = "multi_domain";
                                     j["schedule"]["rounds_per_stage"] = 20;
                                     j["schedule"]["eval_every_rounds"] = 20;
                                   });
      expect(cli("train-multi --config \"" + cfg.string() + "\"", "pretrain"), "train-multi");
      pretrained_ = work_ / "pretrain" / "shared";
    }
    return *pretrained_;
  }

  const fs::path& transferred() {
    if (!transferred_) {
      const fs::path cfg = variant("adapters_c", {"data/synth_c.csv"},
                                   [](Json& j) { j["regime"] = "adapters"; });
      expect(cli("transfer --from \"" + pretrained().string() + "\" --regime adapters --config \"" +
                     cfg.string() + "\"",
                 "adapters_c"),
             "transfer");
      transferred_ = work_ / "adapters_c";
    }
    return *transferred_;
  }

  /// Devel evaluation of a checkpoint; returns the report directory.
  fs::path evaluate(const fs::path& ckpt, const std::string& manifest, const std::string& tag) {
    const fs::path out = work_ / "eval" / tag;
    expect(cli("eval --ckpt \"" + ckpt.string() + "\" --manifest \"" +
                   (work_ / "data" / manifest).string() + "\" --partition devel --out \"" +
                   out.string() + "\"",
               "eval_" + tag),
           "eval " + tag);
    return out;
  }

 private:
  void expect(int code, const std::string& what) {
    if (code != 0) {
      throw std::runtime_error(what + " exited with " + std::to_string(code) + " (see " +
                               (work_ / "logs").string() + ")");
    }
  }

  fs::path work_;
  bool prepared_ = false;
  Json base_;
  std::optional<fs::path> scratch_a0_, scratch_a1_, scratch_c_, pretrained_, transferred_;
};

// ---- criteria -------------------------------------------------------------

Outcome parameter_budget() {
  Model<float> m(ModelConfig{}, 1);
  m.add_domain({"emo", labels(7)});
  const std::size_t shared = count_params(m, "shared.");
  const std::size_t own = count_params(m, "domain.emo.");
  const std::size_t total = shared + own;
  const ParamPartition part = m.partition();
  const bool agree = part.shared_count == shared && part.domain_count.at("emo") == own;
  const bool pass = agree && total >= 2'600'000 && total <= 3'400'000 && own >= 270'000 &&
                    own <= 330'000;
  return {pass, "total " + std::to_string(total) + ", domain-specific " + std::to_string(own) +
                    (agree ? "" : ", manifest walk disagrees with partition()")};
}

Outcome multi_domain_ratio() {
  Model<float> m(ModelConfig{}, 1);
  m.add_domain({"d0", labels(7)});
  const double single = static_cast<double>(count_params(m, ""));
  for (int d = 1; d < 26; ++d) m.add_domain({"d" + std::to_string(d), labels(7)});
  const double ratio = static_cast<double>(count_params(m, "")) / single;
  return {ratio >= 3.0 && ratio <= 4.0, "26 domains / 1 domain = " + fmt(ratio, 3)};
}

Outcome shape_contract() {
  Model<float> m(ModelConfig{}, 3);
  m.add_domain({"emo", labels(5)});
  std::string seen;
  bool pass = true;
  for (std::size_t t : {1u, 7u, 8u, 311u, 400u}) {
    m.forward(noise(2, t, t), {t, t}, "emo", ForwardOptions<float>{});
    const Shape s = m.backbone_output().shape();
    pass = pass && s == Shape{2, 8, (t + 7) / 8, 256};
    seen += (seen.empty() ? "" : ", ") + std::to_string(t) + "->[" + std::to_string(s[0]) + "," +
            std::to_string(s[1]) + "," + std::to_string(s[2]) + "," + std::to_string(s[3]) + "]";
  }
  return {pass, seen};
}

Outcome gradient_check(Fixture& fx) {
  const int code = fx.cli("grad-check --full", "grad_check");
  std::istringstream log(slurp(fx.work() / "logs" / "grad_check.log"));
  std::string line, last;
  while (std::getline(log, line)) {
    if (!line.empty()) last = line;
  }
  return {code == 0, last + " (exit " + std::to_string(code) + ")"};
}

Outcome attention_properties() {
  // Attention weights inside the full model on a padded batch.
  const std::vector<std::size_t> valid{40, 17, 9};
  const Tensor<float> x = noise(3, 40, 21);
  const TimeMask mask = backbone_mask(valid, 3);
  auto weights = [&](double lambda) {
    ModelConfig cfg;
    cfg.attention_lambda = lambda;
    Model<float> m(cfg, 5);
    m.add_domain({"emo", labels(4)});
    m.forward(x, valid, "emo", ForwardOptions<float>{});
    return m.attention_weights();
  };
  const std::size_t cols = 5;  // ceil(40 / 8)
  const std::size_t rows = 8;
  const std::size_t n = rows * cols;

  double uniform_err = 0.0;
  const Tensor<float> flat = weights(0.0);
  for (std::size_t b = 0; b < 3; ++b) {
    const double count = static_cast<double>(rows * mask[b]);
    for (std::size_t i = 0; i < n; ++i) {
      const double want = i % cols < mask[b] ? 1.0 / count : 0.0;
      uniform_err = std::max(uniform_err, std::abs(flat[b * n + i] - want));
    }
  }
  double sum_err = 0.0;
  float padded_max = 0.0f;
  const Tensor<float> alpha = weights(0.3);
  for (std::size_t b = 0; b < 3; ++b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sum += alpha[b * n + i];
      if (i % cols >= mask[b]) padded_max = std::max(padded_max, std::abs(alpha[b * n + i]));
    }
    sum_err = std::max(sum_err, std::abs(sum - 1.0));
  }
  const bool pass = uniform_err < 1e-7 && sum_err < 1e-6 && padded_max == 0.0f;
  std::ostringstream d;
  d << "lambda=0 max |a-1/N| " << std::scientific << std::setprecision(2) << uniform_err
    << ", max |sum-1| " << sum_err << ", max padded weight " << padded_max;
  return {pass, d.str()};
}

Outcome adapters_and_isolation(Fixture& fx) {
  // Fresh adapters: a model with zero adapters reproduces, bit for bit, the
  // same network built without adapter branches.
  Checkpoint ck = load_checkpoint(fx.pretrained());
  Model<float>& with = ck.model;
  with.add_domain({"fresh", ck.model.domain("synth_a").labels});
  with.copy_backbone_state("synth_a", "fresh");
  ModelConfig plain_cfg = with.config();
  plain_cfg.adapters = false;
  Model<float> without(plain_cfg, with.seed());
  for (const auto& d : with.domains()) without.add_domain(d);
  for (auto& p : without.store().params()) p.value = with.store().value(p.name);

  const CorpusManifest m = load_manifest(fx.work() / "data" / "synth_a.csv");
  const AudioSet devel = load_audio(m, Partition::Devel, m.label_space);
  std::vector<std::size_t> idx(devel.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  const PaddedBatch batch = make_batch(devel, idx, false, 0, ck.frontend);
  const Tensor<float> a = with.forward(batch.input, batch.valid_frames, "fresh", {});
  const Tensor<float> b = without.forward(batch.input, batch.valid_frames, "fresh", {});
  const bool equal = a == b;

  // Adapters-regime transfer: nothing outside the new domain may move.
  const auto before = checkpoint_bytes(fx.pretrained());
  const auto after = checkpoint_bytes(fx.transferred() / "final");
  std::size_t moved = 0, missing = 0, own_changed = 0, own = 0;
  for (const auto& [name, bytes] : after) {
    if (name.starts_with("domain.synth_c.")) {
      ++own;
      own_changed += !before.count(name);
      continue;
    }
    const auto it = before.find(name);
    if (it == before.end()) {
      ++missing;
    } else if (it->second != bytes) {
      ++moved;
    }
  }
  const bool pass = equal && moved == 0 && missing == 0 && before.size() + own == after.size();
  return {pass, std::string("zero-adapter logits ") + (equal ? "identical" : "DIFFER") + " on " +
                    std::to_string(devel.size()) + " devel items; " +
                    std::to_string(before.size()) + " pretrained tensors, " +
                    std::to_string(moved) + " changed after adapter transfer"};
}

Outcome schedule_traces() {
  // Patience: best at epochs 1 and 2, flat afterwards.
  std::vector<double> uars(400, 0.3);
  uars[0] = 0.4;
  uars[1] = 0.5;
  PatienceAutomaton a(3, 50);
  std::vector<int> boundaries;
  int stop = 0;
  for (double u : uars) {
    const auto ev = a.observe(u);
    if (ev == PatienceAutomaton::Event::NextStage) boundaries.push_back(a.epoch());
    if (ev == PatienceAutomaton::Event::Stop) {
      stop = a.epoch();
      break;
    }
  }
  const bool patience_ok = boundaries == std::vector<int>{52, 102} && stop == 152;

  // Round robin: 3 stages x 2500 rounds over 4 domains, LR with inverse-time decay.
  const std::vector<double> lrs{0.1, 0.01, 0.001};
  const std::size_t domains = 4;
  const auto plan = round_robin_plan(domains, lrs, 2500);
  bool plan_ok = plan.size() == 3 * 2500 * domains;
  std::size_t step = 0;
  double worst_lr = 0.0;
  for (std::size_t stage = 0; stage < 3 && plan_ok; ++stage) {
    for (std::size_t round = 0; round < 2500; ++round) {
      for (std::size_t d = 0; d < domains; ++d, ++step) {
        const auto& s = plan[step];
        plan_ok = plan_ok && s.round == stage * 2500 + round && s.domain == d && s.stage == stage &&
                  s.stage_lr == lrs[stage];
        const double want = lrs[stage] / (1.0 + 1e-6 * static_cast<double>(step));
        worst_lr = std::max(worst_lr, std::abs(effective_lr(s.stage_lr, step) - want) / want);
      }
    }
  }
  const bool pass = patience_ok && plan_ok && worst_lr < 1e-12;
  std::ostringstream d;
  d << "stage starts after epochs 52, 102, stop 152: " << (patience_ok ? "yes" : "no") << "; "
    << plan.size() << " round-robin steps " << (plan_ok ? "match" : "DIFFER")
    << "; max LR rel error " << std::scientific << std::setprecision(1) << worst_lr;
  return {pass, d.str()};
}

double report_uar(const fs::path& dir) {
  return read_json_file(dir / "report.json").at("uar").get<double>();
}

int best_epoch(const fs::path& run) {
  std::istringstream in(slurp(run / "history.jsonl"));
  std::string line;
  double best = -1.0;
  int epoch = 0;
  while (std::getline(in, line)) {
    const Json j = Json::parse(line);
    if (j.at("devel_uar").get<double>() > best) {
      best = j.at("devel_uar").get<double>();
      epoch = j.at("epoch").get<int>();
    }
  }
  return epoch;
}

Outcome learning_sanity(Fixture& fx) {
  const fs::path a = fx.scratch_a(0);
  const double scratch_a = report_uar(fx.evaluate(a / "best", "synth_a.csv", "scratch_a"));
  const int epoch = best_epoch(a);

  const fs::path c_dir = fx.evaluate(fx.scratch_c() / "best", "synth_c.csv", "scratch_c");
  const fs::path t_dir = fx.evaluate(fx.transferred() / "best", "synth_c.csv", "adapters_c");
  const double scratch_c = report_uar(c_dir);
  const double adapted = report_uar(t_dir);

  const fs::path table = fx.work() / "eval" / "compare.json";
  const int code = fx.cli("compare --baseline \"" + (c_dir / "predictions.csv").string() +
                              "\" --candidate \"" + (t_dir / "predictions.csv").string() +
                              "\" --json \"" + table.string() + "\"",
                          "compare");
  std::string mark = "?";
  std::string direction = "?";
  if (code == 0) {
    const Json row = read_json_file(table).at("candidates").at(0);
    mark = row.at("mark").get<std::string>();
    direction = row.at("direction").get<std::string>();
  }
  const bool mark_ok = (mark == "+" || mark == "-" || mark == " ") &&
                       (direction == "improvement" || direction == "decrease" ||
                        direction == "none");
  const bool pass = scratch_a >= 0.9 && epoch <= 30 && adapted >= scratch_c - 0.05 && mark_ok;
  return {pass, "scratch synth_a UAR " + fmt(scratch_a) + " (best epoch " + std::to_string(epoch) +
                    "); synth_c scratch " + fmt(scratch_c) + " vs adapters " + fmt(adapted) +
                    "; McNemar mark '" + mark + "' (" + direction + ")"};
}

Outcome metric_oracles() {
  ConfusionMatrix cm(2);
  cm.at(0, 0) = 5;
  cm.at(1, 0) = 2;
  cm.at(1, 1) = 3;
  const double u = uar(cm);

  // 15 items only the baseline gets right, 5 only the candidate.
  std::vector<int> ref(20, 0), base(20, 0), cand(20, 0);
  for (std::size_t i = 0; i < 15; ++i) cand[i] = 1;
  for (std::size_t i = 15; i < 20; ++i) base[i] = 1;
  const McNemarResult r = mcnemar(base, cand, ref);
  const double ch7 = chance_level(7);
  const bool pass = std::abs(u - 0.8) < 1e-12 && r.b == 15 && r.c == 5 &&
                    std::abs(r.statistic - 4.05) < 1e-12 && r.significant &&
                    std::abs(ch7 - 1.0 / 7.0) < 1e-12 && fmt(ch7, 3) == "0.143";
  return {pass, "UAR " + fmt(u, 3) + "; McNemar b=15 c=5 statistic " + fmt(r.statistic, 3) +
                    (r.significant ? " significant" : " not significant") + " (p " +
                    fmt(r.p_value, 4) + "); chance(7) " + fmt(ch7, 3)};
}

Outcome dsp_oracles() {
  bool frames_ok = true;
  for (std::size_t len = 512; len <= 4096; ++len) {
    std::size_t starts = 0;
    for (std::size_t s = 0; s + 512 <= len; s += 256) ++starts;
    frames_ok = frames_ok && frame_count(len) == starts;
  }

  std::vector<float> tone(8000);
  for (std::size_t i = 0; i < tone.size(); ++i) {
    tone[i] = static_cast<float>(std::sin(2.0 * std::numbers::pi * 1000.0 * i / kSampleRate));
  }
  const Matrix p = stft_power(tone);
  bool bin_ok = true;
  for (std::size_t t = 0; t < p.cols; ++t) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < p.rows; ++k) {
      if (p(k, t) > p(best, t)) best = k;
    }
    bin_ok = bin_ok && best == 32;
  }
  const auto centers = mel_centers();
  std::size_t nearest = 0;
  for (std::size_t m = 1; m < centers.size(); ++m) {
    if (std::abs(centers[m] - 1000.0) < std::abs(centers[nearest] - 1000.0)) nearest = m;
  }
  const MelSpectrogram spec = log_mel(tone);
  bool band_ok = true;
  for (std::size_t t = 0; t < spec.frames; ++t) {
    std::size_t best = 0;
    for (std::size_t m = 1; m < spec.bands; ++m) {
      if (spec.at(m, t) > spec.at(best, t)) best = m;
    }
    band_ok = band_ok && best == nearest;
  }

  std::vector<float> x(4096);
  Rng rng(3);
  for (auto& v : x) v = static_cast<float>(uniform01(rng) - 0.5);
  const Matrix q = stft_power(x);
  double worst = 0.0;
  for (std::size_t t = 0; t < q.cols; ++t) {
    double energy = 0.0;
    for (std::size_t i = 0; i < 512; ++i) {
      const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / 512.0);
      energy += x[t * 256 + i] * w * x[t * 256 + i] * w;
    }
    double spectral = q(0, t) + q(256, t);
    for (std::size_t k = 1; k < 256; ++k) spectral += 2.0 * q(k, t);
    worst = std::max(worst, std::abs(spectral / 512.0 - energy) / energy);
  }
  std::ostringstream d;
  d << "frame_count 512..4096 " << (frames_ok ? "ok" : "WRONG") << "; tone peak bin 32 "
    << (bin_ok ? "ok" : "WRONG") << ", mel band " << nearest << " (" << fmt(centers[nearest], 1)
    << " Hz) " << (band_ok ? "ok" : "WRONG") << "; Parseval max rel error " << std::scientific
    << std::setprecision(1) << worst;
  return {frames_ok && bin_ok && band_ok && worst < 1e-6, d.str()};
}

Outcome determinism(Fixture& fx) {
  const fs::path a = fx.scratch_a(0);
  const fs::path b = fx.scratch_a(1);
  std::size_t same = 0, total = 0;
  for (const char* ck : {"best", "final"}) {
    for (const char* file : {"meta.json", "params.bin"}) {
      ++total;
      same += slurp(a / ck / file) == slurp(b / ck / file);
    }
  }
  ++total;
  same += strip_wall_clock(a / "history.jsonl") == strip_wall_clock(b / "history.jsonl");
  return {same == total, std::to_string(same) + "/" + std::to_string(total) +
                             " artifacts identical (checkpoints byte for byte, history without "
                             "wall_ms)"};
}

}  // namespace

int main(int argc, char** argv) {
  fs::path work = fs::temp_directory_path() / "emonet_acceptance";
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--work") work = argv[i + 1];
  }
  Fixture fx(fs::absolute(work));

  struct Criterion {
    int id;
    std::string name;
    double limit_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "parameter budget", 1, parameter_budget},
      {2, "multi-domain efficiency", 5, multi_domain_ratio},
      {3, "shape contract", 10, shape_contract},
      {4, "gradient verification", 300, [&] { return gradient_check(fx); }},
      {5, "attention properties", 1, attention_properties},
      {6, "zero adapters and freeze isolation", 120, [&] { return adapters_and_isolation(fx); }},
      {7, "schedule automaton", 10, schedule_traces},
      {8, "end-to-end learning", 1800, [&] { return learning_sanity(fx); }},
      {9, "metric oracles", 1, metric_oracles},
      {10, "dsp oracles", 30, dsp_oracles},
      {11, "determinism", 600, [&] { return determinism(fx); }},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.limit_s;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::cout << (pass ? "PASS " : "FAIL ") << std::setw(2) << c.id << "  " << c.name << ": "
              << o.detail << " [" << fmt(secs, 2) << " s, limit " << c.limit_s << " s"
              << (in_time ? "" : ", EXCEEDED") << "]" << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed")
            << std::endl;
  return failed;
}
