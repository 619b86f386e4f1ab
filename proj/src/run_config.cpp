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

#include "emonet/run_config.hpp"

#include <fstream>
#include <set>

namespace emonet {

namespace fs = std::filesystem;

namespace {

// Walks the keys of one JSON object, rejecting anything not consumed.
class Reader {
 public:
  Reader(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail(ErrorKind::InvalidConfig, where_ + ": expected a JSON object");
    for (auto it = j_.begin(); it != j_.end(); ++it) pending_.insert(it.key());
  }

  template <typename V>
  void get(const char* key, V& out) {
    pending_.erase(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<V>();
    } catch (const nlohmann::json::exception&) {
      fail(ErrorKind::InvalidConfig, where_ + "." + key + ": wrong type");
    }
  }

  const Json* child(const char* key) {
    pending_.erase(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    if (!pending_.empty()) {
      fail(ErrorKind::InvalidConfig, "unknown key '" + where_ + "." + *pending_.begin() + "'");
    }
  }

 private:
  const Json& j_;
  std::string where_;
  std::set<std::string> pending_;
};

}  // namespace

Json to_json(const FrontendConfig& c) {
  return Json{{"sample_rate", c.sample_rate}, {"n_fft", c.n_fft},         {"hop", c.hop},
              {"mel_bands", c.mel_bands},     {"fmin", c.fmin},           {"fmax", c.fmax},
              {"log_floor", c.log_floor},     {"max_seconds", c.max_seconds}};
}

FrontendConfig frontend_from_json(const Json& j, const std::string& where) {
  FrontendConfig c;
  Reader r(j, where);
  r.get("sample_rate", c.sample_rate);
  r.get("n_fft", c.n_fft);
  r.get("hop", c.hop);
  r.get("mel_bands", c.mel_bands);
  r.get("fmin", c.fmin);
  r.get("fmax", c.fmax);
  r.get("log_floor", c.log_floor);
  r.get("max_seconds", c.max_seconds);
  r.finish();
  if (c.sample_rate != kSampleRate || c.n_fft < 2 || c.hop < 1 || c.mel_bands < 1 ||
      !(c.fmax > c.fmin) || !(c.log_floor > 0.0) || !(c.max_seconds > 0.0)) {
    fail(ErrorKind::InvalidConfig, where + ": invalid frontend settings");
  }
  return c;
}

Json to_json(const ModelConfig& c) {
  return Json{{"mel_bands", c.mel_bands},
              {"stem_filters", c.stem_filters},
              {"stack_filters", c.stack_filters},
              {"blocks_per_stack", c.blocks_per_stack},
              {"attention_dim", c.attention_dim},
              {"attention_lambda", c.attention_lambda},
              {"head_units", c.head_units},
              {"dropout_rate", c.dropout_rate},
              {"attention_shared", c.attention_shared},
              {"adapters", c.adapters},
              {"stem_adapter", c.stem_adapter},
              {"bn_momentum", c.bn_momentum},
              {"bn_epsilon", c.bn_epsilon}};
}

ModelConfig model_from_json(const Json& j, const std::string& where) {
  ModelConfig c;
  Reader r(j, where);
  r.get("mel_bands", c.mel_bands);
  r.get("stem_filters", c.stem_filters);
  r.get("stack_filters", c.stack_filters);
  r.get("blocks_per_stack", c.blocks_per_stack);
  r.get("attention_dim", c.attention_dim);
  r.get("attention_lambda", c.attention_lambda);
  r.get("head_units", c.head_units);
  r.get("dropout_rate", c.dropout_rate);
  r.get("attention_shared", c.attention_shared);
  r.get("adapters", c.adapters);
  r.get("stem_adapter", c.stem_adapter);
  r.get("bn_momentum", c.bn_momentum);
  r.get("bn_epsilon", c.bn_epsilon);
  r.finish();
  c.validate();
  return c;
}

Json to_json(const ScheduleConfig& c) {
  return Json{{"stage_lrs", c.stage_lrs},
              {"finetune_lrs", c.finetune_lrs},
              {"patience", c.patience},
              {"rounds_per_stage", c.rounds_per_stage},
              {"decay", c.decay},
              {"decay_law", std::string(to_string(c.decay_law))},
              {"batch_size", c.batch_size},
              {"momentum", c.momentum},
              {"l2", c.l2},
              {"max_epochs", c.max_epochs},
              {"eval_every_rounds", c.eval_every_rounds}};
}

ScheduleConfig schedule_from_json(const Json& j, const std::string& where) {
  ScheduleConfig c;
  Reader r(j, where);
  std::string law(to_string(c.decay_law));
  r.get("stage_lrs", c.stage_lrs);
  r.get("finetune_lrs", c.finetune_lrs);
  r.get("patience", c.patience);
  r.get("rounds_per_stage", c.rounds_per_stage);
  r.get("decay", c.decay);
  r.get("decay_law", law);
  r.get("batch_size", c.batch_size);
  r.get("momentum", c.momentum);
  r.get("l2", c.l2);
  r.get("max_epochs", c.max_epochs);
  r.get("eval_every_rounds", c.eval_every_rounds);
  r.finish();
  c.decay_law = parse_decay_law(law);
  c.validate();
  return c;
}

MultiTarget parse_multi_target(std::string_view text) {
  if (text == "categorical") return MultiTarget::Categorical;
  if (text == "arousal") return MultiTarget::Arousal;
  if (text == "valence") return MultiTarget::Valence;
  if (text == "av" || text == "arousal+valence") return MultiTarget::ArousalValence;
  fail(ErrorKind::InvalidConfig, "unknown target '" + std::string(text) + "'");
}

std::string_view to_string(MultiTarget t) {
  switch (t) {
    case MultiTarget::Categorical: return "categorical";
    case MultiTarget::Arousal: return "arousal";
    case MultiTarget::Valence: return "valence";
    case MultiTarget::ArousalValence: return "av";
  }
  return "categorical";
}

void RunConfig::validate() const {
  model.validate();
  schedule.validate();
  if (model.mel_bands != frontend.mel_bands) {
    fail(ErrorKind::InvalidConfig, "model.mel_bands must equal frontend.mel_bands");
  }
  if (output_dir.empty()) fail(ErrorKind::InvalidConfig, "output_dir is empty");
}

RunConfig run_config_from_json(const Json& j, const fs::path& base_dir) {
  RunConfig c;
  Reader r(j, "config");
  std::string regime(to_string(c.regime));
  std::string target(to_string(c.target));
  std::vector<std::string> manifests;
  std::string output = c.output_dir.string();
  r.get("seed", c.seed);
  r.get("regime", regime);
  r.get("target", target);
  r.get("manifests", manifests);
  r.get("output_dir", output);
  if (const Json* f = r.child("frontend")) c.frontend = frontend_from_json(*f);
  if (const Json* m = r.child("model")) c.model = model_from_json(*m);
  if (const Json* s = r.child("schedule")) c.schedule = schedule_from_json(*s);
  r.finish();
  c.regime = parse_regime(regime);
  c.target = parse_multi_target(target);
  auto resolve = [&](const std::string& p) {
    const fs::path path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };
  for (const auto& m : manifests) c.manifests.push_back(resolve(m));
  c.output_dir = resolve(output);
  c.validate();
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  return run_config_from_json(read_json_file(path), path.parent_path());
}

Json to_json(const RunConfig& c) {
  Json manifests = Json::array();
  for (const auto& m : c.manifests) manifests.push_back(m.string());
  return Json{{"seed", c.seed},
              {"regime", std::string(to_string(c.regime))},
              {"target", std::string(to_string(c.target))},
              {"manifests", manifests},
              {"output_dir", c.output_dir.string()},
              {"frontend", to_json(c.frontend)},
              {"model", to_json(c.model)},
              {"schedule", to_json(c.schedule)}};
}

void write_effective_config(const RunConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  write_json_file(cfg.output_dir / "config.json", to_json(cfg));
}

Json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::InvalidConfig, path.string() + ": " + e.what());
  }
}

void write_json_file(const fs::path& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) fail(ErrorKind::IoError, "write failed for " + path.string());
}

}  // namespace emonet
