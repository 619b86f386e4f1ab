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

#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "emonet/error.hpp"
#include "emonet/synth.hpp"
#include "emonet/trainer.hpp"

using namespace emonet;

namespace {

AudioSet tiny_set(const std::string& id, int per_class, std::uint64_t seed) {
  AudioSet s;
  s.corpus_id = id;
  s.labels = {"anger", "neutral", "sadness"};
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < per_class; ++i) {
      s.sample_ids.push_back(id + "_" + std::to_string(c) + "_" + std::to_string(i));
      s.audio.push_back(synth_utterance(static_cast<std::size_t>(c), 1.0 + 0.03 * i, 0.0,
                                        0.4 + 0.05 * i, 30.0, derive_seed(seed, c, i)));
      s.targets.push_back(c);
    }
  }
  return s;
}

ModelConfig toy() {
  ModelConfig c;
  c.stem_filters = 4;
  c.stack_filters = {8, 16, 32};
  c.attention_dim = 32;
  c.head_units = 8;
  return c;
}

ScheduleConfig quick() {
  ScheduleConfig s;
  s.stage_lrs = {0.05, 0.01};
  s.batch_size = 4;
  s.max_epochs = 2;
  s.rounds_per_stage = 2;
  s.eval_every_rounds = 2;
  return s;
}

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("class weight vector") {
  AudioSet s;
  s.labels = {"a", "b"};
  s.audio.resize(100);
  s.targets.assign(75, 0);
  s.targets.resize(100, 1);
  const auto w = class_weight_vector(s);
  CHECK(w[0] == doctest::Approx(0.6667).epsilon(1e-3));
  CHECK(w[1] == doctest::Approx(2.0));
}

TEST_CASE("batches crop, extract and pad") {
  const AudioSet s = tiny_set("t", 2, 1);
  const PaddedBatch b = make_batch(s, {0, 5}, false, 0, FrontendConfig{});
  CHECK(b.batch() == 2);
  CHECK(b.valid_frames[0] == frame_count(s.audio[0].size()));
  CHECK(b.valid_frames[1] == frame_count(s.audio[5].size()));
  const PaddedBatch c = make_batch(s, {0, 5}, true, 4, FrontendConfig{});
  CHECK(c.input == b.input);  // clips under 5 s are used whole
}

TEST_CASE("single-domain training is reproducible") {
  const DomainData data{"t", tiny_set("t", 4, 2), tiny_set("t", 2, 3)};
  auto once = [&] {
    Model<float> m(toy(), 6);
    m.add_domain({"t", data.train.labels});
    const TrainResult r = train_single(m, data, Regime::Scratch, quick(), FrontendConfig{}, 6);
    return std::make_pair(snapshot_values(m), r);
  };
  const auto [values_a, ra] = once();
  const auto [values_b, rb] = once();
  CHECK(values_a == values_b);
  REQUIRE(ra.history.size() == 2);
  CHECK(ra.steps == 6);
  for (std::size_t i = 0; i < ra.history.size(); ++i) {
    CHECK(ra.history[i].train_loss == rb.history[i].train_loss);
    CHECK(ra.history[i].devel_uar == rb.history[i].devel_uar);
    CHECK(std::isfinite(ra.history[i].train_loss));
  }
  CHECK(ra.rng_state == rb.rng_state);

  const auto path = std::filesystem::temp_directory_path() / "emonet_history_test.jsonl";
  write_history(path, ra.history, false);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line.find("wall_ms") == std::string::npos);
  CHECK(line.find("train_loss") != std::string::npos);
  std::filesystem::remove(path);
}

TEST_CASE("round robin and transfer") {
  const std::vector<DomainData> data{{"a", tiny_set("a", 3, 4), tiny_set("a", 1, 5)},
                                     {"b", tiny_set("b", 3, 6), tiny_set("b", 1, 7)}};
  Model<float> m(toy(), 9);
  for (const auto& d : data) m.add_domain({d.id, d.train.labels});
  const RoundRobinResult r = train_round_robin(m, data, quick(), FrontendConfig{}, 9);
  CHECK(r.steps == 2 * 2 * 2);

  Model<float> lone(toy(), 9);
  lone.add_domain({"a", data[0].train.labels});
  try {
    train_round_robin(lone, {data[0]}, quick(), FrontendConfig{}, 9);
    FAIL("single categorical domain accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SingleDomainCategorical);
  }

  const DomainData target{"c", tiny_set("c", 3, 8), tiny_set("c", 1, 9)};
  const TransferResult t =
      transfer(m, {"c", target.train.labels}, target, Regime::Adapters, quick(), FrontendConfig{}, 9);
  for (const auto& p : m.store().params()) {
    if (!p.name.starts_with("shared.")) continue;
    CHECK(t.model.store().value(p.name) == p.value);
  }
  CHECK(t.model.has_domain("c"));
  CHECK_FALSE(m.has_domain("c"));
}

}
