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

#include "emonet/error.hpp"
#include "emonet/run_config.hpp"

using namespace emonet;

TEST_SUITE("config") {

TEST_CASE("defaults follow the published setup") {
  const RunConfig c = run_config_from_json(Json::object());
  CHECK(c.frontend.mel_bands == 64);
  CHECK(c.frontend.n_fft == 512);
  CHECK(c.frontend.hop == 256);
  CHECK(c.model.attention_lambda == 0.3);
  CHECK(c.model.stack_filters == std::vector<int>{64, 128, 256});
  CHECK(c.schedule.batch_size == 64);
  CHECK(c.schedule.momentum == 0.9);
  CHECK(c.schedule.patience == 50);
  CHECK(c.schedule.rounds_per_stage == 2500);
  CHECK(c.schedule.stage_lrs == std::vector<double>{0.1, 0.01, 0.001});
}

TEST_CASE("unknown keys are rejected by name") {
  for (const char* text : {R"({"sead": 1})", R"({"model": {"stem_filter": 8}})",
                           R"({"schedule": {"patience": 5, "lr": 0.1}})",
                           R"({"frontend": {"mels": 40}})"}) {
    try {
      run_config_from_json(Json::parse(text));
      FAIL("accepted " << text);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::InvalidConfig);
      CHECK(std::string(e.what()).find("unknown key") != std::string::npos);
    }
  }
  CHECK_THROWS_AS(run_config_from_json(Json::parse(R"({"seed": "one"})")), Error);
  CHECK_THROWS_AS(run_config_from_json(Json::parse(R"({"regime": "mystery"})")), Error);
}

TEST_CASE("round trip and path resolution") {
  const Json j = Json::parse(R"({"seed": 3, "manifests": ["data/a.csv", "/abs/b.csv"],
      "output_dir": "out", "model": {"stem_filters": 8, "stack_filters": [16, 32, 64],
      "attention_dim": 64}, "schedule": {"decay_law": "exponential", "max_epochs": 4}})");
  const RunConfig c = run_config_from_json(j, "/cfg");
  CHECK(c.manifests[0] == "/cfg/data/a.csv");
  CHECK(c.manifests[1] == "/abs/b.csv");
  CHECK(c.output_dir == "/cfg/out");
  const RunConfig d = run_config_from_json(to_json(c));
  CHECK(d.model == c.model);
  CHECK(d.schedule == c.schedule);
  CHECK(d.frontend == c.frontend);
  CHECK(d.seed == 3);
}

}
