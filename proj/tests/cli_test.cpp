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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "emonet/error.hpp"
#include "emonet/eval.hpp"
#include "emonet/run_config.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string output;
};

Outcome run(const std::string& args) {
  const fs::path log = fs::temp_directory_path() / "emonet_cli_test.log";
  const std::string cmd = std::string(EMONET_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  Outcome o;
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream buf;
  buf << in.rdbuf();
  o.output = buf.str();
  return o;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("exit codes") {
  const fs::path dir = fs::temp_directory_path() / "emonet_cli_case";
  fs::remove_all(dir);
  fs::create_directories(dir);

  std::ofstream(dir / "bad.json") << R"({"seed": 1, "schedule": {"patience": 3, "warmup": 2}})";
  const Outcome bad = run("train --config " + (dir / "bad.json").string());
  CHECK(bad.code == 1);
  CHECK(bad.output.find("schedule.warmup") != std::string::npos);

  CHECK(run("no-such-command").code == 1);
  CHECK(run("train").code == 1);
  CHECK(run("transfer --from x --regime sideways --config " + (dir / "bad.json").string()).code == 1);

  std::ofstream(dir / "missing.json") << R"({"manifests": ["nowhere.csv"]})";
  CHECK(run("train --config " + (dir / "missing.json").string()).code == 2);
  CHECK(run("eval --ckpt " + (dir / "nock").string() + " --manifest x.csv").code == 2);

  emonet::Predictions p;
  p.corpus_id = "c";
  p.labels = {"a", "b"};
  p.sample_ids = {"s1", "s2", "s3"};
  p.reference = {0, 1, 1};
  p.prediction = {0, 0, 1};
  emonet::save_predictions(dir / "p.csv", p);
  const Outcome same = run("compare --baseline " + (dir / "p.csv").string() + " --candidate " +
                           (dir / "p.csv").string() + " --json " + (dir / "t.json").string());
  CHECK(same.code == 0);
  const auto table_json = emonet::read_json_file(dir / "t.json");
  CHECK(table_json["candidates"][0]["mark"] == " ");
  CHECK(table_json["candidates"][0]["direction"] == "none");

  const Outcome table = run("av-table");
  CHECK(table.code == 0);
  CHECK(table.output.find("anger\thigh\tnegative") != std::string::npos);
  fs::remove_all(dir);
}

}
