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
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "emonet/frontend.hpp"
#include "emonet/model.hpp"
#include "emonet/schedule.hpp"

namespace emonet {

using Json = nlohmann::ordered_json;

Json to_json(const FrontendConfig& cfg);
Json to_json(const ModelConfig& cfg);
Json to_json(const ScheduleConfig& cfg);

// Strict readers: any key outside the schema throws InvalidConfig naming it.
// Missing keys keep their defaults.
FrontendConfig frontend_from_json(const Json& j, const std::string& where = "frontend");
ModelConfig model_from_json(const Json& j, const std::string& where = "model");
ScheduleConfig schedule_from_json(const Json& j, const std::string& where = "schedule");

/// Multi-domain target of train-multi.
enum class MultiTarget { Categorical, Arousal, Valence, ArousalValence };
MultiTarget parse_multi_target(std::string_view text);
std::string_view to_string(MultiTarget t);

struct RunConfig {
  std::uint64_t seed = 0;
  Regime regime = Regime::Scratch;
  MultiTarget target = MultiTarget::Categorical;
  std::vector<std::filesystem::path> manifests;
  std::filesystem::path output_dir = "run";
  FrontendConfig frontend;
  ModelConfig model;
  ScheduleConfig schedule;

  void validate() const;
};

/// Relative manifest and output paths resolve against `base_dir`.
RunConfig run_config_from_json(const Json& j, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);
Json to_json(const RunConfig& cfg);
/// Writes the resolved configuration as `config.json` in the output directory.
void write_effective_config(const RunConfig& cfg);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace emonet
