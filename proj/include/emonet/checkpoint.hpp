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

#include <filesystem>
#include <string>

#include "emonet/frontend.hpp"
#include "emonet/model.hpp"

namespace emonet {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  Model<float> model;
  FrontendConfig frontend;
  std::string rng_state;  // textual engine state, empty when not recorded
};

/// Writes `meta.json` (format version, config, domains, frontend, RNG state
/// and a parameter manifest of name, kind, shape and byte offset) and
/// `params.bin` (little-endian f32, manifest order) into `dir`.
void save_checkpoint(const std::filesystem::path& dir, const Model<float>& model,
                     const FrontendConfig& frontend, const std::string& rng_state = {});

/// Throws CorruptCheckpoint on manifest/file disagreement, VersionMismatch
/// on an unknown format version.
Checkpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace emonet
