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

#include "emonet/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "emonet/run_config.hpp"

namespace emonet {

namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little, "checkpoints assume a little-endian host");

void save_checkpoint(const fs::path& dir, const Model<float>& model,
                     const FrontendConfig& frontend, const std::string& rng_state) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::IoError, "cannot create " + dir.string() + ": " + ec.message());

  Json domains = Json::array();
  for (const auto& d : model.domains()) domains.push_back({{"id", d.id}, {"labels", d.labels}});
  Json params = Json::array();
  std::size_t offset = 0;
  for (const auto& p : model.store().params()) {
    params.push_back({{"name", p.name},
                      {"kind", p.trainable() ? "weight" : "buffer"},
                      {"shape", p.value.shape()},
                      {"offset", offset}});
    offset += p.value.size() * sizeof(float);
  }
  const Json meta{{"format_version", kCheckpointVersion},
                  {"seed", model.seed()},
                  {"model", to_json(model.config())},
                  {"frontend", to_json(frontend)},
                  {"domains", domains},
                  {"rng_state", rng_state},
                  {"params_bytes", offset},
                  {"parameters", params}};
  write_json_file(dir / "meta.json", meta);

  std::ofstream out(dir / "params.bin", std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot write " + (dir / "params.bin").string());
  for (const auto& p : model.store().params()) {
    out.write(reinterpret_cast<const char*>(p.value.data()),
              static_cast<std::streamsize>(p.value.size() * sizeof(float)));
  }
  if (!out) fail(ErrorKind::IoError, "write failed for " + (dir / "params.bin").string());
}

namespace {

[[noreturn]] void corrupt_at(const fs::path& dir, const std::string& why) {
  fail(ErrorKind::CorruptCheckpoint, dir.string() + ": " + why);
}

}  // namespace

Checkpoint load_checkpoint(const fs::path& dir) {
  auto corrupt = [&](const std::string& why) { corrupt_at(dir, why); };
  if (!fs::exists(dir / "meta.json") || !fs::exists(dir / "params.bin")) {
    corrupt("meta.json or params.bin missing");
  }
  Json meta;
  try {
    meta = read_json_file(dir / "meta.json");
  } catch (const Error& e) {
    corrupt(e.what());
  }
  try {
    const int version = meta.at("format_version").get<int>();
    if (version != kCheckpointVersion) {
      fail(ErrorKind::VersionMismatch, dir.string() + ": format version " +
                                           std::to_string(version) + ", expected " +
                                           std::to_string(kCheckpointVersion));
    }
    Checkpoint ck{Model<float>(model_from_json(meta.at("model")), meta.at("seed").get<std::uint64_t>()),
                  frontend_from_json(meta.at("frontend")), meta.at("rng_state").get<std::string>()};
    for (const auto& d : meta.at("domains")) {
      ck.model.add_domain({d.at("id").get<std::string>(),
                           d.at("labels").get<std::vector<std::string>>()});
    }

    std::ifstream in(dir / "params.bin", std::ios::binary);
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto expected = meta.at("params_bytes").get<std::size_t>();
    if (bytes.size() != expected) {
      corrupt("params.bin has " + std::to_string(bytes.size()) + " bytes, manifest says " +
              std::to_string(expected));
    }
    const auto& manifest = meta.at("parameters");
    if (manifest.size() != ck.model.store().size()) corrupt("parameter count mismatch");
    std::size_t i = 0;
    for (auto& p : ck.model.store().params()) {
      const auto& entry = manifest[i++];
      if (entry.at("name").get<std::string>() != p.name) {
        corrupt("parameter '" + entry.at("name").get<std::string>() + "' where '" + p.name +
                "' was expected");
      }
      if (entry.at("shape").get<Shape>() != p.value.shape()) corrupt("shape of " + p.name);
      const auto off = entry.at("offset").get<std::size_t>();
      const std::size_t len = p.value.size() * sizeof(float);
      if (off + len > bytes.size()) corrupt("offset of " + p.name + " past end of params.bin");
      std::memcpy(p.value.data(), bytes.data() + off, len);
    }
    return ck;
  } catch (const nlohmann::json::exception& e) {
    corrupt_at(dir, std::string("malformed meta.json: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::VersionMismatch || e.kind() == ErrorKind::CorruptCheckpoint) throw;
    corrupt_at(dir, e.what());
  }
}

}  // namespace emonet
