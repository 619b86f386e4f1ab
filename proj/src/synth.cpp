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

#include "emonet/synth.hpp"

#include <cmath>
#include <numbers>

#include "emonet/wav.hpp"

namespace emonet {

namespace fs = std::filesystem;

const std::vector<std::string>& default_synth_labels() {
  static const std::vector<std::string> labels = {"anger",   "happiness", "neutral", "sadness",
                                                  "fear",    "boredom",   "disgust", "surprise",
                                                  "relief",  "interest"};
  return labels;
}

void SynthSpec::validate() const {
  auto bad = [](const std::string& why) { fail(ErrorKind::InvalidConfig, "synth: " + why); };
  if (corpora.empty()) bad("no corpora");
  std::set<std::string> ids;
  for (const auto& c : corpora) {
    if (c.corpus_id.empty() || !ids.insert(c.corpus_id).second) bad("corpus ids must be unique");
    if (c.labels.size() < 2) bad(c.corpus_id + ": class_count must be >= 2");
    for (const auto& l : c.labels) map_to_av(l);
    if (c.samples_per_class < 1) bad(c.corpus_id + ": samples_per_class must be >= 1");
    if (c.speakers < 3) bad(c.corpus_id + ": need >= 3 speakers for disjoint partitions");
    if (c.min_seconds < 0.5 || c.max_seconds > 12.0 || c.min_seconds > c.max_seconds) {
      bad(c.corpus_id + ": durations must lie in [0.5, 12] s");
    }
  }
}

SynthSpec synth_spec_from_json(const Json& j) {
  SynthSpec spec;
  static const std::set<std::string> top = {"seed", "corpora"};
  static const std::set<std::string> keys = {"corpus_id",  "class_count",     "labels",
                                             "samples_per_class", "speakers", "duration",
                                             "pitch_offset_hz",   "snr_db"};
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!top.count(it.key())) fail(ErrorKind::InvalidConfig, "unknown key '" + it.key() + "'");
    }
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& cj : j.at("corpora")) {
      for (auto it = cj.begin(); it != cj.end(); ++it) {
        if (!keys.count(it.key())) {
          fail(ErrorKind::InvalidConfig, "unknown key 'corpora[]." + it.key() + "'");
        }
      }
      SynthCorpus c;
      c.corpus_id = cj.at("corpus_id").get<std::string>();
      if (cj.contains("labels")) {
        c.labels = cj.at("labels").get<std::vector<std::string>>();
      } else {
        const auto k = cj.value("class_count", 4);
        const auto& names = default_synth_labels();
        if (k < 2 || static_cast<std::size_t>(k) > names.size()) {
          fail(ErrorKind::InvalidConfig, c.corpus_id + ": class_count must be in [2, " +
                                             std::to_string(names.size()) + "]");
        }
        c.labels.assign(names.begin(), names.begin() + k);
      }
      c.samples_per_class = cj.value("samples_per_class", c.samples_per_class);
      c.speakers = cj.value("speakers", c.speakers);
      if (cj.contains("duration")) {
        const auto d = cj.at("duration").get<std::vector<double>>();
        if (d.size() != 2) fail(ErrorKind::InvalidConfig, "duration must be [min, max]");
        c.min_seconds = d[0];
        c.max_seconds = d[1];
      }
      c.pitch_offset_hz = cj.value("pitch_offset_hz", c.pitch_offset_hz);
      c.snr_db = cj.value("snr_db", c.snr_db);
      spec.corpora.push_back(c);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::InvalidConfig, std::string("synth spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

Json to_json(const SynthSpec& spec) {
  Json corpora = Json::array();
  for (const auto& c : spec.corpora) {
    corpora.push_back({{"corpus_id", c.corpus_id},
                       {"labels", c.labels},
                       {"samples_per_class", c.samples_per_class},
                       {"speakers", c.speakers},
                       {"duration", {c.min_seconds, c.max_seconds}},
                       {"pitch_offset_hz", c.pitch_offset_hz},
                       {"snr_db", c.snr_db}});
  }
  return Json{{"seed", spec.seed}, {"corpora", corpora}};
}

std::vector<float> synth_utterance(std::size_t class_index, double f0_scale,
                                   double pitch_offset_hz, double seconds, double snr_db,
                                   std::uint64_t seed) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  constexpr double kRates[] = {2.0, 4.0, 8.0, 16.0};
  const double f0 = 110.0 * std::pow(1.3, static_cast<double>(class_index)) * f0_scale +
                    pitch_offset_hz;
  const double rate = kRates[class_index % 4];
  const double tilt = 0.5 + 0.1 * static_cast<double>(class_index % 5);
  const auto n = static_cast<std::size_t>(seconds * kSampleRate);
  Rng rng(seed);
  const double am_phase = kTwoPi * uniform01(rng);
  double phases[6];
  for (double& p : phases) p = kTwoPi * uniform01(rng);

  std::vector<double> x(n, 0.0);
  double power = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / kSampleRate;
    double v = 0.0;
    for (int h = 1; h <= 6; ++h) {
      const double f = f0 * h;
      if (f >= 0.45 * kSampleRate) break;
      v += std::pow(tilt, h - 1) * std::sin(kTwoPi * f * t + phases[h - 1]);
    }
    const double env = 0.5 * (1.0 + 0.9 * std::sin(kTwoPi * rate * t + am_phase));
    x[i] = v * env;
    power += x[i] * x[i];
  }
  power /= static_cast<double>(std::max<std::size_t>(n, 1));
  const double noise_std = std::sqrt(power / std::pow(10.0, snr_db / 10.0));
  double peak = 0.0;
  for (double& v : x) {
    v += noise_std * standard_normal(rng);
    peak = std::max(peak, std::abs(v));
  }
  const double gain = peak > 0.0 ? 0.5 / peak : 0.0;
  std::vector<float> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<float>(x[i] * gain);
  return out;
}

std::vector<CorpusManifest> generate(const SynthSpec& spec, const fs::path& out) {
  spec.validate();
  std::vector<CorpusManifest> manifests;
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) fail(ErrorKind::IoError, "cannot create " + out.string() + ": " + ec.message());
  for (const auto& c : spec.corpora) {
    fs::create_directories(out / c.corpus_id, ec);
    if (ec) fail(ErrorKind::IoError, "cannot create " + (out / c.corpus_id).string());
    const auto speakers = static_cast<std::size_t>(c.speakers);
    const std::size_t n_train = std::max<std::size_t>(1, speakers * 3 / 5);
    const std::size_t n_devel = std::max<std::size_t>(1, (speakers - n_train) / 2);
    Rng spk_rng(derive_seed(spec.seed, c.corpus_id, "speakers"));
    std::vector<double> speaker_scale(speakers);
    for (double& s : speaker_scale) s = 1.0 + 0.04 * standard_normal(spk_rng);

    std::vector<SampleRecord> records;
    for (std::size_t k = 0; k < c.labels.size(); ++k) {
      for (int j = 0; j < c.samples_per_class; ++j) {
        const std::size_t spk = static_cast<std::size_t>(j) % speakers;
        const std::string sample_id = c.corpus_id + "_" + c.labels[k] + "_" + std::to_string(j);
        const std::uint64_t seed = derive_seed(spec.seed, c.corpus_id, sample_id);
        Rng rng(derive_seed(seed, "duration"));
        const double seconds = c.min_seconds + (c.max_seconds - c.min_seconds) * uniform01(rng);
        const std::vector<float> audio = synth_utterance(
            k, speaker_scale[spk], c.pitch_offset_hz, seconds, c.snr_db, seed);
        const std::string rel = c.corpus_id + "/" + sample_id + ".wav";
        write_wav(out / rel, audio, kSampleRate);
        SampleRecord rec;
        rec.corpus_id = c.corpus_id;
        rec.sample_id = sample_id;
        rec.audio_path = rel;
        rec.speaker_id = "spk" + std::to_string(spk);
        rec.partition = spk < n_train             ? Partition::Train
                        : spk < n_train + n_devel ? Partition::Devel
                                                  : Partition::Test;
        rec.label = c.labels[k];
        records.push_back(std::move(rec));
      }
    }
    CorpusManifest m = make_manifest(std::move(records), c.corpus_id);
    m.base_dir = out;
    save_manifest(out / (c.corpus_id + ".csv"), m);
    manifests.push_back(std::move(m));
  }
  return manifests;
}

}  // namespace emonet
