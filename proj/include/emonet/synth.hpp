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

#include "emonet/corpus.hpp"
#include "emonet/run_config.hpp"

namespace emonet {

struct SynthCorpus {
  std::string corpus_id;
  std::vector<std::string> labels;  // Table-AV category names, one per class
  int samples_per_class = 30;
  int speakers = 5;
  double min_seconds = 1.0;
  double max_seconds = 2.0;
  double pitch_offset_hz = 0.0;
  double snr_db = 30.0;
};

struct SynthSpec {
  std::uint64_t seed = 1;
  std::vector<SynthCorpus> corpora;

  void validate() const;
};

/// Default label list used when a spec gives only a class count.
const std::vector<std::string>& default_synth_labels();

SynthSpec synth_spec_from_json(const Json& j);
Json to_json(const SynthSpec& spec);

/// Class template of class k: fundamental 110 * 1.3^k Hz (plus the corpus
/// pitch offset and a per-speaker factor), six harmonics with a
/// class-dependent tilt, amplitude-modulated at 2, 4, 8 or 16 Hz.
std::vector<float> synth_utterance(std::size_t class_index, double f0_scale,
                                   double pitch_offset_hz, double seconds, double snr_db,
                                   std::uint64_t seed);

/// Writes `<out>/<corpus>/<sample>.wav` and `<out>/<corpus>.csv` per corpus
/// and returns the manifests. Partitions are speaker-disjoint: the first 60 %
/// of speakers train, the next 20 % devel, the rest test.
std::vector<CorpusManifest> generate(const SynthSpec& spec, const std::filesystem::path& out);

}  // namespace emonet
