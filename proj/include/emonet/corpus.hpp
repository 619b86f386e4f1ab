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

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "emonet/av_map.hpp"

namespace emonet {

enum class Partition { Train = 0, Devel = 1, Test = 2 };
inline constexpr std::array<Partition, 3> kPartitions = {Partition::Train, Partition::Devel,
                                                         Partition::Test};

std::string_view to_string(Partition p);
Partition parse_partition(std::string_view text);

struct SampleRecord {
  std::string corpus_id;
  std::string sample_id;
  std::string audio_path;
  std::string speaker_id;
  Partition partition = Partition::Train;
  std::string label;

  bool operator==(const SampleRecord&) const = default;
};

struct CorpusManifest {
  std::string corpus_id;
  std::vector<SampleRecord> records;
  std::vector<std::string> label_space;  // sorted, distinct
  std::array<std::set<std::string>, 3> speaker_sets;
  std::vector<std::string> warnings;
  // Directory relative audio paths resolve against; not serialized.
  std::filesystem::path base_dir;

  std::size_t size() const { return records.size(); }
  std::size_t count(Partition p) const;
  std::vector<const SampleRecord*> partition(Partition p) const;
  int label_index(const std::string& label) const;  // -1 when absent
  std::filesystem::path resolve(const SampleRecord& rec) const;
};

/// Lower-cases and trims a label string.
std::string normalize_label(std::string_view label);

/// Builds a validated manifest from records: derives label_space and
/// speaker_sets, rejects duplicate (corpus, sample_id) pairs, and records
/// speaker-overlap warnings.
CorpusManifest make_manifest(std::vector<SampleRecord> records, std::string corpus_id = {});

CorpusManifest parse_manifest(std::istream& in, const std::string& source = "<stream>");
CorpusManifest load_manifest(const std::filesystem::path& path);
void write_manifest(std::ostream& out, const CorpusManifest& manifest);
void save_manifest(const std::filesystem::path& path, const CorpusManifest& manifest);

enum class AvTarget { Arousal, Valence };
AvTarget parse_av_target(std::string_view text);
std::string_view to_string(AvTarget t);

/// Class name of a label under the given target ("low"/"high" or
/// "negative"/"neutral"/"positive").
std::string av_class_name(const std::string& label, AvTarget target);
std::vector<std::string> av_class_names(AvTarget target);

/// Per (corpus, partition) pair, keeps exactly min-class-count samples of
/// every mapped class. Labels are left untouched; output preserves input
/// record order.
CorpusManifest balance_subsample(const CorpusManifest& manifest, AvTarget target,
                                 std::uint64_t seed);

/// Replaces each label by its arousal or valence class name.
CorpusManifest relabel_av(const CorpusManifest& manifest, AvTarget target,
                          const std::string& corpus_id = {});

using ClassWeights = std::map<std::string, double>;

/// Balanced inverse frequency N / (K * n_c) over the classes present in the
/// partition. Classes of the label space absent from the partition get 1.0.
ClassWeights class_weights(const CorpusManifest& manifest, Partition partition);

struct CorpusSummary {
  std::string corpus_id;
  std::size_t samples = 0;
  std::size_t classes = 0;
  std::size_t missing_durations = 0;
  double mean_seconds = 0.0;
  double std_seconds = 0.0;  // population standard deviation
  double total_hours = 0.0;
  std::array<std::size_t, 3> partition_counts{};
  std::array<std::size_t, 3> speaker_counts{};
};

struct InspectionSummary {
  std::vector<CorpusSummary> rows;
  std::array<std::size_t, 10> histogram{};  // 1 s bins over [0, 10)
  std::size_t histogram_overflow = 0;        // >= 10 s
  double total_hours = 0.0;
  std::size_t total_samples = 0;
};

/// Key for duration lookups: corpus_id + '/' + sample_id.
std::string sample_key(const SampleRecord& rec);

InspectionSummary inspect(const std::vector<CorpusManifest>& manifests,
                          const std::map<std::string, double>& durations);

std::string format_inspection(const InspectionSummary& summary);

}  // namespace emonet
