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

#include "emonet/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "emonet/error.hpp"
#include "emonet/random.hpp"

namespace emonet {

std::string_view to_string(Partition p) {
  switch (p) {
    case Partition::Train: return "train";
    case Partition::Devel: return "devel";
    case Partition::Test: return "test";
  }
  return "train";
}

Partition parse_partition(std::string_view text) {
  if (text == "train") return Partition::Train;
  if (text == "devel") return Partition::Devel;
  if (text == "test") return Partition::Test;
  fail(ErrorKind::UnknownPartition, "unknown partition '" + std::string(text) + "'");
}

std::string normalize_label(std::string_view label) {
  auto begin = label.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  auto end = label.find_last_not_of(" \t\r\n");
  std::string out(label.substr(begin, end - begin + 1));
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::size_t CorpusManifest::count(Partition p) const {
  return static_cast<std::size_t>(std::count_if(
      records.begin(), records.end(), [p](const SampleRecord& r) { return r.partition == p; }));
}

std::vector<const SampleRecord*> CorpusManifest::partition(Partition p) const {
  std::vector<const SampleRecord*> out;
  for (const auto& r : records) {
    if (r.partition == p) out.push_back(&r);
  }
  return out;
}

int CorpusManifest::label_index(const std::string& label) const {
  auto it = std::lower_bound(label_space.begin(), label_space.end(), label);
  if (it == label_space.end() || *it != label) return -1;
  return static_cast<int>(it - label_space.begin());
}

std::filesystem::path CorpusManifest::resolve(const SampleRecord& rec) const {
  std::filesystem::path p(rec.audio_path);
  if (p.is_absolute() || base_dir.empty()) return p;
  return base_dir / p;
}

CorpusManifest make_manifest(std::vector<SampleRecord> records, std::string corpus_id) {
  CorpusManifest m;
  std::set<std::pair<std::string, std::string>> ids;
  std::set<std::string> labels;
  std::set<std::string> corpora;
  for (auto& r : records) {
    r.label = normalize_label(r.label);
    if (r.label.empty()) {
      fail(ErrorKind::MissingColumn, "sample '" + r.sample_id + "' has an empty label");
    }
    if (!ids.emplace(r.corpus_id, r.sample_id).second) {
      fail(ErrorKind::DuplicateSampleId,
           "duplicate sample_id '" + r.sample_id + "' in corpus '" + r.corpus_id + "'");
    }
    labels.insert(r.label);
    corpora.insert(r.corpus_id);
    m.speaker_sets[static_cast<int>(r.partition)].insert(r.corpus_id + "/" + r.speaker_id);
  }
  if (corpus_id.empty()) {
    for (const auto& c : corpora) {
      if (!corpus_id.empty()) corpus_id += "+";
      corpus_id += c;
    }
  }
  m.corpus_id = std::move(corpus_id);
  m.records = std::move(records);
  m.label_space.assign(labels.begin(), labels.end());

  // Speaker sets are keyed by corpus so equal speaker ids in different
  // corpora do not count as overlap.
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = a + 1; b < 3; ++b) {
      std::vector<std::string> shared;
      std::set_intersection(m.speaker_sets[a].begin(), m.speaker_sets[a].end(),
                            m.speaker_sets[b].begin(), m.speaker_sets[b].end(),
                            std::back_inserter(shared));
      for (const auto& s : shared) {
        m.warnings.push_back("speaker '" + s + "' appears in both " +
                             std::string(to_string(kPartitions[a])) + " and " +
                             std::string(to_string(kPartitions[b])));
      }
    }
  }
  return m;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\n") == std::string::npos) return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

constexpr std::array<std::string_view, 6> kColumns = {"corpus", "sample_id", "path",
                                                      "speaker", "partition", "label"};

}  // namespace

CorpusManifest parse_manifest(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::EmptyManifest, source + " is empty");
  auto header = split_csv_line(line);
  std::array<std::size_t, 6> col{};
  for (std::size_t c = 0; c < kColumns.size(); ++c) {
    auto it = std::find_if(header.begin(), header.end(),
                           [&](const std::string& h) { return trim(h) == kColumns[c]; });
    if (it == header.end()) {
      fail(ErrorKind::MissingColumn,
           source + ": header lacks column '" + std::string(kColumns[c]) + "'");
    }
    col[c] = static_cast<std::size_t>(it - header.begin());
  }
  std::vector<SampleRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || line == "\r") continue;
    auto f = split_csv_line(line);
    if (f.size() < header.size()) {
      fail(ErrorKind::MissingColumn,
           source + ":" + std::to_string(line_no) + ": expected " +
               std::to_string(header.size()) + " fields, got " + std::to_string(f.size()));
    }
    SampleRecord r;
    r.corpus_id = trim(f[col[0]]);
    r.sample_id = trim(f[col[1]]);
    r.audio_path = trim(f[col[2]]);
    r.speaker_id = trim(f[col[3]]);
    r.partition = parse_partition(trim(f[col[4]]));
    r.label = f[col[5]];
    records.push_back(std::move(r));
  }
  if (records.empty()) fail(ErrorKind::EmptyManifest, source + " has no records");
  return make_manifest(std::move(records));
}

CorpusManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open manifest " + path.string());
  auto m = parse_manifest(in, path.string());
  m.base_dir = path.parent_path();
  return m;
}

void write_manifest(std::ostream& out, const CorpusManifest& manifest) {
  out << "corpus,sample_id,path,speaker,partition,label\n";
  for (const auto& r : manifest.records) {
    out << csv_field(r.corpus_id) << ',' << csv_field(r.sample_id) << ','
        << csv_field(r.audio_path) << ',' << csv_field(r.speaker_id) << ','
        << to_string(r.partition) << ',' << csv_field(r.label) << '\n';
  }
}

void save_manifest(const std::filesystem::path& path, const CorpusManifest& manifest) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::IoError, "cannot write manifest " + path.string());
  write_manifest(out, manifest);
}

AvTarget parse_av_target(std::string_view text) {
  if (text == "arousal") return AvTarget::Arousal;
  if (text == "valence") return AvTarget::Valence;
  fail(ErrorKind::InvalidConfig, "unknown AV target '" + std::string(text) + "'");
}

std::string_view to_string(AvTarget t) { return t == AvTarget::Arousal ? "arousal" : "valence"; }

std::string av_class_name(const std::string& label, AvTarget target) {
  const AVLabel av = map_to_av(label);
  return std::string(target == AvTarget::Arousal ? to_string(av.arousal)
                                                 : to_string(av.valence));
}

std::vector<std::string> av_class_names(AvTarget target) {
  if (target == AvTarget::Arousal) return {"high", "low"};
  return {"negative", "neutral", "positive"};
}

CorpusManifest balance_subsample(const CorpusManifest& manifest, AvTarget target,
                                 std::uint64_t seed) {
  const auto classes = av_class_names(target);
  // (corpus, partition) -> class -> record indices, in input order.
  std::map<std::pair<std::string, int>, std::map<std::string, std::vector<std::size_t>>> groups;
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    const auto& r = manifest.records[i];
    auto& by_class = groups[{r.corpus_id, static_cast<int>(r.partition)}];
    by_class[av_class_name(r.label, target)].push_back(i);
  }

  std::vector<bool> keep(manifest.records.size(), false);
  std::vector<std::string> warnings;
  for (auto& [key, by_class] : groups) {
    std::size_t min_count = SIZE_MAX;
    for (const auto& c : classes) {
      auto it = by_class.find(c);
      const std::size_t n = it == by_class.end() ? 0 : it->second.size();
      if (n == 0) {
        warnings.push_back("EmptyClass: corpus '" + key.first + "' partition " +
                           std::string(to_string(static_cast<Partition>(key.second))) +
                           " has no '" + c + "' samples; partition dropped");
      }
      min_count = std::min(min_count, n);
    }
    for (const auto& c : classes) {
      auto it = by_class.find(c);
      if (it == by_class.end()) continue;
      auto idx = it->second;
      Rng rng(derive_seed(seed, key.first, key.second, c));
      shuffle(std::span<std::size_t>(idx), rng);
      for (std::size_t k = 0; k < min_count; ++k) keep[idx[k]] = true;
    }
  }

  std::vector<SampleRecord> out;
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    if (keep[i]) out.push_back(manifest.records[i]);
  }
  CorpusManifest m = make_manifest(std::move(out), manifest.corpus_id);
  m.base_dir = manifest.base_dir;
  m.warnings.insert(m.warnings.begin(), warnings.begin(), warnings.end());
  return m;
}

CorpusManifest relabel_av(const CorpusManifest& manifest, AvTarget target,
                          const std::string& corpus_id) {
  std::vector<SampleRecord> out = manifest.records;
  for (auto& r : out) r.label = av_class_name(r.label, target);
  CorpusManifest m = make_manifest(std::move(out), corpus_id.empty() ? manifest.corpus_id
                                                                     : corpus_id);
  m.base_dir = manifest.base_dir;
  return m;
}

ClassWeights class_weights(const CorpusManifest& manifest, Partition partition) {
  std::map<std::string, std::size_t> counts;
  std::size_t total = 0;
  for (const auto& r : manifest.records) {
    if (r.partition != partition) continue;
    ++counts[r.label];
    ++total;
  }
  if (total == 0) {
    fail(ErrorKind::EmptyPartition, "partition " + std::string(to_string(partition)) +
                                        " of '" + manifest.corpus_id + "' is empty");
  }
  const double k = static_cast<double>(counts.size());
  ClassWeights w;
  for (const auto& label : manifest.label_space) {
    auto it = counts.find(label);
    w[label] = it == counts.end()
                   ? 1.0
                   : static_cast<double>(total) / (k * static_cast<double>(it->second));
  }
  return w;
}

std::string sample_key(const SampleRecord& rec) { return rec.corpus_id + "/" + rec.sample_id; }

InspectionSummary inspect(const std::vector<CorpusManifest>& manifests,
                          const std::map<std::string, double>& durations) {
  InspectionSummary s;
  for (const auto& m : manifests) {
    if (m.records.empty()) continue;
    CorpusSummary row;
    row.corpus_id = m.corpus_id;
    row.samples = m.records.size();
    row.classes = m.label_space.size();
    for (std::size_t p = 0; p < 3; ++p) {
      row.partition_counts[p] = m.count(kPartitions[p]);
      row.speaker_counts[p] = m.speaker_sets[p].size();
    }
    double sum = 0.0;
    double sum_sq = 0.0;
    std::size_t n = 0;
    for (const auto& r : m.records) {
      auto it = durations.find(sample_key(r));
      if (it == durations.end()) {
        ++row.missing_durations;
        continue;
      }
      const double d = it->second;
      sum += d;
      sum_sq += d * d;
      ++n;
      if (d >= 10.0) {
        ++s.histogram_overflow;
      } else {
        ++s.histogram[static_cast<std::size_t>(std::max(0.0, d))];
      }
    }
    if (n > 0) {
      row.mean_seconds = sum / static_cast<double>(n);
      row.std_seconds = std::sqrt(
          std::max(0.0, sum_sq / static_cast<double>(n) - row.mean_seconds * row.mean_seconds));
    }
    row.total_hours = sum / 3600.0;
    s.total_hours += row.total_hours;
    s.total_samples += row.samples;
    s.rows.push_back(std::move(row));
  }
  return s;
}

std::string format_inspection(const InspectionSummary& summary) {
  std::ostringstream os;
  os << std::left << std::setw(16) << "corpus" << std::right << std::setw(8) << "samples"
     << std::setw(6) << "#C" << std::setw(7) << "#Sp" << std::setw(8) << "train"
     << std::setw(8) << "devel" << std::setw(8) << "test" << std::setw(10) << "mean[s]"
     << std::setw(9) << "std[s]" << std::setw(10) << "hours" << "  flags\n";
  os << std::fixed;
  for (const auto& r : summary.rows) {
    std::size_t speakers = r.speaker_counts[0] + r.speaker_counts[1] + r.speaker_counts[2];
    os << std::left << std::setw(16) << r.corpus_id << std::right << std::setw(8) << r.samples
       << std::setw(6) << r.classes << std::setw(7) << speakers << std::setw(8)
       << r.partition_counts[0] << std::setw(8) << r.partition_counts[1] << std::setw(8)
       << r.partition_counts[2] << std::setw(10) << std::setprecision(2) << r.mean_seconds
       << std::setw(9) << r.std_seconds << std::setw(10) << std::setprecision(4)
       << r.total_hours << "  ";
    if (r.missing_durations > 0) os << "missing-duration:" << r.missing_durations;
    os << '\n';
  }
  os << "total samples " << summary.total_samples << ", total hours " << std::setprecision(4)
     << summary.total_hours << "\nduration histogram (1 s bins):";
  for (std::size_t b = 0; b < summary.histogram.size(); ++b) {
    os << ' ' << b << "-" << b + 1 << ":" << summary.histogram[b];
  }
  os << " >=10:" << summary.histogram_overflow << '\n';
  return os.str();
}

}  // namespace emonet
