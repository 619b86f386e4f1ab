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

#include <set>
#include <sstream>

#include "emonet/av_map.hpp"
#include "emonet/error.hpp"
#include "emonet/corpus.hpp"

using namespace emonet;

namespace {

SampleRecord rec(const std::string& id, const std::string& label, Partition p = Partition::Train,
                 const std::string& speaker = "s1") {
  return {"c", id, id + ".wav", speaker, p, label};
}

std::vector<SampleRecord> counts(const std::vector<std::pair<std::string, int>>& per_label,
                                 Partition p = Partition::Train) {
  std::vector<SampleRecord> out;
  int n = 0;
  for (const auto& [label, count] : per_label) {
    for (int i = 0; i < count; ++i) out.push_back(rec("x" + std::to_string(n++), label, p));
  }
  return out;
}

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("manifest parsing") {
  std::istringstream csv(
      "corpus,sample_id,path,speaker,partition,label\n"
      "emo,a,a.wav,s1,train,Anger\n"
      "emo,b,b.wav,s2,devel,neutral\n"
      "emo,c,c.wav,s3,test,sadness\n");
  const CorpusManifest m = parse_manifest(csv);
  CHECK(m.size() == 3);
  CHECK(m.corpus_id == "emo");
  CHECK(m.label_space == std::vector<std::string>{"anger", "neutral", "sadness"});
  CHECK(m.count(Partition::Devel) == 1);
  CHECK(m.warnings.empty());
  CHECK(m.label_index("sadness") == 2);
  CHECK(m.label_index("joy") == -1);

  std::ostringstream out;
  write_manifest(out, m);
  std::istringstream back(out.str());
  CHECK(parse_manifest(back).records == m.records);
}

TEST_CASE("manifest errors and warnings") {
  std::istringstream bad_partition(
      "corpus,sample_id,path,speaker,partition,label\nemo,a,a.wav,s1,validation,anger\n");
  CHECK_THROWS_AS(parse_manifest(bad_partition), Error);
  try {
    std::istringstream again(
        "corpus,sample_id,path,speaker,partition,label\nemo,a,a.wav,s1,validation,anger\n");
    parse_manifest(again);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnknownPartition);
  }

  std::istringstream missing("corpus,sample_id,path,partition,label\n");
  CHECK_THROWS_AS(parse_manifest(missing), Error);

  std::istringstream empty("");
  CHECK_THROWS_AS(parse_manifest(empty), Error);

  CHECK_THROWS_AS(make_manifest({rec("a", "x"), rec("a", "y")}), Error);

  const CorpusManifest shared =
      make_manifest({rec("a", "x", Partition::Train, "s1"), rec("b", "y", Partition::Devel, "s1")});
  CHECK(shared.warnings.size() == 1);
}

TEST_CASE("arousal valence table") {
  CHECK(map_to_av("anger") == AVLabel{Arousal::High, Valence::Negative});
  CHECK(map_to_av("boredom") == AVLabel{Arousal::Low, Valence::Neutral});
  CHECK(map_to_av("happiness") == AVLabel{Arousal::High, Valence::Positive});
  CHECK(map_to_av(" Sadness ") == AVLabel{Arousal::Low, Valence::Negative});
  CHECK_THROWS_AS(map_to_av("teleportation"), Error);
  std::set<std::string_view> names;
  for (const auto& e : av_table()) CHECK(names.insert(e.category).second);
}

TEST_CASE("balanced subsampling") {
  // valence: anger/sadness negative, neutral neutral, happiness positive
  auto records = counts({{"anger", 6}, {"sadness", 4}, {"neutral", 4}, {"happiness", 7}});
  const CorpusManifest m = make_manifest(records, "c");
  const CorpusManifest b = balance_subsample(m, AvTarget::Valence, 3);
  CHECK(b.size() == 12);
  std::map<std::string, int> per;
  for (const auto& r : b.records) ++per[av_class_name(r.label, AvTarget::Valence)];
  CHECK(per == std::map<std::string, int>{{"negative", 4}, {"neutral", 4}, {"positive", 4}});

  auto ids = [](const CorpusManifest& x) {
    std::set<std::string> s;
    for (const auto& r : x.records) s.insert(r.sample_id);
    return s;
  };
  CHECK(ids(balance_subsample(m, AvTarget::Valence, 3)) == ids(b));

  const CorpusManifest even = make_manifest(counts({{"anger", 5}, {"sadness", 5}}), "c");
  CHECK(ids(balance_subsample(even, AvTarget::Arousal, 1)) == ids(even));

  const CorpusManifest lopsided = make_manifest(counts({{"anger", 5}}), "c");
  const CorpusManifest dropped = balance_subsample(lopsided, AvTarget::Arousal, 1);
  CHECK(dropped.size() == 0);
  CHECK_FALSE(dropped.warnings.empty());
}

TEST_CASE("relabelled heads have 2 or 3 classes") {
  const CorpusManifest m =
      make_manifest(counts({{"anger", 2}, {"boredom", 2}, {"happiness", 2}}), "c");
  CHECK(relabel_av(m, AvTarget::Arousal).label_space.size() == 2);
  CHECK(relabel_av(m, AvTarget::Valence).label_space.size() == 3);
}

TEST_CASE("class weights") {
  auto w = class_weights(make_manifest(counts({{"a", 50}, {"b", 50}})), Partition::Train);
  CHECK(w["a"] == doctest::Approx(1.0));
  CHECK(w["b"] == doctest::Approx(1.0));
  w = class_weights(make_manifest(counts({{"a", 75}, {"b", 25}})), Partition::Train);
  CHECK(w["a"] == doctest::Approx(100.0 / 150.0));
  CHECK(w["b"] == doctest::Approx(2.0));
  w = class_weights(make_manifest(counts({{"a", 1}, {"b", 1}, {"c", 2}})), Partition::Train);
  CHECK(w["a"] == doctest::Approx(4.0 / 3.0));
  CHECK(w["b"] == doctest::Approx(4.0 / 3.0));
  CHECK(w["c"] == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(class_weights(make_manifest(counts({{"a", 1}})), Partition::Test), Error);
}

TEST_CASE("inspection summary") {
  const CorpusManifest m = make_manifest({rec("a", "x"), rec("b", "y")}, "c");
  const InspectionSummary s = inspect({m}, {{"c/a", 2.0}, {"c/b", 4.0}});
  REQUIRE(s.rows.size() == 1);
  CHECK(s.rows[0].mean_seconds == doctest::Approx(3.0));
  CHECK(s.rows[0].total_hours * 3600.0 == doctest::Approx(6.0));
  CHECK(s.histogram[2] == 1);
  CHECK(s.histogram[4] == 1);

  CHECK(inspect({}, {}).rows.empty());

  const InspectionSummary missing = inspect({m}, {{"c/a", 2.0}});
  CHECK(missing.rows[0].missing_durations == 1);

  std::vector<CorpusManifest> many;
  std::map<std::string, double> durations;
  double seconds = 0.0;
  std::size_t samples = 0;
  for (int c = 0; c < 100; ++c) {
    std::vector<SampleRecord> rs;
    for (int i = 0; i <= c % 5; ++i) {
      SampleRecord r = rec("s" + std::to_string(i), "l" + std::to_string(i % 2));
      r.corpus_id = "c" + std::to_string(c);
      durations[sample_key(r)] = 0.5 + 0.25 * ((c + i) % 11);
      seconds += durations[sample_key(r)];
      rs.push_back(r);
      ++samples;
    }
    many.push_back(make_manifest(rs));
  }
  const InspectionSummary all = inspect(many, durations);
  CHECK(all.rows.size() == 100);
  CHECK(all.total_samples == samples);
  CHECK(all.total_hours * 3600.0 == doctest::Approx(seconds));
}

}
