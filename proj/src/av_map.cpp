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

#include "emonet/av_map.hpp"

#include <ostream>

#include "emonet/corpus.hpp"
#include "emonet/error.hpp"

namespace emonet {

std::string_view to_string(Arousal a) { return a == Arousal::Low ? "low" : "high"; }

std::string_view to_string(Valence v) {
  switch (v) {
    case Valence::Negative: return "negative";
    case Valence::Neutral: return "neutral";
    case Valence::Positive: return "positive";
  }
  return "neutral";
}

namespace {

std::vector<AvEntry> build_table() {
  using A = Arousal;
  using V = Valence;
  std::vector<AvEntry> t;
  auto add = [&t](AVLabel cell, std::initializer_list<std::string_view> names) {
    for (auto n : names) t.push_back({n, cell});
  };
  add({A::Low, V::Negative},
      {"contempt", "disappointment", "disgust", "frustration", "guilt", "hurt", "impatience",
       "irritation", "jealousy", "sadness", "shame", "unfriendliness", "worry"});
  add({A::Low, V::Neutral}, {"boredom", "confusion", "neutral", "pondering", "rest", "sneakiness"});
  add({A::Low, V::Positive}, {"admiration", "kindness", "pride", "relief", "tenderness"});
  add({A::High, V::Negative},
      {"aggressiveness", "anger", "anxiety", "despair", "fear", "helplessness", "high-stress",
       "scream"});
  add({A::High, V::Neutral},
      {"emphatic", "interest", "intoxication", "medium-stress", "nervousness", "surprise"});
  add({A::High, V::Positive},
      {"amusement", "cheerfulness", "elation", "excitement", "happiness", "joking", "joy",
       "pleasure", "positive"});
  return t;
}

}  // namespace

const std::vector<AvEntry>& av_table() {
  static const std::vector<AvEntry> table = build_table();
  return table;
}

AVLabel map_to_av(std::string_view label) {
  const std::string key = normalize_label(label);
  for (const auto& e : av_table()) {
    if (e.category == key) return e.cell;
  }
  fail(ErrorKind::UnmappedLabel, "label '" + std::string(label) + "' is not in the AV table");
}

void export_av_table(std::ostream& out) {
  for (const auto& e : av_table()) {
    out << e.category << '\t' << to_string(e.cell.arousal) << '\t' << to_string(e.cell.valence)
        << '\n';
  }
}

}  // namespace emonet
