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

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace emonet {

enum class Arousal { Low, High };
enum class Valence { Negative, Neutral, Positive };

struct AVLabel {
  Arousal arousal;
  Valence valence;
  bool operator==(const AVLabel&) const = default;
};

std::string_view to_string(Arousal a);
std::string_view to_string(Valence v);

struct AvEntry {
  std::string_view category;
  AVLabel cell;
};

/// The built-in category table: 47 emotion categories over the six
/// arousal x valence cells.
const std::vector<AvEntry>& av_table();

/// Case-insensitive, whitespace-trimmed lookup. Throws UnmappedLabel.
AVLabel map_to_av(std::string_view label);

/// category<TAB>arousal<TAB>valence, one line per entry, table order.
void export_av_table(std::ostream& out);

}  // namespace emonet
