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

#include "emonet/eval.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace emonet {

namespace fs = std::filesystem;

std::size_t ConfusionMatrix::row_sum(std::size_t ref) const {
  std::size_t s = 0;
  for (std::size_t j = 0; j < classes; ++j) s += at(ref, j);
  return s;
}

std::size_t ConfusionMatrix::total() const {
  std::size_t s = 0;
  for (std::size_t v : counts) s += v;
  return s;
}

ConfusionMatrix confusion(const std::vector<int>& reference, const std::vector<int>& prediction,
                          std::size_t classes) {
  if (reference.size() != prediction.size()) {
    fail(ErrorKind::LengthMismatch, "reference and prediction lengths differ");
  }
  ConfusionMatrix m(classes);
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const int r = reference[i];
    const int p = prediction[i];
    if (r < 0 || p < 0 || static_cast<std::size_t>(r) >= classes ||
        static_cast<std::size_t>(p) >= classes) {
      fail(ErrorKind::LabelOutOfRange, "class index outside [0, " + std::to_string(classes) + ")");
    }
    ++m.at(static_cast<std::size_t>(r), static_cast<std::size_t>(p));
  }
  return m;
}

std::vector<double> per_class_recall(const ConfusionMatrix& m) {
  std::vector<double> out(m.classes, std::nan(""));
  for (std::size_t k = 0; k < m.classes; ++k) {
    const std::size_t n = m.row_sum(k);
    if (n > 0) out[k] = static_cast<double>(m.at(k, k)) / static_cast<double>(n);
  }
  return out;
}

double uar(const ConfusionMatrix& m) {
  double sum = 0.0;
  std::size_t present = 0;
  for (double r : per_class_recall(m)) {
    if (std::isnan(r)) continue;
    sum += r;
    ++present;
  }
  if (present == 0) fail(ErrorKind::EmptyMatrix, "confusion matrix has no reference samples");
  return sum / static_cast<double>(present);
}

double chance_level(std::size_t classes) {
  if (classes < 2) fail(ErrorKind::InvalidConfig, "chance level needs at least two classes");
  return 1.0 / static_cast<double>(classes);
}

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::Improvement: return "improvement";
    case Direction::Decrease: return "decrease";
    case Direction::None: return "none";
  }
  return "none";
}

double binomial_two_sided(std::size_t b, std::size_t c) {
  const std::size_t n = b + c;
  if (n == 0) return 1.0;
  const std::size_t k = std::min(b, c);
  const double ln_half_n = static_cast<double>(n) * std::log(0.5);
  double tail = 0.0;
  for (std::size_t i = 0; i <= k; ++i) {
    const double ln_choose = std::lgamma(static_cast<double>(n) + 1.0) -
                             std::lgamma(static_cast<double>(i) + 1.0) -
                             std::lgamma(static_cast<double>(n - i) + 1.0);
    tail += std::exp(ln_choose + ln_half_n);
  }
  return std::min(1.0, 2.0 * tail);
}

McNemarResult mcnemar(const std::vector<int>& baseline, const std::vector<int>& candidate,
                      const std::vector<int>& reference, const McNemarSettings& settings) {
  if (baseline.size() != reference.size() || candidate.size() != reference.size()) {
    fail(ErrorKind::LengthMismatch, "mcnemar: prediction lists differ in length");
  }
  McNemarResult r;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const bool a_ok = baseline[i] == reference[i];
    const bool b_ok = candidate[i] == reference[i];
    if (a_ok && !b_ok) ++r.b;
    if (!a_ok && b_ok) ++r.c;
  }
  const std::size_t n = r.b + r.c;
  if (n == 0) return r;
  const double diff = std::abs(static_cast<double>(r.b) - static_cast<double>(r.c)) - 1.0;
  r.statistic = diff * diff / static_cast<double>(n);
  if (n < settings.exact_below) {
    r.exact = true;
    r.p_value = binomial_two_sided(r.b, r.c);
    r.significant = r.p_value < settings.alpha;
  } else {
    r.p_value = std::erfc(std::sqrt(r.statistic / 2.0));  // chi-square, 1 dof
    r.significant = r.statistic > settings.critical;
  }
  if (r.significant) r.direction = r.c > r.b ? Direction::Improvement : Direction::Decrease;
  return r;
}

void write_predictions(std::ostream& out, const Predictions& p) {
  out << "sample_id,reference,prediction\n";
  for (std::size_t i = 0; i < p.sample_ids.size(); ++i) {
    out << p.sample_ids[i] << ',' << p.labels.at(static_cast<std::size_t>(p.reference[i])) << ','
        << p.labels.at(static_cast<std::size_t>(p.prediction[i])) << '\n';
  }
}

void save_predictions(const fs::path& path, const Predictions& p) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot write " + path.string());
  write_predictions(out, p);
}

Predictions load_predictions(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("sample_id,reference,prediction", 0) != 0) {
    fail(ErrorKind::MissingColumn, path.string() + ": expected header sample_id,reference,prediction");
  }
  std::vector<std::array<std::string, 3>> rows;
  std::map<std::string, int> names;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto c2 = line.rfind(',');
    const auto c1 = c2 == std::string::npos ? c2 : line.rfind(',', c2 - 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      fail(ErrorKind::MissingColumn, path.string() + ": malformed row '" + line + "'");
    }
    rows.push_back({line.substr(0, c1), line.substr(c1 + 1, c2 - c1 - 1), line.substr(c2 + 1)});
    names[rows.back()[1]] = 0;
    names[rows.back()[2]] = 0;
  }
  Predictions p;
  p.corpus_id = path.stem().string();
  for (auto& [name, idx] : names) {
    idx = static_cast<int>(p.labels.size());
    p.labels.push_back(name);
  }
  for (const auto& r : rows) {
    p.sample_ids.push_back(r[0]);
    p.reference.push_back(names[r[1]]);
    p.prediction.push_back(names[r[2]]);
  }
  return p;
}

EvalReport make_report(const Predictions& p, const std::string& partition) {
  EvalReport r;
  r.corpus_id = p.corpus_id;
  r.partition = partition;
  r.labels = p.labels;
  r.confusion = confusion(p.reference, p.prediction, p.labels.size());
  r.recalls = per_class_recall(r.confusion);
  for (std::size_t k = 0; k < r.recalls.size(); ++k) {
    if (std::isnan(r.recalls[k])) r.absent_classes.push_back(p.labels[k]);
  }
  r.uar = uar(r.confusion);
  std::size_t correct = 0;
  for (std::size_t k = 0; k < r.confusion.classes; ++k) correct += r.confusion.at(k, k);
  r.accuracy = static_cast<double>(correct) / static_cast<double>(r.confusion.total());
  r.chance = chance_level(p.labels.size());
  return r;
}

Json to_json(const EvalReport& r) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < r.confusion.classes; ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < r.confusion.classes; ++j) row.push_back(r.confusion.at(i, j));
    rows.push_back(row);
  }
  Json recalls = Json::object();
  for (std::size_t k = 0; k < r.labels.size(); ++k) {
    recalls[r.labels[k]] = std::isnan(r.recalls[k]) ? Json(nullptr) : Json(r.recalls[k]);
  }
  return Json{{"corpus_id", r.corpus_id}, {"partition", r.partition}, {"uar", r.uar},
              {"accuracy", r.accuracy},   {"chance", r.chance},       {"labels", r.labels},
              {"confusion", rows},        {"recalls", recalls},
              {"absent_classes", r.absent_classes}};
}

std::string format_report(const EvalReport& r) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(1);
  os << r.corpus_id << " / " << r.partition << "  UAR " << 100.0 * r.uar << " %  (chance "
     << 100.0 * r.chance << " %, accuracy " << 100.0 * r.accuracy << " %)\n";
  std::size_t w = 10;
  for (const auto& l : r.labels) w = std::max(w, l.size() + 2);
  os << std::setw(static_cast<int>(w)) << "ref\\pred";
  for (const auto& l : r.labels) os << std::setw(static_cast<int>(w)) << l;
  os << std::setw(10) << "recall" << '\n';
  for (std::size_t i = 0; i < r.labels.size(); ++i) {
    os << std::setw(static_cast<int>(w)) << r.labels[i];
    for (std::size_t j = 0; j < r.labels.size(); ++j) {
      os << std::setw(static_cast<int>(w)) << r.confusion.at(i, j);
    }
    if (std::isnan(r.recalls[i])) {
      os << std::setw(10) << "absent";
    } else {
      os << std::setw(10) << 100.0 * r.recalls[i];
    }
    os << '\n';
  }
  if (!r.absent_classes.empty()) {
    os << "excluded from UAR (no reference samples):";
    for (const auto& a : r.absent_classes) os << ' ' << a;
    os << '\n';
  }
  return os.str();
}

CompareTable compare_report(const Predictions& baseline,
                            const std::vector<std::pair<std::string, Predictions>>& candidates,
                            const McNemarSettings& settings) {
  CompareTable t;
  t.corpus_id = baseline.corpus_id;
  t.chance = chance_level(baseline.labels.size());
  t.baseline_uar = uar(confusion(baseline.reference, baseline.prediction, baseline.labels.size()));
  for (const auto& [name, cand] : candidates) {
    if (cand.sample_ids != baseline.sample_ids) {
      fail(ErrorKind::MisalignedRuns, "run '" + name + "' covers different samples or order");
    }
    // Label indices may differ between files; compare by name.
    std::vector<int> ref(cand.reference.size());
    std::vector<int> pred(cand.prediction.size());
    std::map<std::string, int> index;
    for (std::size_t k = 0; k < baseline.labels.size(); ++k) {
      index[baseline.labels[k]] = static_cast<int>(k);
    }
    auto map_label = [&](int i) {
      const auto& nm = cand.labels.at(static_cast<std::size_t>(i));
      auto it = index.find(nm);
      if (it == index.end()) {
        it = index.emplace(nm, static_cast<int>(index.size())).first;
      }
      return it->second;
    };
    for (std::size_t i = 0; i < ref.size(); ++i) {
      ref[i] = map_label(cand.reference[i]);
      pred[i] = map_label(cand.prediction[i]);
      if (ref[i] != baseline.reference[i]) {
        fail(ErrorKind::MisalignedRuns, "run '" + name + "' disagrees on the reference of '" +
                                            cand.sample_ids[i] + "'");
      }
    }
    CompareRow row;
    row.name = name;
    row.uar = uar(confusion(ref, pred, index.size()));
    row.test = mcnemar(baseline.prediction, pred, baseline.reference, settings);
    row.mark = row.test.direction == Direction::Improvement
                   ? '+'
                   : (row.test.direction == Direction::Decrease ? '-' : ' ');
    t.rows.push_back(row);
  }
  return t;
}

std::string format_compare(const CompareTable& t) {
  std::ostringstream os;
  os << std::fixed;
  std::size_t w = 9;
  for (const auto& r : t.rows) w = std::max(w, r.name.size() + 2);
  os << std::left << std::setw(static_cast<int>(w)) << "run" << std::right << std::setw(8)
     << "UAR" << std::setw(6) << "mark" << std::setw(6) << "b" << std::setw(6) << "c"
     << std::setw(10) << "stat" << std::setw(10) << "p" << "  direction\n";
  os << std::left << std::setw(static_cast<int>(w)) << "baseline" << std::right
     << std::setprecision(1) << std::setw(8) << 100.0 * t.baseline_uar << '\n';
  for (const auto& r : t.rows) {
    os << std::left << std::setw(static_cast<int>(w)) << r.name << std::right
       << std::setprecision(1) << std::setw(8) << 100.0 * r.uar << std::setw(6) << r.mark
       << std::setw(6) << r.test.b << std::setw(6) << r.test.c << std::setprecision(3)
       << std::setw(10) << r.test.statistic;
    if (std::isnan(r.test.p_value)) {
      os << std::setw(10) << "-";
    } else {
      os << std::setw(10) << r.test.p_value;
    }
    os << "  " << to_string(r.test.direction) << '\n';
  }
  os << std::setprecision(1) << "chance " << 100.0 * t.chance
     << " %. Marks follow McNemar's test (p < 0.05); on imbalanced data a '+' need not "
        "coincide with a higher UAR.\n";
  return os.str();
}

Json to_json(const CompareTable& t) {
  Json rows = Json::array();
  for (const auto& r : t.rows) {
    rows.push_back({{"name", r.name},
                    {"uar", r.uar},
                    {"mark", std::string(1, r.mark)},
                    {"b", r.test.b},
                    {"c", r.test.c},
                    {"statistic", r.test.statistic},
                    {"p_value", r.test.p_value},
                    {"exact", r.test.exact},
                    {"significant", r.test.significant},
                    {"direction", std::string(to_string(r.test.direction))}});
  }
  return Json{{"corpus_id", t.corpus_id},
              {"chance", t.chance},
              {"baseline_uar", t.baseline_uar},
              {"candidates", rows}};
}

}  // namespace emonet
