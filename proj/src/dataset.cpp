// Copyright 2026 The hpc-sentinel Authors.
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

#include "hpcs/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "hpcs/csv.hpp"
#include "hpcs/error.hpp"

namespace hpcs {
namespace {

std::int64_t parse_int(const std::string& text, std::size_t row, const std::string& column) {
  std::int64_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw data_error("BadCsv", "row " + std::to_string(row) + ", column " + column +
                                   ": expected an integer, got \"" + text + "\"");
  }
  return value;
}

void check_unique(const std::vector<std::string>& names) {
  std::set<std::string> seen;
  for (const auto& n : names) {
    if (n.empty()) throw data_error("InconsistentFeatures", "empty feature name");
    if (!seen.insert(n).second) {
      throw data_error("InconsistentFeatures", "duplicate feature name " + n);
    }
  }
}

}  // namespace

std::string_view label_name(Label label) {
  return label == Label::kBenign ? "benign" : "malicious";
}

std::optional<Label> parse_label(std::string_view name) {
  if (name == "benign") return Label::kBenign;
  if (name == "malicious") return Label::kMalicious;
  return std::nullopt;
}

std::string_view attack_name(AttackKind kind) {
  switch (kind) {
    case AttackKind::kMpptDos: return "mppt_dos";
    case AttackKind::kInverterDos: return "inverter_dos";
    case AttackKind::kInputArray: return "input_array";
    case AttackKind::kInputSine: return "input_sine";
  }
  return "unknown";
}

std::optional<AttackKind> parse_attack(std::string_view name) {
  for (AttackKind k : kAllAttacks) {
    if (attack_name(k) == name) return k;
  }
  return std::nullopt;
}

std::size_t Dataset::count(Label label) const {
  std::size_t n = 0;
  for (const auto& s : samples) n += s.label == label;
  return n;
}

void Dataset::validate() const {
  check_unique(feature_names);
  for (const auto& s : samples) {
    if (s.features.size() != feature_names.size()) {
      throw data_error("InconsistentFeatures",
                       "sample " + s.firmware_id + "#" + std::to_string(s.window_index) + " has " +
                           std::to_string(s.features.size()) + " features, expected " +
                           std::to_string(feature_names.size()));
    }
    if ((s.label == Label::kBenign) == s.attack_kind.has_value()) {
      throw data_error("InvalidSample", "sample " + s.firmware_id + "#" +
                                            std::to_string(s.window_index) +
                                            ": attack kind must be set exactly for malicious rows");
    }
  }
}

Dataset Dataset::project(std::span<const std::string> names) const {
  std::vector<std::size_t> idx;
  idx.reserve(names.size());
  for (const auto& n : names) {
    const auto it = std::find(feature_names.begin(), feature_names.end(), n);
    if (it == feature_names.end()) {
      throw usage_error("UnknownFeature", "feature " + n + " is not in the dataset");
    }
    idx.push_back(static_cast<std::size_t>(it - feature_names.begin()));
  }
  Dataset out;
  out.feature_names.assign(names.begin(), names.end());
  out.samples.reserve(samples.size());
  for (const auto& s : samples) {
    Sample p = s;
    p.features.clear();
    for (std::size_t i : idx) p.features.push_back(s.features[i]);
    out.samples.push_back(std::move(p));
  }
  return out;
}

Dataset emit_dataset(std::span<const FirmwareRun> runs, const EmitOptions& options) {
  Dataset out;
  std::vector<std::size_t> idx;
  if (options.feature_names.empty()) {
    out.feature_names.assign(feature_names().begin(), feature_names().end());
    for (std::size_t i = 0; i < kNumFeatures; ++i) idx.push_back(i);
  } else {
    check_unique(options.feature_names);
    for (const auto& n : options.feature_names) {
      const auto i = feature_index(n);
      if (!i) throw data_error("InconsistentFeatures", "unknown HPC feature " + n);
      idx.push_back(*i);
    }
    out.feature_names = options.feature_names;
  }
  for (const auto& run : runs) {
    if ((run.label == Label::kBenign) == run.attack_kind.has_value()) {
      throw data_error("InvalidSample",
                       run.firmware_id + ": attack kind must be set exactly for malicious runs");
    }
    for (std::size_t w = 0; w < run.windows.size(); ++w) {
      const auto& win = run.windows[w];
      if (win.partial && !options.include_partial) continue;
      Sample s;
      s.firmware_id = run.firmware_id;
      s.window_index = w;
      s.partial = win.partial;
      s.label = run.label;
      s.attack_kind = run.attack_kind;
      s.features.reserve(idx.size());
      for (std::size_t i : idx) s.features.push_back(win.features[i]);
      out.samples.push_back(std::move(s));
    }
  }
  return out;
}

void write_dataset_csv(const Dataset& dataset, std::ostream& out) {
  dataset.validate();
  std::vector<std::string> row = {"firmware_id", "window_index", "partial"};
  row.insert(row.end(), dataset.feature_names.begin(), dataset.feature_names.end());
  row.emplace_back("label");
  row.emplace_back("attack_kind");
  csv::write_row(out, row);
  for (const auto& s : dataset.samples) {
    row.clear();
    row.push_back(s.firmware_id);
    row.push_back(std::to_string(s.window_index));
    row.emplace_back(s.partial ? "1" : "0");
    for (auto v : s.features) row.push_back(std::to_string(v));
    row.emplace_back(label_name(s.label));
    row.emplace_back(s.attack_kind ? attack_name(*s.attack_kind) : "");
    csv::write_row(out, row);
  }
  if (!out) throw data_error("IoError", "failed writing dataset CSV");
}

void write_dataset_csv(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("IoError", "cannot open " + path + " for writing");
  write_dataset_csv(dataset, out);
}

Dataset read_dataset_csv(std::istream& in) {
  std::vector<std::string> row;
  if (!csv::read_row(in, row)) throw data_error("BadCsv", "dataset CSV is empty");
  if (row.size() < 5 || row[0] != "firmware_id" || row[1] != "window_index" ||
      row[2] != "partial" || row[row.size() - 2] != "label" || row.back() != "attack_kind") {
    throw data_error("BadCsv",
                     "dataset header must be firmware_id,window_index,partial,<features...>,"
                     "label,attack_kind");
  }
  Dataset d;
  d.feature_names.assign(row.begin() + 3, row.end() - 2);
  check_unique(d.feature_names);
  const std::size_t width = row.size();
  std::size_t line = 1;
  while (csv::read_row(in, row)) {
    ++line;
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != width) {
      throw data_error("InconsistentFeatures", "row " + std::to_string(line) + " has " +
                                                   std::to_string(row.size()) + " fields, expected " +
                                                   std::to_string(width));
    }
    Sample s;
    s.firmware_id = row[0];
    s.window_index = static_cast<std::size_t>(parse_int(row[1], line, "window_index"));
    s.partial = parse_int(row[2], line, "partial") != 0;
    for (std::size_t i = 3; i + 2 < width; ++i) {
      s.features.push_back(parse_int(row[i], line, row.size() > i ? d.feature_names[i - 3] : ""));
    }
    const auto label = parse_label(row[width - 2]);
    if (!label) throw data_error("BadCsv", "row " + std::to_string(line) + ": bad label");
    s.label = *label;
    if (!row.back().empty()) {
      const auto kind = parse_attack(row.back());
      if (!kind) throw data_error("BadCsv", "row " + std::to_string(line) + ": bad attack_kind");
      s.attack_kind = *kind;
    }
    d.samples.push_back(std::move(s));
  }
  d.validate();
  return d;
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("IoError", "cannot open dataset " + path);
  return read_dataset_csv(in);
}

}  // namespace hpcs
