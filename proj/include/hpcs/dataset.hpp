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

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hpcs/hpc.hpp"

namespace hpcs {

enum class Label { kBenign = 0, kMalicious = 1 };

enum class AttackKind { kMpptDos, kInverterDos, kInputArray, kInputSine };

inline constexpr AttackKind kAllAttacks[] = {AttackKind::kMpptDos, AttackKind::kInverterDos,
                                             AttackKind::kInputArray, AttackKind::kInputSine};

std::string_view label_name(Label label);
std::optional<Label> parse_label(std::string_view name);
std::string_view attack_name(AttackKind kind);  // mppt_dos, inverter_dos, ...
std::optional<AttackKind> parse_attack(std::string_view name);

struct Sample {
  std::string firmware_id;
  std::size_t window_index = 0;
  bool partial = false;
  std::vector<std::int64_t> features;  // aligned with Dataset::feature_names
  Label label = Label::kBenign;
  std::optional<AttackKind> attack_kind;  // present iff label is malicious

  bool operator==(const Sample&) const = default;
};

struct Dataset {
  std::vector<std::string> feature_names;
  std::vector<Sample> samples;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  std::size_t count(Label label) const;
  // Throws data_error("InconsistentFeatures") or ("InvalidSample").
  void validate() const;
  // Keeps only `names` (in the given order); throws usage_error for names
  // absent from this dataset.
  Dataset project(std::span<const std::string> names) const;

  bool operator==(const Dataset&) const = default;
};

// One firmware image's windows, ready to be emitted as samples.
struct FirmwareRun {
  std::string firmware_id;
  Label label = Label::kBenign;
  std::optional<AttackKind> attack_kind;
  std::vector<HpcWindow> windows;
};

struct EmitOptions {
  std::vector<std::string> feature_names;  // empty means all 30
  bool include_partial = true;
};

// Flattens runs into samples in input order. Throws
// data_error("InconsistentFeatures") for unknown or duplicate feature names
// and data_error("InvalidSample") when label and attack kind disagree.
Dataset emit_dataset(std::span<const FirmwareRun> runs, const EmitOptions& options = {});

// Header: firmware_id,window_index,partial,<features...>,label,attack_kind.
void write_dataset_csv(const Dataset& dataset, std::ostream& out);
void write_dataset_csv(const Dataset& dataset, const std::string& path);
Dataset read_dataset_csv(std::istream& in);
Dataset read_dataset_csv(const std::string& path);

}  // namespace hpcs
