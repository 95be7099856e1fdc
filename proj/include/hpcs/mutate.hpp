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

// Static firmware modification: splices attack payloads into a base
// listing at labelled anchor sites.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hpcs/asm.hpp"
#include "hpcs/dataset.hpp"

namespace hpcs {

enum class Anchor { kIsrBlock, kMpptEntry, kSensorRead };

std::string_view anchor_name(Anchor anchor);  // isr_block, mppt_entry, sensor_read
std::optional<Anchor> parse_anchor(std::string_view name);

// ISR rate assumed when converting toggle periods in seconds to ticks.
inline constexpr std::int64_t kIsrRateHz = 60000;

struct InjectionTemplate {
  AttackKind attack = AttackKind::kMpptDos;
  Anchor anchor = Anchor::kIsrBlock;
  std::int64_t period_ticks = 0;
  // Listing lines without addresses. "{imm}" expands to a seeded 8-bit
  // immediate, "{period}" to period_ticks, "{site}" to the site ordinal.
  std::vector<std::string> payload;

  static InjectionTemplate from_json(const nlohmann::json& j);
  static InjectionTemplate load(const std::string& path);
  nlohmann::json to_json() const;

  bool operator==(const InjectionTemplate&) const = default;
};

// Shipped template for each attack.
InjectionTemplate default_template(AttackKind kind);

struct InjectOptions {
  // Anchor marker per anchor kind: a label prefix (label lines whose name
  // starts with it) or a hex address (the instruction at that address).
  std::map<Anchor, std::string> markers = {{Anchor::kIsrBlock, "_IsrBlock"},
                                           {Anchor::kMpptEntry, "_MpptEntry"},
                                           {Anchor::kSensorRead, "_SenseRead"}};
  bool all_sites = true;            // false: only the first matching site
  std::size_t max_site_offset = 2;  // seeded insertion offset after the anchor
};

// Checks that every payload line is one instruction under `map` and that at
// least one of them falls in a counted class. Throws
// data_error("EmptyPayload") or data_error("PayloadUnparsable").
std::vector<Instruction> validate_payload(const InjectionTemplate& t, const CategoryMap& map);

// Returns `base` with the payload spliced in at each anchor site. Later
// instruction addresses are shifted by the payload length so the listing
// stays monotonic. Throws data_error("AnchorNotFound") and the payload
// errors above.
std::string inject(std::string_view base, const InjectionTemplate& t, std::uint64_t seed,
                   const CategoryMap& map, const InjectOptions& options = {});

struct FirmwareImage {
  std::string firmware_id;  // "base" or the attack name
  Label label = Label::kBenign;
  std::optional<AttackKind> attack_kind;
  std::string listing;
};

// Base plus one mutant per template. Each mutant is checked to change at
// least one HPC window; otherwise data_error("UndetectableMutation").
std::vector<FirmwareImage> build_corpus(std::string_view base,
                                        std::span<const InjectionTemplate> templates,
                                        std::uint64_t seed, const CategoryMap& map,
                                        std::size_t window = 50,
                                        const InjectOptions& options = {});

// Deterministic synthetic C28x-style microinverter listing: init code, then
// repeated control slices (sensor read, control law, MPPT step, bit
// handling, PWM/ISR update, dispatch) with labelled anchors.
std::string synthesize_base_listing(std::uint64_t seed, std::size_t slices = 64);

}  // namespace hpcs
