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

#include "hpcs/mutate.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "hpcs/error.hpp"
#include "hpcs/hpc.hpp"
#include "hpcs/rng.hpp"

namespace hpcs {
namespace {

struct Line {
  std::string text;
  std::optional<Instruction> instr;
  std::string label;  // label name without ':' if the line starts with one
};

std::vector<Line> split_lines(std::string_view text, const CategoryMap& map) {
  std::vector<Line> lines;
  while (!text.empty()) {
    const std::size_t eol = text.find('\n');
    Line line;
    line.text = std::string(text.substr(0, eol));
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);

    auto parsed = parse_listing(line.text, map);
    if (parsed.instructions.size() == 1) line.instr = std::move(parsed.instructions.front());

    std::string_view t = line.text;
    if (auto semi = t.find(';'); semi != std::string_view::npos) t = t.substr(0, semi);
    std::size_t b = t.find_first_not_of(" \t");
    if (b != std::string_view::npos) {
      t = t.substr(b);
      const std::size_t e = t.find_first_of(" \t\r");
      const std::string_view first = t.substr(0, e);
      if (first.size() > 1 && first.back() == ':') {
        line.label = std::string(first.substr(0, first.size() - 1));
      }
    }
    lines.push_back(std::move(line));
  }
  return lines;
}

std::uint64_t parse_hex(std::string_view s) {
  std::uint64_t v = 0;
  for (char c : s) {
    v = v * 16 + static_cast<std::uint64_t>(std::isdigit(static_cast<unsigned char>(c))
                                                ? c - '0'
                                                : std::tolower(static_cast<unsigned char>(c)) - 'a' + 10);
  }
  return v;
}

std::string format_hex(std::uint64_t v, std::size_t width) {
  return fmt::format("{:0{}x}", v, width);
}

bool equals_ignore_case(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

bool looks_like_address(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return std::isxdigit(static_cast<unsigned char>(c));
  }) && std::any_of(s.begin(), s.end(), [](char c) {
    return std::isdigit(static_cast<unsigned char>(c));
  });
}

std::string expand(std::string_view line, const InjectionTemplate& t, std::size_t site, Rng& rng) {
  std::string out;
  for (std::size_t i = 0; i < line.size();) {
    if (line.compare(i, 5, "{imm}") == 0) {
      out += fmt::format("0x{:02X}", rng.index(256));
      i += 5;
    } else if (line.compare(i, 8, "{period}") == 0) {
      out += std::to_string(t.period_ticks);
      i += 8;
    } else if (line.compare(i, 6, "{site}") == 0) {
      out += std::to_string(site);
      i += 6;
    } else {
      out += line[i++];
    }
  }
  return out;
}

// Replaces the leading address token of an instruction line.
std::string readdress(const std::string& text, std::int64_t shift) {
  const std::size_t b = text.find_first_not_of(" \t");
  const std::size_t e = text.find_first_of(" \t", b);
  const std::string addr = text.substr(b, e - b);
  const auto value = static_cast<std::uint64_t>(static_cast<std::int64_t>(parse_hex(addr)) + shift);
  return text.substr(0, b) + format_hex(value, addr.size()) +
         (e == std::string::npos ? std::string{} : text.substr(e));
}

}  // namespace

std::string_view anchor_name(Anchor anchor) {
  switch (anchor) {
    case Anchor::kIsrBlock: return "isr_block";
    case Anchor::kMpptEntry: return "mppt_entry";
    case Anchor::kSensorRead: return "sensor_read";
  }
  return "unknown";
}

std::optional<Anchor> parse_anchor(std::string_view name) {
  for (Anchor a : {Anchor::kIsrBlock, Anchor::kMpptEntry, Anchor::kSensorRead}) {
    if (anchor_name(a) == name) return a;
  }
  return std::nullopt;
}

InjectionTemplate InjectionTemplate::from_json(const nlohmann::json& j) {
  InjectionTemplate t;
  try {
    const auto attack = parse_attack(j.at("attack").get<std::string>());
    if (!attack) throw data_error("BadTemplate", "unknown attack " + j.at("attack").dump());
    const auto anchor = parse_anchor(j.at("anchor").get<std::string>());
    if (!anchor) throw data_error("BadTemplate", "unknown anchor " + j.at("anchor").dump());
    t.attack = *attack;
    t.anchor = *anchor;
    t.period_ticks = j.value("period_ticks", std::int64_t{0});
    t.payload = j.at("payload").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw data_error("BadTemplate", e.what());
  }
  if (t.period_ticks < 0) throw data_error("BadTemplate", "period_ticks must be >= 0");
  return t;
}

InjectionTemplate InjectionTemplate::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("IoError", "cannot open template " + path);
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw data_error("BadTemplate", path + ": " + e.what());
  }
}

nlohmann::json InjectionTemplate::to_json() const {
  return {{"attack", std::string(attack_name(attack))},
          {"anchor", std::string(anchor_name(anchor))},
          {"period_ticks", period_ticks},
          {"payload", payload}};
}

InjectionTemplate default_template(AttackKind kind) {
  InjectionTemplate t;
  t.attack = kind;
  switch (kind) {
    case AttackKind::kMpptDos:
      // Kill switch at MPPT entry: return before the tracker runs.
      t.anchor = Anchor::kMpptEntry;
      t.payload = {
          "MOVW DP,#_MpptKill",
          "TBIT @_MpptKill,#0",
          "SB $+4,NTC",
          "TCLR @_MpptFlags,#1",
          "MOVL ACC,@_IrefHold",
          "LRETR",
          "OR @_MpptKill,#{imm}",
      };
      break;
    case AttackKind::kInverterDos:
      // Timer-driven lock/unlock of the output stage every 10 s.
      t.anchor = Anchor::kIsrBlock;
      t.period_ticks = 10 * kIsrRateHz;
      t.payload = {
          "MOVL ACC,@_DosTicks",
          "ADDB ACC,#1",
          "CMPL ACC,@_DosPeriod",
          "SB $+6,LO",
          "XOR @_DosLock,#0x0001",
          "MOVB ACC,#0",
          "TBIT @_DosLock,#0",
          "SB $+3,NTC",
          "AND @_PwmEnable,#{imm}",
          "MOVH @_DosTicks,P",
          "LB _IsrExit",
      };
      break;
    case AttackKind::kInputArray:
      // Substitute sensed V/I with entries of a constant array.
      t.anchor = Anchor::kSensorRead;
      t.payload = {
          "MOVL XAR7,#_FakeSamples",
          "MOVZ AR0,@_FakeIdx",
          "INC @_FakeIdx",
          "AND @_FakeIdx,#0x000F",
          "MOV T,*+XAR7[AR0]",
          "MOVAD T,@_VpvSense",
          "MOV T,*+XAR7[AR0]",
          "MOVAD T,@_IpvSense",
          "PUSH XAR7",
      };
      break;
    case AttackKind::kInputSine:
      // Substitute sensed V/I with samples of a sine table.
      t.anchor = Anchor::kSensorRead;
      t.payload = {
          "MOVL XAR6,#_SinTable",
          "MOV AL,@_SinPhase",
          "ADDB AL,#{imm}",
          "ANDB AL,#0xFF",
          "MOV @_SinPhase,AL",
          "MOVZ AR0,AL",
          "MOV T,*+XAR6[AR0]",
          "MPY P,T,@_SinGainV",
          "MOVH @_VpvSense,P",
          "MPY P,T,@_SinGainI",
          "MOVH @_IpvSense,P",
      };
      break;
  }
  return t;
}

std::vector<Instruction> validate_payload(const InjectionTemplate& t, const CategoryMap& map) {
  if (t.payload.empty()) {
    throw data_error("EmptyPayload", std::string(attack_name(t.attack)) + ": payload is empty");
  }
  std::vector<Instruction> out;
  bool counted = false;
  for (const auto& raw : t.payload) {
    const std::string line = [&] {
      std::string s = raw;
      for (const char* ph : {"{imm}", "{period}", "{site}"}) {
        for (auto p = s.find(ph); p != std::string::npos; p = s.find(ph)) s.replace(p, std::string_view(ph).size(), "0");
      }
      return s;
    }();
    ParseResult r;
    try {
      r = parse_listing(line, map, ParseMode::kStrict);
    } catch (const Error&) {
      r = {};
    }
    if (r.instructions.size() != 1 || line.find('\n') != std::string::npos) {
      throw data_error("PayloadUnparsable", std::string(attack_name(t.attack)) +
                                                ": payload line is not one instruction: " + raw);
    }
    counted = counted || r.instructions.front().category != Category::kOther;
    out.push_back(std::move(r.instructions.front()));
  }
  if (!counted) {
    throw data_error("PayloadUnparsable", std::string(attack_name(t.attack)) +
                                              ": payload has no counted instruction");
  }
  return out;
}

std::string inject(std::string_view base, const InjectionTemplate& t, std::uint64_t seed,
                   const CategoryMap& map, const InjectOptions& options) {
  validate_payload(t, map);
  const auto marker_it = options.markers.find(t.anchor);
  if (marker_it == options.markers.end() || marker_it->second.empty()) {
    throw usage_error("AnchorNotFound", "no marker configured for anchor " +
                                            std::string(anchor_name(t.anchor)));
  }
  const std::string& marker = marker_it->second;
  const auto lines = split_lines(base, map);
  Rng rng(seed);

  // Insertion points are line indices; the payload goes before that line.
  std::vector<std::size_t> points;
  const bool by_address = looks_like_address(marker);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::size_t at = lines.size();
    if (by_address) {
      if (!lines[i].instr || !equals_ignore_case(lines[i].instr->address, marker)) continue;
      at = i;
    } else {
      if (lines[i].label.empty() || !lines[i].label.starts_with(marker)) continue;
      at = i + 1;
    }
    const std::size_t offset = rng.index(options.max_site_offset + 1);
    for (std::size_t skipped = 0; at < lines.size() && skipped < offset; ++at) {
      if (!lines[at].label.empty()) break;
      if (lines[at].instr) ++skipped;
    }
    // Land just before an instruction, not a trailing comment or blank.
    while (at < lines.size() && !lines[at].instr && lines[at].label.empty()) ++at;
    points.push_back(at);
    if (!options.all_sites) break;
  }
  if (points.empty()) {
    throw data_error("AnchorNotFound", "anchor " + std::string(anchor_name(t.anchor)) +
                                           " (marker \"" + marker + "\") not found in listing");
  }

  const auto payload_size = static_cast<std::int64_t>(t.payload.size());
  std::ostringstream out;
  std::int64_t shift = 0;
  std::uint64_t last_addr = 0;
  std::size_t addr_width = 7;
  std::size_t next_point = 0;
  for (std::size_t i = 0; i <= lines.size(); ++i) {
    while (next_point < points.size() && points[next_point] == i) {
      // The payload takes over the addresses of the code it is placed in front of.
      std::optional<std::uint64_t> next_addr;
      for (std::size_t k = i; k < lines.size(); ++k) {
        if (lines[k].instr && !lines[k].instr->address.empty()) {
          next_addr = parse_hex(lines[k].instr->address);
          addr_width = lines[k].instr->address.size();
          break;
        }
      }
      const std::uint64_t start =
          next_addr ? static_cast<std::uint64_t>(static_cast<std::int64_t>(*next_addr) + shift)
                    : last_addr + 1;
      for (std::int64_t j = 0; j < payload_size; ++j) {
        const std::string body = expand(t.payload[static_cast<std::size_t>(j)], t, next_point, rng);
        out << format_hex(start + static_cast<std::uint64_t>(j), addr_width) << ' '
            << format_hex(rng.index(0x10000) | 0x1000, 4) << ' ' << body << '\n';
      }
      last_addr = start + static_cast<std::uint64_t>(payload_size) - 1;
      shift += payload_size;
      ++next_point;
    }
    if (i == lines.size()) break;
    const Line& line = lines[i];
    if (line.instr && !line.instr->address.empty() && line.label.empty()) {
      out << readdress(line.text, shift);
      last_addr = static_cast<std::uint64_t>(static_cast<std::int64_t>(parse_hex(line.instr->address)) + shift);
      addr_width = line.instr->address.size();
    } else {
      out << line.text;
    }
    if (i + 1 < lines.size() || base.ends_with('\n')) out << '\n';
  }
  return out.str();
}

std::vector<FirmwareImage> build_corpus(std::string_view base,
                                        std::span<const InjectionTemplate> templates,
                                        std::uint64_t seed, const CategoryMap& map,
                                        std::size_t window, const InjectOptions& options) {
  for (const auto& t : templates) validate_payload(t, map);
  std::vector<FirmwareImage> corpus;
  corpus.push_back({"base", Label::kBenign, std::nullopt, std::string(base)});
  const auto base_windows = extract_windows(parse_listing(base, map).instructions, window);
  for (std::size_t i = 0; i < templates.size(); ++i) {
    const auto& t = templates[i];
    FirmwareImage img{std::string(attack_name(t.attack)), Label::kMalicious, t.attack,
                      inject(base, t, derive_seed(seed, i + 1), map, options)};
    const auto windows = extract_windows(parse_listing(img.listing, map).instructions, window);
    const bool same = windows.size() == base_windows.size() &&
                      std::equal(windows.begin(), windows.end(), base_windows.begin(),
                                 [](const HpcWindow& a, const HpcWindow& b) {
                                   return a.features == b.features;
                                 });
    if (same) {
      throw data_error("UndetectableMutation",
                       img.firmware_id + ": mutant has the same HPC windows as the base");
    }
    corpus.push_back(std::move(img));
  }
  return corpus;
}

}  // namespace hpcs
