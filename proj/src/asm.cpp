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

#include "hpcs/asm.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "hpcs/error.hpp"

namespace hpcs {
namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

// Splits off the first whitespace-delimited token; `rest` keeps its
// internal spacing.
std::string_view next_token(std::string_view& rest) {
  rest = trim(rest);
  std::size_t end = 0;
  while (end < rest.size() && !is_space(rest[end])) ++end;
  std::string_view token = rest.substr(0, end);
  rest = trim(rest.substr(end));
  return token;
}

// Addresses and opcode words are hex digits written with at least one
// decimal digit or in lowercase; this keeps mnemonics such as ADD, DEC or B
// from being read as hex.
bool is_hex_word(std::string_view token) {
  if (token.empty()) return false;
  bool has_digit = false;
  bool has_upper = false;
  for (char c : token) {
    if (!std::isxdigit(static_cast<unsigned char>(c))) return false;
    if (std::isdigit(static_cast<unsigned char>(c))) has_digit = true;
    if (std::isupper(static_cast<unsigned char>(c))) has_upper = true;
  }
  return has_digit || !has_upper;
}

bool is_mnemonic(std::string_view token) {
  if (token.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(token.front())) && token.front() != '_') return false;
  return std::all_of(token.begin(), token.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
  });
}

std::string to_upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

enum class LineKind { kInstruction, kSkipped, kMalformed };

LineKind parse_line(std::string_view line, const CategoryMap& map, Instruction& out) {
  if (auto semi = line.find(';'); semi != std::string_view::npos) line = line.substr(0, semi);
  std::string_view rest = trim(line);
  if (rest.empty() || rest.front() == '*') return LineKind::kSkipped;

  std::string_view token = next_token(rest);
  if (token.back() == ':') {
    if (rest.empty()) return LineKind::kSkipped;
    token = next_token(rest);
  }
  if (token.front() == '.') return LineKind::kSkipped;

  out = Instruction{};
  if (is_hex_word(token)) {
    out.address = std::string(token);
    std::string opcode;
    for (;;) {
      if (rest.empty()) return LineKind::kSkipped;  // bare data word(s)
      token = next_token(rest);
      if (!is_hex_word(token)) break;
      if (!opcode.empty()) opcode += ' ';
      opcode += token;
    }
    out.raw_opcode = std::move(opcode);
    if (token.front() == '.') return LineKind::kSkipped;
  }
  if (!is_mnemonic(token)) return LineKind::kMalformed;
  out.mnemonic = to_upper(token);
  out.operands = std::string(rest);
  out.category = map.classify(out.mnemonic);
  return LineKind::kInstruction;
}

}  // namespace

char category_symbol(Category c) {
  switch (c) {
    case Category::kArithmetic: return 'a';
    case Category::kBoolean: return 'n';
    case Category::kStore: return 's';
    case Category::kLoad: return 'l';
    case Category::kBranch: return 'b';
    case Category::kOther: break;
  }
  return '?';
}

std::optional<std::size_t> class_index(Category c) {
  switch (c) {
    case Category::kArithmetic: return 0;
    case Category::kBranch: return 1;
    case Category::kLoad: return 2;
    case Category::kBoolean: return 3;
    case Category::kStore: return 4;
    case Category::kOther: break;
  }
  return std::nullopt;
}

std::optional<Category> category_from_symbol(char symbol) {
  for (Category c : kCountedClasses) {
    if (category_symbol(c) == symbol) return c;
  }
  return std::nullopt;
}

std::optional<Category> parse_category_name(std::string_view name) {
  const std::string n = to_lower(trim(name));
  if (n == "a" || n == "arith" || n == "arithmetic") return Category::kArithmetic;
  if (n == "n" || n == "bool" || n == "boolean") return Category::kBoolean;
  if (n == "s" || n == "store") return Category::kStore;
  if (n == "l" || n == "load") return Category::kLoad;
  if (n == "b" || n == "branch" || n == "jump") return Category::kBranch;
  if (n == "other") return Category::kOther;
  return std::nullopt;
}

std::string_view category_name(Category c) {
  switch (c) {
    case Category::kArithmetic: return "arith";
    case Category::kBoolean: return "bool";
    case Category::kStore: return "store";
    case Category::kLoad: return "load";
    case Category::kBranch: return "branch";
    case Category::kOther: break;
  }
  return "other";
}

CategoryMap CategoryMap::c28x_default() {
  CategoryMap map("ti-c28x-default");
  const auto add = [&map](Category c, std::initializer_list<std::string_view> mnemonics) {
    for (auto m : mnemonics) map.set(m, c);
  };
  add(Category::kLoad, {"MOV", "MOVL", "MOVU", "MOVB", "MOVW", "MOVZ", "MOVX", "MOVP", "MOV32",
                        "POP", "PREAD"});
  add(Category::kStore, {"MOVH", "MOVDL", "MOVAD", "PUSH", "PWRITE"});
  add(Category::kArithmetic, {"ADD", "ADDB", "ADDL", "ADDU", "ADDUL", "ADDCU", "ADDCL", "SUB",
                              "SUBB", "SUBL", "SUBU", "SUBUL", "SUBR", "SUBRL", "SUBCU", "MPY",
                              "MPYB", "MPYU", "MPYXU", "IMPYL", "QMPYL", "NEG", "NEGL", "INC",
                              "DEC", "ABS", "ASR", "ASRL", "CMP", "CMPB", "CMPL", "ADDF32",
                              "SUBF32", "MPYF32"});
  add(Category::kBoolean, {"AND", "ANDB", "OR", "ORB", "XOR", "XORB", "NOT", "LSL", "LSR", "LSLL",
                           "LSRL", "TBIT", "TCLR", "TSET", "ANDF32"});
  add(Category::kBranch, {"B", "SB", "LB", "BF", "SBF", "BANZ", "LCR", "LC", "LRET", "LRETR",
                          "RET", "IRET", "FFC", "CALL", "BAR", "INTR", "TRAP"});
  return map;
}

CategoryMap CategoryMap::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("categories") || !j["categories"].is_object()) {
    throw data_error("BadCategoryMap", "category map JSON needs an object field \"categories\"");
  }
  CategoryMap map(j.value("name", std::string("unnamed")));
  for (const auto& [mnemonic, value] : j["categories"].items()) {
    if (!value.is_string()) {
      throw data_error("BadCategoryMap", "category for " + mnemonic + " must be a string");
    }
    const auto category = parse_category_name(value.get<std::string>());
    if (!category) {
      throw data_error("BadCategoryMap",
                       "unknown category \"" + value.get<std::string>() + "\" for " + mnemonic);
    }
    if (mnemonic.empty()) throw data_error("BadCategoryMap", "empty mnemonic in category map");
    map.set(mnemonic, *category);
  }
  return map;
}

CategoryMap CategoryMap::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("IoError", "cannot open category map " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw data_error("BadCategoryMap", path + ": " + e.what());
  }
  return from_json(j);
}

nlohmann::json CategoryMap::to_json() const {
  nlohmann::json categories = nlohmann::json::object();
  for (const auto& [mnemonic, category] : entries_) {
    categories[mnemonic] = std::string(category_name(category));
  }
  return {{"name", name_}, {"categories", categories}};
}

void CategoryMap::set(std::string_view mnemonic, Category category) {
  entries_[to_upper(mnemonic)] = category;
}

Category CategoryMap::classify(std::string_view mnemonic) const {
  if (mnemonic.empty()) throw usage_error("EmptyMnemonic", "cannot classify an empty mnemonic");
  auto it = entries_.find(mnemonic);
  if (it == entries_.end()) {
    const std::string upper = to_upper(mnemonic);
    it = entries_.find(upper);
  }
  return it == entries_.end() ? Category::kOther : it->second;
}

ParseResult parse_listing(std::string_view text, const CategoryMap& map, ParseMode mode) {
  ParseResult result;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const std::size_t eol = text.find('\n');
    const std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);

    Instruction instr;
    switch (parse_line(line, map, instr)) {
      case LineKind::kInstruction:
        result.instructions.push_back(std::move(instr));
        break;
      case LineKind::kSkipped:
        ++result.skipped_lines;
        break;
      case LineKind::kMalformed:
        if (mode == ParseMode::kStrict) {
          throw data_error("MalformedLine", "malformed listing line " + std::to_string(line_no) +
                                                ": " + std::string(trim(line)));
        }
        ++result.malformed_lines;
        break;
    }
  }
  return result;
}

std::string to_listing(std::span<const Instruction> instructions) {
  std::ostringstream out;
  for (const auto& in : instructions) {
    bool first = true;
    for (const std::string* field : {&in.address, &in.raw_opcode, &in.mnemonic, &in.operands}) {
      if (field->empty()) continue;
      if (!first) out << ' ';
      out << *field;
      first = false;
    }
    out << '\n';
  }
  return out.str();
}

std::vector<Category> categories_of(std::span<const Instruction> instructions) {
  std::vector<Category> out;
  out.reserve(instructions.size());
  for (const auto& in : instructions) out.push_back(in.category);
  return out;
}

}  // namespace hpcs
