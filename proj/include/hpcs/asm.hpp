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

// Parsing of disassembler listings and mnemonic categorization.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace hpcs {

// The five counted instruction classes plus Other, which is never counted.
enum class Category { kArithmetic, kBoolean, kStore, kLoad, kBranch, kOther };

inline constexpr std::size_t kNumClasses = 5;

// Counted classes in feature order (a, b, l, n, s).
inline constexpr Category kCountedClasses[kNumClasses] = {
    Category::kArithmetic, Category::kBranch, Category::kLoad, Category::kBoolean,
    Category::kStore};

// One-letter feature symbol: a, n, s, l, b; '?' for Other.
char category_symbol(Category c);
// Position of a counted class within kCountedClasses, nullopt for Other.
std::optional<std::size_t> class_index(Category c);
std::optional<Category> category_from_symbol(char symbol);
// Accepts the config spellings ("arith", "arithmetic", "a", "bool", ...).
std::optional<Category> parse_category_name(std::string_view name);
// Canonical config spelling.
std::string_view category_name(Category c);

struct Instruction {
  std::string address;     // hex digits as written, may be empty
  std::string raw_opcode;  // hex words as written, may be empty
  std::string mnemonic;    // uppercase
  std::string operands;    // trimmed, comment removed
  Category category = Category::kOther;

  bool operator==(const Instruction&) const = default;
};

// Total mapping from mnemonic to category; anything unmapped is Other.
class CategoryMap {
 public:
  CategoryMap() = default;
  explicit CategoryMap(std::string name) : name_(std::move(name)) {}

  // Shipped table for TI C28x disassembly.
  static CategoryMap c28x_default();

  static CategoryMap from_json(const nlohmann::json& j);
  static CategoryMap load(const std::string& path);
  nlohmann::json to_json() const;

  void set(std::string_view mnemonic, Category category);
  // Throws usage_error("EmptyMnemonic") for an empty mnemonic.
  Category classify(std::string_view mnemonic) const;

  const std::string& name() const { return name_; }
  const std::map<std::string, Category, std::less<>>& entries() const { return entries_; }

  bool operator==(const CategoryMap&) const = default;

 private:
  std::string name_;
  std::map<std::string, Category, std::less<>> entries_;
};

inline Category classify_mnemonic(std::string_view mnemonic, const CategoryMap& map) {
  return map.classify(mnemonic);
}

enum class ParseMode { kLenient, kStrict };

struct ParseResult {
  std::vector<Instruction> instructions;
  std::size_t skipped_lines = 0;  // blank, comment, label, directive, data
  std::size_t malformed_lines = 0;  // only non-zero in lenient mode
};

// Parses `<hexaddr> [<hexword>...] <MNEMONIC> <operands> [;comment]` lines.
// The address and opcode words are optional. Blank lines, comments,
// labels, assembler directives and bare data words are skipped. In strict
// mode any other non-matching line throws data_error("MalformedLine").
ParseResult parse_listing(std::string_view text, const CategoryMap& map,
                          ParseMode mode = ParseMode::kLenient);

// Canonical one-line-per-instruction listing; parse_listing(to_listing(x))
// reproduces x.
std::string to_listing(std::span<const Instruction> instructions);

std::vector<Category> categories_of(std::span<const Instruction> instructions);

}  // namespace hpcs
