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

#include <doctest.h>

#include <fstream>
#include <sstream>

#include "hpcs/asm.hpp"
#include "hpcs/error.hpp"
#include "hpcs/rng.hpp"

using namespace hpcs;

namespace {

const char* kSnippet =
    "03f6438 83a1 MOV  AL,@VarA ;Load AL with  VarA\n"
    "03f6439 dc18 ADD  AL,@VarB ;Add to AL VarB\n"
    "03f643a da18 ANDB AL,#0xFF ;AND AL with 0xFF\n"
    "03f643b dd17 SUBB XAR4, #1 ;Subtract 1 from XAR4\n"
    "03f643c d918 B    404, NEQ ;Branch Not Equal\n"
    "03f6438 83a1 MOV  AL,@VarB ;Load AL with  VarB\n"
    "03f6439 dc18 ADD  AL,@VarA ;Add to AL VarA\n"
    "03f643a da18 ANDB AL,#0xDA ;AND AL with 0xDA\n"
    "03f643b dd17 SUBB XAR2, #1 ;Subtract 1 from XAR2\n"
    "03f643c d918 B    253, NEQ ;Branch Not Equal\n";

std::string symbols(const std::vector<Instruction>& v) {
  std::string s;
  for (const auto& i : v) s += category_symbol(i.category);
  return s;
}

}  // namespace

TEST_SUITE("asm") {

TEST_CASE("snippet parses to the expected category sequence") {
  const auto r = parse_listing(kSnippet, CategoryMap::c28x_default(), ParseMode::kStrict);
  REQUIRE(r.instructions.size() == 10);
  CHECK(symbols(r.instructions) == "lanablanab");
  CHECK(r.skipped_lines == 0);

  const auto& first = r.instructions[0];
  CHECK(first.address == "03f6438");
  CHECK(first.raw_opcode == "83a1");
  CHECK(first.mnemonic == "MOV");
  CHECK(first.operands == "AL,@VarA");
  CHECK(first.category == Category::kLoad);
  CHECK(r.instructions[2].category == Category::kBoolean);
  CHECK(r.instructions[3].operands == "XAR4, #1");
  CHECK(r.instructions[4].mnemonic == "B");
  CHECK(r.instructions[4].operands == "404, NEQ");
}

TEST_CASE("classification of listed mnemonics") {
  const auto map = CategoryMap::c28x_default();
  CHECK(classify_mnemonic("B", map) == Category::kBranch);
  CHECK(classify_mnemonic("SUBB", map) == Category::kArithmetic);
  CHECK(classify_mnemonic("MOV", map) == Category::kLoad);
  CHECK(classify_mnemonic("ADD", map) == Category::kArithmetic);
  CHECK(classify_mnemonic("ANDB", map) == Category::kBoolean);
  CHECK(classify_mnemonic("movh", map) == Category::kStore);
  CHECK(classify_mnemonic("FOO", map) == Category::kOther);
  CHECK(classify_mnemonic("MAC", map) == Category::kOther);
  CHECK_THROWS_AS(classify_mnemonic("", map), Error);
}

TEST_CASE("unmapped mnemonic without address is Other") {
  const auto r = parse_listing("FOO AL,#1\n", CategoryMap::c28x_default(), ParseMode::kStrict);
  REQUIRE(r.instructions.size() == 1);
  CHECK(r.instructions[0].mnemonic == "FOO");
  CHECK(r.instructions[0].address.empty());
  CHECK(r.instructions[0].category == Category::kOther);
}

TEST_CASE("mnemonics that look like hex are not taken as opcodes") {
  const auto map = CategoryMap::c28x_default();
  const auto r = parse_listing("ADD AL,@x\nDEC AL\n3f0010 B 4,EQ\n", map, ParseMode::kStrict);
  REQUIRE(r.instructions.size() == 3);
  CHECK(r.instructions[0].mnemonic == "ADD");
  CHECK(r.instructions[1].mnemonic == "DEC");
  CHECK(r.instructions[2].address == "3f0010");
  CHECK(r.instructions[2].mnemonic == "B");
}

TEST_CASE("non-instruction lines are skipped and counted") {
  const std::string text =
      "; header comment\n"
      "\n"
      "        .sect \".text\"\n"
      "_main:\n"
      "* star comment\n"
      "03f6000 1234 MOV AL,@x\n"
      "_loop: ADD AL,#1\n"
      "3f8000 beef\n";
  const auto r = parse_listing(text, CategoryMap::c28x_default(), ParseMode::kStrict);
  REQUIRE(r.instructions.size() == 2);
  CHECK(r.instructions[1].mnemonic == "ADD");
  CHECK(r.skipped_lines == 6);
  CHECK(r.malformed_lines == 0);
}

TEST_CASE("malformed lines: strict throws, lenient tallies") {
  const std::string text = "03f6000 1234 MOV AL,@x\n03f6001 !!bad\n";
  const auto map = CategoryMap::c28x_default();
  const auto r = parse_listing(text, map, ParseMode::kLenient);
  CHECK(r.instructions.size() == 1);
  CHECK(r.malformed_lines == 1);
  try {
    parse_listing(text, map, ParseMode::kStrict);
    FAIL("expected MalformedLine");
  } catch (const Error& e) {
    CHECK(e.code() == "MalformedLine");
    CHECK(e.kind() == ErrorKind::kData);
  }
}

TEST_CASE("canonical listing round-trips") {
  const auto map = CategoryMap::c28x_default();
  const std::vector<std::string> mnemonics = {"MOV", "ADD", "ANDB", "SUBB", "B",
                                              "MOVH", "NOP", "LCR", "XOR", "FOO"};
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::ostringstream text;
    const std::size_t n = 1 + rng.index(40);
    for (std::size_t i = 0; i < n; ++i) {
      if (rng.index(2)) text << std::hex << (0x3f6000 + i) << ' ' << (0x1000 + rng.index(0xe000)) << ' ';
      text << mnemonics[rng.index(mnemonics.size())];
      if (rng.index(3)) text << "   AL,@Var" << std::dec << rng.index(9);
      if (rng.index(4) == 0) text << " ; note";
      text << '\n';
    }
    const auto first = parse_listing(text.str(), map, ParseMode::kStrict).instructions;
    const auto second = parse_listing(to_listing(first), map, ParseMode::kStrict).instructions;
    CHECK(first == second);
  }
}

TEST_CASE("parsing is pure") {
  const auto map = CategoryMap::c28x_default();
  const auto a = parse_listing(kSnippet, map);
  parse_listing("03f6000 1234 XOR AL,#1\n", map);
  const auto b = parse_listing(kSnippet, map);
  CHECK(a.instructions == b.instructions);
}

TEST_CASE("category map JSON round trip and shipped file") {
  const auto map = CategoryMap::c28x_default();
  CHECK(CategoryMap::from_json(map.to_json()) == map);
  CHECK(CategoryMap::load(std::string(HPCS_DATA_DIR) + "/c28x_default_map.json") == map);

  const auto custom = CategoryMap::from_json(nlohmann::json::parse(
      R"({"name": "toy", "categories": {"MOV": "load", "ADD": "arith", "jmp": "jump"}})"));
  CHECK(custom.name() == "toy");
  CHECK(custom.classify("JMP") == Category::kBranch);
  CHECK(custom.classify("ANDB") == Category::kOther);
  CHECK_THROWS_AS(CategoryMap::from_json(nlohmann::json::parse(
                      R"({"name": "x", "categories": {"MOV": "teleport"}})")),
                  Error);
}

TEST_CASE("category names and symbols") {
  for (auto c : kCountedClasses) {
    CHECK(category_from_symbol(category_symbol(c)) == c);
    CHECK(parse_category_name(category_name(c)) == c);
  }
  CHECK(parse_category_name("arithmetic") == Category::kArithmetic);
  CHECK(parse_category_name("boolean") == Category::kBoolean);
  CHECK(parse_category_name("jump") == Category::kBranch);
  CHECK_FALSE(class_index(Category::kOther).has_value());
}

}  // TEST_SUITE
