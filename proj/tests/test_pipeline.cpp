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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "hpcs/error.hpp"
#include "hpcs/pipeline.hpp"

using namespace hpcs;
namespace fs = std::filesystem;

namespace {

const fs::path kData = HPCS_DATA_DIR;

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("hpcs_test_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Shipped config with small models and two short scenarios.
PipelineConfig small_config(const fs::path& work) {
  auto cfg = PipelineConfig::load(kData / "pipeline.json");
  cfg.train.forest.n_trees = 5;
  cfg.train.nn.epochs = 30;
  cfg.output_dir = work / "bundle";
  cfg.scenarios.clear();
  for (const char* name : {"nominal", "inverter_dos"}) {
    auto s = mgsim::builtin_scenario(name);
    s.duration_s = 1.0;
    const auto file = work / (std::string(name) + ".json");
    std::ofstream(file) << s.to_json().dump(2);
    cfg.scenarios.emplace_back(name, file);
  }
  return cfg;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("shipped config loads with resolved paths") {
  const auto cfg = PipelineConfig::load(kData / "pipeline.json");
  CHECK(fs::exists(cfg.base_firmware));
  CHECK(fs::exists(cfg.category_map));
  CHECK(cfg.templates.size() == 4);
  for (const auto& [kind, path] : cfg.templates) CHECK(fs::exists(path));
  CHECK(cfg.seed == 42);
  CHECK(cfg.window == 50);
  CHECK(cfg.scenarios.size() == 5);
  CHECK(cfg.train.forest.n_trees == 100);

  const auto names = bundle_file_names(cfg);
  CHECK(names.size() == 20);
  CHECK(std::is_sorted(names.begin(), names.end()));
  for (const char* n : {"base.asm", "dataset.csv", "ranking.json", "ablation.csv", "summary.md",
                        "model_rf_balanced.json", "sim_input_sine_fast.csv", "input_array.asm"}) {
    CHECK(std::find(names.begin(), names.end(), n) != names.end());
  }
}

TEST_CASE("config errors") {
  const auto code = [](const nlohmann::json& j) {
    try {
      PipelineConfig::from_json(j, ".");
    } catch (const Error& e) {
      return e.code();
    }
    return std::string{};
  };
  CHECK(code(nlohmann::json::array()) == "BadConfig");
  CHECK(code({{"seed", 1}}) == "BadConfig");
  CHECK(code({{"base_firmware", "x.asm"}, {"window", 0}}) == "BadConfig");
  CHECK(code({{"base_firmware", "x.asm"}, {"split_fraction", 1.5}}) == "BadConfig");
  CHECK(code({{"base_firmware", "x.asm"}, {"templates", {{"rootkit", "t.json"}}}}) == "BadConfig");
  CHECK(code({{"base_firmware", "x.asm"}, {"scenarios", {"nominal", "nominal"}}}) == "BadConfig");
  CHECK(code({{"base_firmware", "x.asm"}}).empty());
}

TEST_CASE("small reproduction writes the full bundle") {
  TempDir work("bundle");
  const auto cfg = small_config(work.path);
  const auto result = reproduce(cfg);
  const auto expected = bundle_file_names(cfg);
  CHECK(result.files == expected);
  CHECK(expected.size() == 17);
  std::vector<std::string> present;
  for (const auto& e : fs::directory_iterator(cfg.output_dir)) present.push_back(e.path().filename().string());
  std::sort(present.begin(), present.end());
  CHECK(present == expected);

  const auto ablation = slurp(cfg.output_dir / "ablation.csv");
  CHECK(std::count(ablation.begin(), ablation.end(), '\n') == 46);
  const auto summary = slurp(cfg.output_dir / "summary.md");
  CHECK(summary == result.summary_markdown);
  CHECK(summary.find("balanced") != std::string::npos);
  const auto ranking = nlohmann::json::parse(slurp(cfg.output_dir / "ranking.json"));
  CHECK(ranking["ranking"].size() == 30);

  // A rerun over the previous bundle is allowed and identical.
  const auto first = slurp(cfg.output_dir / "model_dt_balanced.json");
  reproduce(cfg);
  CHECK(slurp(cfg.output_dir / "model_dt_balanced.json") == first);
}

TEST_CASE("stage failures name the stage and artifact") {
  TempDir work("missing");
  auto cfg = small_config(work.path);
  cfg.base_firmware = work.path / "nope.asm";
  try {
    reproduce(cfg);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kData);
    CHECK(e.code() == "MissingInput");
    const std::string msg = e.what();
    CHECK(msg.find("stage 'mutate'") != std::string::npos);
    CHECK(msg.find("nope.asm") != std::string::npos);
  }
}

TEST_CASE("unrelated files in the output directory are refused") {
  TempDir work("unrelated");
  auto cfg = small_config(work.path);
  fs::create_directories(cfg.output_dir);
  std::ofstream(cfg.output_dir / "notes.txt") << "keep me";
  try {
    reproduce(cfg);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == "BadOutput");
  }
  CHECK(fs::exists(cfg.output_dir / "notes.txt"));
}

TEST_CASE("svg charts") {
  const auto svg = render_line_chart({"Power <kW>", "t", "kW"}, {{"pv", {0, 1, 2}, {1, 3, 2}}});
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("Power &lt;kW&gt;") != std::string::npos);
  CHECK(svg.find("<polyline") != std::string::npos);
  try {
    render_line_chart({"empty"}, {{"none", {}, {}}});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == "EmptySeries");
  }

  TempDir work("svg");
  auto s = mgsim::builtin_scenario("nominal");
  s.duration_s = 0.5;
  {
    std::ofstream out(work.path / "sim.csv", std::ios::binary);
    mgsim::write_timeseries_csv(mgsim::run_scenario(s), out);
  }
  const auto sim = render_simulation_svg(work.path / "sim.csv", "nominal");
  CHECK(sim.find("freq") != std::string::npos);
  std::ofstream(work.path / "bad.csv") << "time_s,freq_hz\r\n0,60\r\n";
  try {
    render_simulation_svg(work.path / "bad.csv", "bad");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == "BadCsv");
  }
}

}  // TEST_SUITE
