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

// End-to-end reproduction pipeline and SVG chart rendering.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hpcs/dataset.hpp"
#include "hpcs/mgsim.hpp"
#include "hpcs/ml.hpp"

namespace hpcs {

struct PipelineConfig {
  std::filesystem::path base_firmware;
  std::filesystem::path category_map;               // empty: built-in C28x map
  std::map<AttackKind, std::filesystem::path> templates;  // missing kinds use built-ins
  std::uint64_t seed = 42;
  std::size_t window = 50;
  double split_fraction = 0.7;
  std::size_t n_components = 3;
  std::size_t top_k = 3;
  std::filesystem::path output_dir = "bundle";
  // Scenario name -> optional JSON file; no file means the built-in scenario.
  std::vector<std::pair<std::string, std::filesystem::path>> scenarios;
  ml::TrainOptions train;

  // Relative paths resolve against `base_dir`. Throws usage_error("BadConfig").
  static PipelineConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
  static PipelineConfig load(const std::filesystem::path& path);
};

// Stage names used in error messages.
inline constexpr std::string_view kStages[] = {"mutate", "extract", "train", "rank",
                                               "ablate", "simulate", "summary"};

struct BundleResult {
  std::vector<std::string> files;  // bundle-relative, sorted
  std::string summary_markdown;
};

// mutate -> extract -> train/eval (unbalanced and balanced, DT/RF/NN on all
// features) -> rank -> top-k retrain -> ablation (one and two exclusions)
// -> simulations -> summary.md. Every failure is rethrown with the same kind
// and code, its message prefixed by the stage and the artifact involved.
// The output directory may only hold files from a previous bundle.
BundleResult reproduce(const PipelineConfig& config, std::ostream* log = nullptr);

// Exact file names a bundle holds for `config`, sorted.
std::vector<std::string> bundle_file_names(const PipelineConfig& config);

// ---------------------------------------------------------------------------
// Charts

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 720;
  int height = 300;
};

// Self-contained SVG line chart. Throws usage_error("EmptySeries") when no
// series has points.
std::string render_line_chart(const ChartSpec& spec, const std::vector<Series>& series);

// Reads a simulation CSV and renders frequency and power charts stacked in
// one SVG. Throws data_error("BadCsv").
std::string render_simulation_svg(const std::filesystem::path& csv_path, std::string_view title);

}  // namespace hpcs
