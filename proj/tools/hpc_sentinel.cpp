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

// hpc-sentinel: command-line front end for firmware mutation, HPC
// extraction, detection models, PCA ranking and microgrid simulation.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "hpcs/asm.hpp"
#include "hpcs/dataset.hpp"
#include "hpcs/error.hpp"
#include "hpcs/hpc.hpp"
#include "hpcs/mgsim.hpp"
#include "hpcs/ml.hpp"
#include "hpcs/mutate.hpp"
#include "hpcs/pca.hpp"
#include "hpcs/pipeline.hpp"
#include "hpcs/rng.hpp"

#ifndef HPCS_DATA_DIR
#define HPCS_DATA_DIR "data"
#endif

namespace fs = std::filesystem;
using namespace hpcs;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("IoError", "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw data_error("IoError", "cannot write " + path);
  out << text;
}

CategoryMap load_map(const std::string& path) {
  return path.empty() ? CategoryMap::c28x_default() : CategoryMap::load(path);
}

template <class T, class Parse>
T parse_or_usage(const std::string& text, Parse parse, std::string_view what) {
  const auto v = parse(text);
  if (!v) throw usage_error("BadFlag", fmt::format("unknown {} '{}'", what, text));
  return *v;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage: return 2;
    case ErrorKind::kData: return 3;
    case ErrorKind::kNumeric: return 4;
  }
  return 3;
}

struct ModelFlags {
  std::size_t trees = 100;
  std::optional<std::size_t> max_depth;
  std::size_t hidden = 16;
  std::size_t epochs = 3000;
  double lr = 0.5;

  void add(CLI::App* app) {
    app->add_option("--trees", trees, "Random forest size")->check(CLI::PositiveNumber);
    app->add_option("--max-depth", max_depth, "Depth limit for trees");
    app->add_option("--hidden", hidden, "Hidden units")->check(CLI::PositiveNumber);
    app->add_option("--epochs", epochs, "Gradient descent epochs");
    app->add_option("--lr", lr, "Learning rate")->check(CLI::PositiveNumber);
  }
  ml::TrainOptions options() const {
    ml::TrainOptions o;
    o.forest.n_trees = trees;
    o.tree.max_depth = max_depth;
    o.forest.max_depth = max_depth;
    o.nn = {hidden, epochs, lr};
    return o;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Firmware modification detection with custom HPCs, and microgrid impact simulation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "hpc-sentinel 1.0.0");

  // extract
  auto* extract = app.add_subcommand("extract", "Count HPC windows in assembly listings");
  std::string map_path, label_text = "benign", attack_text, out_path;
  std::size_t window = kDefaultWindow;
  std::vector<std::string> files;
  bool strict = false, drop_partial = false, append = false;
  extract->add_option("--map", map_path, "Category map JSON (default: built-in C28x map)");
  extract->add_option("--window", window, "Instructions per window")->check(CLI::PositiveNumber);
  extract->add_option("--label", label_text, "benign or malicious");
  extract->add_option("--attack", attack_text, "Attack kind for malicious listings");
  extract->add_flag("--strict", strict, "Reject malformed lines");
  extract->add_flag("--drop-partial", drop_partial, "Skip the trailing partial window");
  extract->add_flag("--append", append, "Add the samples to an existing dataset CSV");
  extract->add_option("files", files, "Listing files")->required()->check(CLI::ExistingFile);
  extract->add_option("--out", out_path, "Dataset CSV")->required();

  // mutate
  auto* mutate = app.add_subcommand("mutate", "Splice an attack payload into a base listing");
  std::string base_path, template_path;
  std::uint64_t seed = 42;
  mutate->add_option("--base", base_path, "Base listing")->required();
  mutate->add_option("--attack", attack_text, "mppt_dos, inverter_dos, input_array, input_sine")
      ->required();
  mutate->add_option("--template", template_path, "Template JSON (default: built-in)");
  mutate->add_option("--map", map_path, "Category map JSON");
  mutate->add_option("--seed", seed, "Seed");
  mutate->add_option("--out", out_path, "Mutant listing")->required();

  // train
  auto* train = app.add_subcommand("train", "Train a detector on the training split");
  std::string model_text, data_path;
  double split_fraction = 0.7;
  bool do_balance = false;
  ModelFlags model_flags;
  train->add_option("--model", model_text, "dt, rf or nn")->required();
  train->add_option("--data", data_path, "Dataset CSV")->required();
  train->add_option("--split", split_fraction, "Training fraction");
  train->add_option("--seed", seed, "Seed");
  train->add_flag("--balance", do_balance, "Oversample the minority class in the training split");
  model_flags.add(train);
  train->add_option("--out", out_path, "Model JSON")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "Score a saved model");
  std::string model_path;
  std::optional<double> eval_split;
  eval->add_option("--model", model_path, "Model JSON")->required();
  eval->add_option("--data", data_path, "Dataset CSV")->required();
  eval->add_option("--split", eval_split, "Score only the held-out part of this split");
  eval->add_option("--seed", seed, "Split seed");
  eval->add_option("--out", out_path, "Report JSON")->required();

  // rank
  auto* rank = app.add_subcommand("rank", "Rank HPC features by PCA loadings");
  std::size_t components = 3;
  bool standardize = false;
  rank->add_option("--data", data_path, "Dataset CSV")->required();
  rank->add_option("--components", components, "Principal components")->check(CLI::PositiveNumber);
  rank->add_flag("--standardize", standardize, "Use the correlation matrix");
  rank->add_option("--out", out_path, "Ranking JSON")->required();

  // ablate
  auto* ablate = app.add_subcommand("ablate", "Instruction-class elimination experiments");
  std::string exclusions = "all";
  bool no_balance = false;
  ablate->add_option("--data", data_path, "Dataset CSV")->required();
  ablate->add_option("--exclusions", exclusions, "1, 2 or all")
      ->check(CLI::IsMember({"1", "2", "all"}));
  ablate->add_option("--split", split_fraction, "Training fraction");
  ablate->add_option("--seed", seed, "Seed");
  ablate->add_flag("--no-balance", no_balance, "Train on the unbalanced split");
  model_flags.add(ablate);
  ablate->add_option("--out", out_path, "Ablation CSV")->required();

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Run a microgrid scenario");
  std::string scenario_name, scenario_file, pno_text;
  std::optional<double> duration;
  auto* name_opt = simulate->add_option("--scenario", scenario_name,
                                        "nominal, mppt_dos, inverter_dos, input_sine, "
                                        "input_sine_fast");
  auto* file_opt = simulate->add_option("--scenario-file", scenario_file, "Scenario JSON");
  name_opt->excludes(file_opt);
  simulate->add_option("--pno-variant", pno_text, "literal or symmetric");
  simulate->add_option("--duration", duration, "Override the duration in seconds");
  simulate->add_option("--out", out_path, "Time-series CSV")->required();

  // report
  auto* report = app.add_subcommand("report", "Render SVG charts from simulation CSVs");
  std::vector<std::string> inputs;
  std::string out_dir;
  report->add_option("inputs", inputs, "Simulation CSVs or bundle directories")->required();
  report->add_option("--out-dir", out_dir, "Directory for the SVG files")->required();

  // reproduce
  auto* reproduce = app.add_subcommand("reproduce", "Run the full pipeline into one bundle");
  std::string config_path = std::string(HPCS_DATA_DIR) + "/pipeline.json";
  std::optional<std::uint64_t> seed_override;
  std::string bundle_out;
  bool quiet = false;
  reproduce->add_option("--config", config_path, "Pipeline JSON");
  reproduce->add_option("--seed", seed_override, "Master seed");
  reproduce->add_option("--out", bundle_out, "Output directory");
  reproduce->add_flag("--quiet", quiet, "No progress output");

  // synth-base
  auto* synth = app.add_subcommand("synth-base", "Generate the synthetic base listing");
  std::size_t slices = 64;
  synth->add_option("--seed", seed, "Seed");
  synth->add_option("--slices", slices, "Control slices")->check(CLI::PositiveNumber);
  synth->add_option("--out", out_path, "Listing file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (extract->parsed()) {
      const auto label = parse_or_usage<Label>(label_text, parse_label, "label");
      std::optional<AttackKind> attack;
      if (!attack_text.empty()) attack = parse_or_usage<AttackKind>(attack_text, parse_attack, "attack");
      if ((label == Label::kMalicious) != attack.has_value()) {
        throw usage_error("BadFlag", "--attack is required for malicious listings and only for them");
      }
      const auto map = load_map(map_path);
      std::vector<FirmwareRun> runs;
      for (const auto& f : files) {
        const auto parsed = parse_listing(slurp(f), map, strict ? ParseMode::kStrict : ParseMode::kLenient);
        runs.push_back({fs::path(f).stem().string(), label, attack,
                        extract_windows(std::span<const Instruction>(parsed.instructions), window)});
      }
      EmitOptions opts;
      opts.include_partial = !drop_partial;
      auto dataset = emit_dataset(runs, opts);
      if (append && fs::exists(out_path)) {
        auto existing = read_dataset_csv(out_path);
        if (existing.feature_names != dataset.feature_names) {
          throw data_error("InconsistentFeatures", out_path + " has different feature columns");
        }
        existing.samples.insert(existing.samples.end(), dataset.samples.begin(), dataset.samples.end());
        dataset = std::move(existing);
      }
      write_dataset_csv(dataset, out_path);
    } else if (mutate->parsed()) {
      const auto kind = parse_or_usage<AttackKind>(attack_text, parse_attack, "attack");
      auto t = template_path.empty() ? default_template(kind) : InjectionTemplate::load(template_path);
      if (t.attack != kind) throw usage_error("BadTemplate", "template is for a different attack");
      spit(out_path, inject(slurp(base_path), t, seed, load_map(map_path)));
    } else if (train->parsed()) {
      const auto kind = parse_or_usage<ml::ModelKind>(model_text, ml::parse_model_kind, "model");
      const auto data = read_dataset_csv(data_path);
      auto parts = ml::split(data, {split_fraction, seed, true});
      if (do_balance) parts.train = ml::balance(parts.train, derive_seed(seed, 1));
      const auto model = ml::train_model(kind, parts.train, model_flags.options(),
                                         derive_seed(seed, 2 + static_cast<std::uint64_t>(kind)));
      model.save(out_path);
    } else if (eval->parsed()) {
      const auto model = ml::TrainedModel::load(model_path);
      auto data = read_dataset_csv(data_path);
      if (eval_split) data = ml::split(data, {*eval_split, seed, true}).test;
      spit(out_path, ml::evaluate(model, data).to_json().dump(2) + "\n");
    } else if (rank->parsed()) {
      const auto ranking = pca::rank_features(read_dataset_csv(data_path), {components, standardize});
      spit(out_path, ranking.to_json().dump(2) + "\n");
    } else if (ablate->parsed()) {
      std::vector<pca::EliminationSpec> specs;
      if (exclusions != "2") specs = pca::elimination_specs(1);
      if (exclusions != "1") {
        const auto two = pca::elimination_specs(2);
        specs.insert(specs.end(), two.begin(), two.end());
      }
      pca::AblationOptions opts;
      opts.split = {split_fraction, seed, true};
      opts.balance = !no_balance;
      opts.train = model_flags.options();
      const ml::ModelKind models[] = {ml::ModelKind::kDecisionTree, ml::ModelKind::kRandomForest,
                                      ml::ModelKind::kNeuralNet};
      const auto rows = pca::run_ablation(read_dataset_csv(data_path), models, specs, seed, opts);
      std::ostringstream csv;
      pca::write_ablation_csv(rows, csv);
      spit(out_path, csv.str());
    } else if (simulate->parsed()) {
      if (scenario_name.empty() == scenario_file.empty()) {
        throw usage_error("BadFlag", "give exactly one of --scenario and --scenario-file");
      }
      auto s = scenario_file.empty() ? mgsim::builtin_scenario(scenario_name)
                                     : mgsim::Scenario::load(scenario_file);
      if (!pno_text.empty()) {
        s.mppt.variant = parse_or_usage<mgsim::PnoVariant>(pno_text, mgsim::parse_pno_variant,
                                                          "PnO variant");
      }
      if (duration) s.duration_s = *duration;
      const auto rows = mgsim::run_scenario(s);
      std::ostringstream csv;
      mgsim::write_timeseries_csv(rows, csv);
      spit(out_path, csv.str());
    } else if (report->parsed()) {
      std::vector<fs::path> csvs;
      for (const auto& in : inputs) {
        if (fs::is_directory(in)) {
          std::vector<fs::path> found;
          for (const auto& e : fs::directory_iterator(in)) {
            const auto name = e.path().filename().string();
            if (name.starts_with("sim_") && e.path().extension() == ".csv") found.push_back(e.path());
          }
          std::sort(found.begin(), found.end());
          csvs.insert(csvs.end(), found.begin(), found.end());
        } else if (fs::exists(in)) {
          csvs.emplace_back(in);
        } else {
          throw data_error("IoError", "no such file " + in);
        }
      }
      if (csvs.empty()) throw data_error("IoError", "no simulation CSVs found");
      fs::create_directories(out_dir);
      for (const auto& c : csvs) {
        const auto svg = render_simulation_svg(c, c.stem().string());
        spit((fs::path(out_dir) / c.stem()).string() + ".svg", svg);
      }
    } else if (reproduce->parsed()) {
      auto cfg = PipelineConfig::load(config_path);
      if (seed_override) cfg.seed = *seed_override;
      if (!bundle_out.empty()) cfg.output_dir = bundle_out;
      const auto result = hpcs::reproduce(cfg, quiet ? nullptr : &std::cerr);
      if (!quiet) std::cerr << fmt::format("wrote {} files to {}\n", result.files.size(), cfg.output_dir.string());
    } else if (synth->parsed()) {
      spit(out_path, synthesize_base_listing(seed, slices));
    }
  } catch (const Error& e) {
    std::cerr << fmt::format("error [{}]: {}\n", e.code(), e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
