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

#include "hpcs/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "hpcs/asm.hpp"
#include "hpcs/error.hpp"
#include "hpcs/hpc.hpp"
#include "hpcs/mutate.hpp"
#include "hpcs/parallel.hpp"
#include "hpcs/pca.hpp"
#include "hpcs/rng.hpp"

namespace hpcs {
namespace fs = std::filesystem;
namespace {

constexpr ml::ModelKind kModels[] = {ml::ModelKind::kDecisionTree, ml::ModelKind::kRandomForest,
                                     ml::ModelKind::kNeuralNet};

template <class Fn>
auto run_stage(std::string_view stage, const fs::path& artifact, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.kind(), e.code(),
                fmt::format("stage '{}' failed on {}: {}", stage, artifact.string(), e.what()));
  } catch (const std::exception& e) {
    throw data_error("StageFailed",
                     fmt::format("stage '{}' failed on {}: {}", stage, artifact.string(), e.what()));
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("IoError", "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw data_error("IoError", "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw data_error("IoError", "write failed for " + path.string());
}

std::string metric(const ml::Ratio& r) {
  return r.defined() ? fmt::format("{:.4f}", r.value()) : std::string("n/a");
}

std::string model_file(ml::ModelKind kind, bool balanced) {
  return fmt::format("model_{}_{}.json", ml::model_kind_name(kind),
                     balanced ? "balanced" : "unbalanced");
}

std::string sim_file(const std::string& scenario) { return "sim_" + scenario + ".csv"; }

std::string asm_file(const FirmwareImage& image) { return image.firmware_id + ".asm"; }

struct CellResult {
  ml::TrainedModel model;
  ml::EvalReport report;
};

// Train and score all three models on one feature set.
std::vector<CellResult> train_all(const ml::TrainTest& parts, bool balanced,
                                  const PipelineConfig& cfg) {
  const Dataset train =
      balanced ? ml::balance(parts.train, derive_seed(cfg.seed, 1)) : parts.train;
  std::vector<CellResult> out;
  for (const auto kind : kModels) {
    auto model = ml::train_model(kind, train, cfg.train,
                                 derive_seed(cfg.seed, 2 + static_cast<std::uint64_t>(kind)));
    auto report = ml::evaluate(model, parts.test);
    out.push_back({std::move(model), std::move(report)});
  }
  return out;
}

void metrics_table(std::ostringstream& md, const std::vector<CellResult>& cells) {
  md << "| model | accuracy | precision | recall | FP ratio | FN ratio | TP | TN | FP | FN |\n";
  md << "|---|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& c : cells) {
    const auto& k = c.report.counts;
    md << fmt::format("| {} | {} | {} | {} | {} | {} | {} | {} | {} | {} |\n",
                      ml::model_kind_name(c.model.kind), metric(k.accuracy()),
                      metric(k.precision()), metric(k.recall()), metric(k.fp_rate()),
                      metric(k.fn_rate()), k.tp, k.tn, k.fp, k.fn);
  }
  md << "\n";
}

struct SimSummary {
  std::string name;
  double mean_pv = 0;
  double min_freq = 0;
  double max_freq = 0;
  double pv_off_fraction = 0;
  double final_ess_kwh = 0;
  double max_diesel = 0;
};

SimSummary summarize(const std::string& name, const std::vector<mgsim::MgState>& rows) {
  SimSummary s{name};
  if (rows.empty()) return s;
  s.min_freq = rows.front().freq_hz;
  s.max_freq = rows.front().freq_hz;
  std::size_t off = 0;
  for (const auto& r : rows) {
    s.mean_pv += r.pv_kw;
    s.min_freq = std::min(s.min_freq, r.freq_hz);
    s.max_freq = std::max(s.max_freq, r.freq_hz);
    s.max_diesel = std::max(s.max_diesel, r.diesel_kw);
    off += r.pv_kw == 0.0 ? 1 : 0;
  }
  s.mean_pv /= static_cast<double>(rows.size());
  s.pv_off_fraction = static_cast<double>(off) / static_cast<double>(rows.size());
  s.final_ess_kwh = rows.back().ess_kwh;
  return s;
}

mgsim::Scenario scenario_for(const std::pair<std::string, fs::path>& entry) {
  if (entry.second.empty()) return mgsim::builtin_scenario(entry.first);
  auto s = mgsim::Scenario::load(entry.second.string());
  s.name = entry.first;
  return s;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j, const fs::path& base_dir) {
  PipelineConfig c;
  try {
    if (!j.is_object()) throw usage_error("BadConfig", "pipeline config must be a JSON object");
    if (!j.contains("base_firmware")) throw usage_error("BadConfig", "base_firmware is required");
    c.base_firmware = resolve(base_dir, j.at("base_firmware").get<std::string>());
    if (j.contains("category_map")) {
      c.category_map = resolve(base_dir, j["category_map"].get<std::string>());
    }
    const auto templates = j.value("templates", nlohmann::json::object());
    for (const auto& [name, path] : templates.items()) {
      const auto kind = parse_attack(name);
      if (!kind) throw usage_error("BadConfig", "unknown attack in templates: " + name);
      c.templates[*kind] = resolve(base_dir, path.get<std::string>());
    }
    c.seed = j.value("seed", c.seed);
    c.window = j.value("window", c.window);
    c.split_fraction = j.value("split_fraction", c.split_fraction);
    c.n_components = j.value("n_components", c.n_components);
    c.top_k = j.value("top_k", c.top_k);
    if (j.contains("output_dir")) c.output_dir = resolve(base_dir, j["output_dir"].get<std::string>());
    if (j.contains("scenarios")) {
      for (const auto& s : j["scenarios"]) {
        if (s.is_string()) {
          c.scenarios.emplace_back(s.get<std::string>(), fs::path());
        } else {
          c.scenarios.emplace_back(s.at("name").get<std::string>(),
                                   s.contains("file")
                                       ? resolve(base_dir, s["file"].get<std::string>())
                                       : fs::path());
        }
      }
    } else {
      for (const auto& name : mgsim::builtin_scenario_names()) c.scenarios.emplace_back(name, fs::path());
    }
    if (j.contains("train")) {
      const auto& t = j["train"];
      c.train.forest.n_trees = t.value("rf_trees", c.train.forest.n_trees);
      if (t.contains("max_depth") && !t["max_depth"].is_null()) {
        c.train.tree.max_depth = t["max_depth"].get<std::size_t>();
        c.train.forest.max_depth = c.train.tree.max_depth;
      }
      c.train.nn.hidden = t.value("nn_hidden", c.train.nn.hidden);
      c.train.nn.epochs = t.value("nn_epochs", c.train.nn.epochs);
      c.train.nn.learning_rate = t.value("nn_learning_rate", c.train.nn.learning_rate);
    }
  } catch (const nlohmann::json::exception& e) {
    throw usage_error("BadConfig", e.what());
  }
  if (c.window == 0) throw usage_error("BadConfig", "window must be positive");
  if (!(c.split_fraction > 0 && c.split_fraction < 1)) {
    throw usage_error("BadConfig", "split_fraction must lie in (0, 1)");
  }
  if (c.n_components == 0 || c.top_k == 0) {
    throw usage_error("BadConfig", "n_components and top_k must be positive");
  }
  std::set<std::string> seen;
  for (const auto& [name, file] : c.scenarios) {
    if (!seen.insert(name).second) throw usage_error("BadConfig", "duplicate scenario " + name);
  }
  return c;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw usage_error("BadConfig", "cannot open pipeline config " + path.string());
  try {
    return from_json(nlohmann::json::parse(in), path.parent_path());
  } catch (const nlohmann::json::parse_error& e) {
    throw usage_error("BadConfig", path.string() + ": " + e.what());
  }
}

std::vector<std::string> bundle_file_names(const PipelineConfig& cfg) {
  std::vector<std::string> names = {"base.asm", "dataset.csv", "ranking.json", "ablation.csv",
                                    "summary.md"};
  for (const auto kind : kAllAttacks) names.push_back(std::string(attack_name(kind)) + ".asm");
  for (const bool balanced : {false, true}) {
    for (const auto kind : kModels) names.push_back(model_file(kind, balanced));
  }
  for (const auto& [name, file] : cfg.scenarios) names.push_back(sim_file(name));
  std::sort(names.begin(), names.end());
  return names;
}

BundleResult reproduce(const PipelineConfig& cfg, std::ostream* log) {
  const auto say = [log](const std::string& msg) {
    if (log) *log << msg << '\n';
  };
  const fs::path& out = cfg.output_dir;
  const auto expected = bundle_file_names(cfg);

  run_stage("mutate", out, [&] {
    if (fs::exists(out)) {
      if (!fs::is_directory(out)) throw usage_error("BadOutput", "not a directory");
      for (const auto& entry : fs::directory_iterator(out)) {
        const auto name = entry.path().filename().string();
        if (!std::binary_search(expected.begin(), expected.end(), name)) {
          throw usage_error("BadOutput", "output directory holds unrelated file " + name);
        }
      }
    }
    fs::create_directories(out);
    return 0;
  });

  // Mutation.
  const CategoryMap map = run_stage("mutate", cfg.category_map, [&] {
    return cfg.category_map.empty() ? CategoryMap::c28x_default()
                                    : CategoryMap::load(cfg.category_map.string());
  });
  const std::string base = run_stage("mutate", cfg.base_firmware, [&] {
    if (!fs::exists(cfg.base_firmware)) {
      throw data_error("MissingInput", "base firmware not found");
    }
    return read_file(cfg.base_firmware);
  });
  std::vector<InjectionTemplate> templates;
  for (const auto kind : kAllAttacks) {
    const auto it = cfg.templates.find(kind);
    if (it == cfg.templates.end()) {
      templates.push_back(default_template(kind));
      continue;
    }
    templates.push_back(run_stage("mutate", it->second, [&] {
      auto t = InjectionTemplate::load(it->second.string());
      if (t.attack != kind) throw usage_error("BadTemplate", "template attack kind mismatch");
      return t;
    }));
  }
  const auto corpus = run_stage("mutate", cfg.base_firmware, [&] {
    return build_corpus(base, templates, cfg.seed, map, cfg.window);
  });
  for (const auto& image : corpus) {
    run_stage("mutate", out / asm_file(image), [&] {
      write_file(out / asm_file(image), image.listing);
      return 0;
    });
  }
  say(fmt::format("mutate: {} firmware images", corpus.size()));

  // Extraction.
  const fs::path dataset_path = out / "dataset.csv";
  const Dataset dataset = run_stage("extract", dataset_path, [&] {
    std::vector<FirmwareRun> runs;
    for (const auto& image : corpus) {
      const auto parsed = parse_listing(image.listing, map, ParseMode::kLenient);
      runs.push_back({image.firmware_id, image.label, image.attack_kind,
                      extract_windows(std::span<const Instruction>(parsed.instructions), cfg.window)});
    }
    auto d = emit_dataset(runs);
    write_dataset_csv(d, dataset_path.string());
    return d;
  });
  say(fmt::format("extract: {} windows ({} malicious)", dataset.size(),
                  dataset.count(Label::kMalicious)));

  // Classification on all features.
  const ml::SplitSpec split_spec{cfg.split_fraction, cfg.seed, true};
  const auto parts = run_stage("train", dataset_path, [&] { return ml::split(dataset, split_spec); });
  std::vector<CellResult> unbalanced;
  std::vector<CellResult> balanced;
  for (const bool bal : {false, true}) {
    auto cells = run_stage("train", dataset_path, [&] { return train_all(parts, bal, cfg); });
    for (const auto& c : cells) {
      const fs::path path = out / model_file(c.model.kind, bal);
      run_stage("train", path, [&] {
        c.model.save(path.string());
        return 0;
      });
    }
    (bal ? balanced : unbalanced) = std::move(cells);
  }
  say("train: 6 models");

  // PCA ranking and retraining on the top features.
  const fs::path ranking_path = out / "ranking.json";
  const auto ranking = run_stage("rank", ranking_path, [&] {
    auto r = pca::rank_features(dataset, {cfg.n_components, false});
    write_file(ranking_path, r.to_json().dump(2) + "\n");
    return r;
  });
  const auto top = ranking.top(cfg.top_k);
  const auto top_cells = run_stage("rank", ranking_path, [&] {
    const auto projected = ml::split(dataset.project(top), split_spec);
    return train_all(projected, true, cfg);
  });
  say(fmt::format("rank: top {} = {}", top.size(), fmt::join(top, ",")));

  // Elimination ablation.
  const fs::path ablation_path = out / "ablation.csv";
  const auto ablation = run_stage("ablate", ablation_path, [&] {
    auto specs = pca::elimination_specs(1);
    const auto two = pca::elimination_specs(2);
    specs.insert(specs.end(), two.begin(), two.end());
    pca::AblationOptions options;
    options.split = split_spec;
    options.train = cfg.train;
    auto rows = pca::run_ablation(dataset, kModels, specs, cfg.seed, options);
    std::ostringstream csv;
    pca::write_ablation_csv(rows, csv);
    write_file(ablation_path, csv.str());
    return rows;
  });
  say(fmt::format("ablate: {} rows", ablation.size()));

  // Microgrid scenarios, independent of each other.
  std::vector<mgsim::Scenario> scenarios;
  for (const auto& entry : cfg.scenarios) {
    scenarios.push_back(run_stage("simulate", entry.second.empty() ? fs::path(entry.first) : entry.second,
                                  [&] { return scenario_for(entry); }));
  }
  std::vector<std::vector<mgsim::MgState>> traces(scenarios.size());
  run_stage("simulate", out, [&] {
    parallel_for(scenarios.size(), [&](std::size_t i) { traces[i] = mgsim::run_scenario(scenarios[i]); });
    return 0;
  });
  std::vector<SimSummary> sims;
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    const fs::path path = out / sim_file(cfg.scenarios[i].first);
    run_stage("simulate", path, [&] {
      std::ostringstream csv;
      mgsim::write_timeseries_csv(traces[i], csv);
      write_file(path, csv.str());
      return 0;
    });
    sims.push_back(summarize(cfg.scenarios[i].first, traces[i]));
  }
  say(fmt::format("simulate: {} scenarios", sims.size()));

  // Summary.
  std::ostringstream md;
  md << "# Detection and impact summary\n\n";
  md << fmt::format("Seed {}, window {}, train fraction {}, {} samples ({} benign, {} malicious), "
                    "{} test samples.\n\n",
                    cfg.seed, cfg.window, cfg.split_fraction, dataset.size(),
                    dataset.count(Label::kBenign), dataset.count(Label::kMalicious),
                    parts.test.size());
  md << "## Classification, all 30 HPCs, unbalanced training set\n\n";
  metrics_table(md, unbalanced);
  md << "## Classification, all 30 HPCs, balanced training set\n\n";
  metrics_table(md, balanced);
  md << "## PCA feature ranking\n\n| rank | feature | score |\n|---|---|---|\n";
  for (std::size_t i = 0; i < ranking.entries.size() && i < 10; ++i) {
    md << fmt::format("| {} | {} | {:.6g} |\n", i + 1, ranking.entries[i].name,
                      ranking.entries[i].score);
  }
  md << fmt::format("\n## Classification, top {} HPCs ({}), balanced training set\n\n", top.size(),
                    fmt::join(top, ", "));
  metrics_table(md, top_cells);
  md << "## Instruction elimination, balanced training set\n\n";
  md << "| spec | features | model | accuracy | precision | recall |\n|---|---|---|---|---|---|\n";
  for (const auto& r : ablation) {
    md << fmt::format("| {} | {} | {} | {} | {} | {} |\n", r.spec, r.n_features,
                      ml::model_kind_name(r.model), metric(r.counts.accuracy()),
                      metric(r.counts.precision()), metric(r.counts.recall()));
  }
  md << "\n## Microgrid scenarios\n\n";
  md << "| scenario | mean PV kW | PV off fraction | min Hz | max Hz | max diesel kW | final ESS kWh |\n";
  md << "|---|---|---|---|---|---|---|\n";
  for (const auto& s : sims) {
    md << fmt::format("| {} | {:.3f} | {:.4f} | {:.4f} | {:.4f} | {:.3f} | {:.3f} |\n", s.name,
                      s.mean_pv, s.pv_off_fraction, s.min_freq, s.max_freq, s.max_diesel,
                      s.final_ess_kwh);
  }
  BundleResult result;
  result.summary_markdown = md.str();
  run_stage("summary", out / "summary.md", [&] {
    write_file(out / "summary.md", result.summary_markdown);
    return 0;
  });
  result.files = expected;
  return result;
}

}  // namespace hpcs
