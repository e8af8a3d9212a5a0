// Copyright 2026 The owrlab authors.
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

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "owrlab/owrlab.hpp"

namespace {

using namespace owrlab;

int cmd_generate(const std::string& config_path, const std::string& out_dir) {
  ExperimentConfig cfg = load_config(config_path);
  if (!out_dir.empty()) cfg.data_dir = out_dir;
  generate_datasets(cfg);
  for (const DomainSpec& d : cfg.domains)
    std::cout << "wrote " << cfg.domain_file(d.domain_id) << "\n";
  return 0;
}

int cmd_validate(const std::string& config_path, const std::string& method) {
  ExperimentConfig cfg = load_config(config_path);
  const Variant variant = variant_from_name(method);
  const auto domains = load_domain_datasets(cfg);
  const EpisodeSchedule schedule = cfg.schedule();

  CellConfig cell = cfg.cell(variant, DgKind::kNone, cfg.seeds.front());
  ValidationOutcome outcome = validate_hyperparameters(
      cfg.resolved_method(variant), cell, schedule.base_classes,
      domains.at(cfg.train_domain), cfg.grids, cfg.validation_trials,
      cfg.schedule_seed);

  std::filesystem::create_directories(cfg.output_dir);
  const std::string out_path =
      concat(cfg.output_dir, "/validated_", method, ".json");
  nlohmann::json j;
  j["method"] = method;
  j["stage1_closed_world_no_reject"] = outcome.stage1_score;
  j["stage2_owr_h"] = outcome.stage2_score;
  j["stage1_evaluated"] = outcome.stage1_evaluated;
  j["stage2_evaluated"] = outcome.stage2_evaluated;
  j["winner"] = detail::method_to_json(outcome.best);
  std::ofstream out(out_path);
  out << j.dump(2) << "\n";
  std::cout << "stage 1 closed-world (no rejection): " << outcome.stage1_score
            << "\nstage 2 OWR-H: " << outcome.stage2_score << "\nwrote "
            << out_path << "\n";
  return 0;
}

int cmd_run(const std::string& config_path, int jobs) {
  ExperimentConfig cfg = load_config(config_path);
  drive_run(cfg, jobs);
  std::cout << "wrote " << cfg.output_dir << "/results.csv\n"
            << "wrote " << cfg.output_dir << "/manifest.json\n";
  return 0;
}

int cmd_report(const std::string& in_dir, const std::string& out_path) {
  const std::string results = in_dir + "/results.csv";
  if (!std::filesystem::exists(results))
    throw ConfigError(concat("no results at ", results));
  const auto rows = parse_results_csv(detail::read_file(results), results);
  const std::string table = render_report_csv(aggregate_results(rows));
  detail::write_file(out_path, table);
  std::cout << table;
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

// Fast oracle sweep: gradients against finite differences, score formulas
// against hand evaluation, protocol arithmetic against the published splits.
int cmd_selftest() {
  int failures = 0;
  auto check = [&failures](const char* name, bool ok) {
    std::cout << (ok ? "[ok]   " : "[FAIL] ") << name << "\n";
    if (!ok) ++failures;
  };

  {
    Rng rng(1);
    Tensor mu = Tensor::zeros({3, 8});
    for (auto& v : mu.values()) v = rng.normal();
    Tensor targets = Tensor::zeros({4, 3});
    for (int b = 0; b < 4; ++b) targets.at(b * 3 + b % 3) = 1.0;
    auto f = [&](Tape& t, Tensor& x) {
      return bce_loss(t, deepnno_score_op(t, x, mu), targets);
    };
    double worst = 0;
    for (int rep = 0; rep < 5; ++rep) {
      Tensor x = Tensor::zeros({4, 8});
      for (auto& v : x.values()) v = rng.normal();
      worst = std::max(worst, gradcheck(f, x, 1e-5));
    }
    check("gradcheck bce/deepnno-score", worst < 1e-4);

    std::vector<std::uint16_t> labels = {0, 1, 0, 1};
    auto g = [&](Tape& t, Tensor& x) { return snnl_loss(t, x, labels, 1.3); };
    double worst2 = 0;
    for (int rep = 0; rep < 5; ++rep) {
      Tensor x = Tensor::zeros({4, 8});
      for (auto& v : x.values()) v = rng.normal();
      worst2 = std::max(worst2, gradcheck(g, x, 1e-5));
    }
    check("gradcheck snnl", worst2 < 1e-4);
  }
  {
    ClassModel cm;
    cm.known = {0};
    cm.centroids[0] = {0.0, 0.0};
    cm.tau = 10.0;
    const auto r = nno_classify(cm, std::vector<double>{3.0, 4.0});
    check("nno score formula", std::abs(r.scores[0] - 0.5) < 1e-12);
    const auto d = deepnno_classify(cm, std::vector<double>{1.0, 0.0});
    check("deepnno score formula",
          std::abs(d.scores[0] - std::exp(-0.5)) < 1e-12);
    cm.feature_std = 2.0;
    cm.class_tau[0] = 1.0;
    const auto b = bdoc_classify(cm, std::vector<double>{1.0, 1.0});
    check("bdoc score formula", std::abs(b.scores[0] - 1.0) < 1e-12);
    check("owr harmonic", std::abs(owr_harmonic(0.6, 0.4) - 0.48) < 1e-12);
  }
  {
    ClassSet classes;
    for (std::uint16_t i = 0; i < 51; ++i) classes.push_back(i);
    const auto s = build_schedule(classes, 26.0 / 51.0, 11, 5, 1);
    check("51-class schedule arithmetic",
          s.base_classes.size() == 11 && s.incremental_steps.size() == 3 &&
              s.unknown_classes.size() == 25);
    ClassSet base;
    for (std::uint16_t i = 0; i < 11; ++i) base.push_back(i);
    const auto trials = build_validation_splits(base, 1, 3);
    check("11-base validation split",
          trials.size() == 3 && trials[0].val_unknown_classes.size() == 2 &&
              trials[0].val_base_classes.size() == 5 &&
              trials[0].val_incremental_steps.size() == 4 &&
              trials[2].val_incremental_steps.size() == 1);
  }
  {
    std::vector<double> g = {0.1, 0.4, 0.2, 0.3};
    const auto mask = sc_row_mask(g, 0.5);
    check("sc quantile mask",
          mask == std::vector<double>{1.0, 0.0, 1.0, 0.0});
    Image im(2, 2, 1);
    im.at(0, 0, 0) = 1;
    im.at(0, 1, 0) = 2;
    im.at(1, 0, 0) = 3;
    im.at(1, 1, 0) = 4;
    const Image r = rotate90_ccw(im);
    check("rotation index map",
          r.at(0, 0, 0) == 2 && r.at(0, 1, 0) == 4 && r.at(1, 0, 0) == 1 &&
              r.at(1, 1, 0) == 3);
  }
  if (failures) {
    std::cout << failures << " selftest failure(s)\n";
    return 2;
  }
  std::cout << "selftest passed\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"owrlab: open-world recognition under domain shift, desk scale"};
  app.require_subcommand(1);

  std::string config_path, out_dir, method = "deepnno", in_dir, out_path;
  int jobs = 1;

  auto* generate = app.add_subcommand("generate", "write benchmark datasets");
  generate->add_option("-c,--config", config_path, "experiment config (json)")
      ->required();
  generate->add_option("-o,--out", out_dir, "dataset directory override");

  auto* validate = app.add_subcommand("validate",
                                      "two-stage base-class hyperparameter search");
  validate->add_option("-c,--config", config_path)->required();
  validate->add_option("--method", method, "nno|deepnno|bdoc")->required();

  auto* run = app.add_subcommand("run", "execute every (method, dg, seed) cell");
  run->add_option("-c,--config", config_path)->required();
  run->add_option("--jobs", jobs, "worker threads");

  auto* report = app.add_subcommand("report", "aggregate results into a table");
  report->add_option("-i,--in", in_dir, "run output directory")->required();
  report->add_option("-o,--out", out_path, "table csv path")->required();

  app.add_subcommand("selftest", "run the oracle and gradient quick suite");

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) return cmd_generate(config_path, out_dir);
    if (validate->parsed()) return cmd_validate(config_path, method);
    if (run->parsed()) return cmd_run(config_path, jobs);
    if (report->parsed()) return cmd_report(in_dir, out_path);
    return cmd_selftest();
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
}
