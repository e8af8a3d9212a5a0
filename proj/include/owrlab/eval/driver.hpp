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

#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <thread>

#include "owrlab/config.hpp"
#include "owrlab/eval/report.hpp"
#include "owrlab/eval/runner.hpp"
#include "owrlab/owr/checkpoint.hpp"

namespace owrlab {

// Writes one dataset file per configured domain. Domain 0 keeps the clean
// benchmark pixels; the others derive from it with seeded transforms.
inline void generate_datasets(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.data_dir);
  Dataset base = generate_benchmark(cfg.classes, cfg.instances_per_class,
                                    cfg.samples_per_instance, cfg.benchmark_seed,
                                    cfg.image_size, cfg.image_size);
  for (const DomainSpec& spec : cfg.domains) {
    Dataset out = spec.is_identity()
                      ? base
                      : apply_domain_dataset(base, spec, cfg.benchmark_seed);
    if (spec.is_identity())
      for (Sample& s : out.samples) s.domain_id = spec.domain_id;
    save_dataset(cfg.domain_file(spec.domain_id), out);
  }
}

inline std::map<std::uint16_t, Dataset> load_domain_datasets(
    const ExperimentConfig& cfg) {
  std::map<std::uint16_t, Dataset> out;
  std::set<std::uint16_t> wanted{cfg.train_domain};
  wanted.insert(cfg.test_domains.begin(), cfg.test_domains.end());
  for (std::uint16_t d : wanted) {
    const std::string path = cfg.domain_file(d);
    if (!std::filesystem::exists(path))
      throw ConfigError(concat("dataset file missing: ", path,
                               " (run `owrlab generate` first)"));
    out[d] = load_dataset(path);
  }
  return out;
}

namespace detail {

// One cell with per-step checkpoint resume. Rows of completed steps live in
// partial.csv next to the checkpoint; a finished cell collapses to its final
// fragment and drops the scratch state.
inline std::vector<ResultRow> run_cell_resumable(
    const CellConfig& cell, const EpisodeSchedule& schedule,
    const std::map<std::uint16_t, Dataset>& domains, const std::string& cell_dir,
    std::vector<ComposedTransform>* final_pool,
    std::size_t stop_after_steps = static_cast<std::size_t>(-1)) {
  namespace fs = std::filesystem;
  const std::string fragment = cell_dir + ".csv";
  if (fs::exists(fragment))
    return parse_results_csv(read_file(fragment), fragment);

  fs::create_directories(cell_dir);
  const std::string partial_path = (fs::path(cell_dir) / "partial.csv").string();
  const std::string ckpt_dir = (fs::path(cell_dir) / "ckpt").string();

  const Dataset& train_ds = domains.at(cell.train_domain);
  OwrModel model;
  model.config = cell.method;
  model.run_seed = cell.seed;
  DgState dg_state;
  DgState* dg = nullptr;
  if (cell.dg.kind != DgKind::kNone) {
    dg_state = DgState::make(cell.dg, cell.seed);
    dg = &dg_state;
  }

  std::vector<ResultRow> rows;
  std::size_t start_step = 0;
  if (fs::exists(partial_path) &&
      fs::exists(fs::path(ckpt_dir) / "state.json")) {
    rows = parse_results_csv(read_file(partial_path), partial_path);
    load_checkpoint(ckpt_dir, model, dg);
    model.config = cell.method;
    start_step = static_cast<std::size_t>(model.steps_completed);
  } else {
    MlpSpec spec;
    spec.layer_widths.push_back(train_ds.pixel_count());
    for (std::size_t h : cell.mlp_hidden) spec.layer_widths.push_back(h);
    spec.layer_widths.push_back(cell.feature_dim);
    Rng seed_rng = Rng::keyed(cell.seed, {fnv1a("mlp_seed")});
    spec.seed = seed_rng.next_u64();
    model.extractor = Mlp(spec);
  }

  for (std::size_t t = start_step; t < schedule.num_steps(); ++t) {
    std::vector<Sample> step_samples =
        detail::train_split_of_classes(train_ds, schedule.step_classes(t));
    incremental_step(model, step_samples, dg);

    std::vector<RunResult> step_results;
    for (std::uint16_t dom : cell.test_domains) {
      RunResult r;
      r.fingerprint = cell.fingerprint();
      r.method = variant_name(cell.method.variant);
      r.dg = dg_kind_name(cell.dg.kind);
      r.train_domain = cell.train_domain;
      r.test_domain = dom;
      r.seed = cell.seed;
      StepResult sr =
          evaluate_step(model, domains.at(dom), schedule.unknown_classes);
      sr.step = t;
      r.steps.push_back(sr);
      step_results.push_back(std::move(r));
    }
    {
      std::ofstream out(partial_path, std::ios::app);
      out << results_to_csv_rows(step_results);
    }
    save_checkpoint(ckpt_dir, model, dg);
    for (const RunResult& r : step_results)
      for (const ResultRow& row :
           parse_results_csv(results_to_csv_rows({r}), "memory"))
        rows.push_back(row);
    if (t + 1 >= stop_after_steps && t + 1 < schedule.num_steps())
      return rows;  // interrupted: scratch state stays for the next attempt
  }

  // Stable row order: (test_domain, step).
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ResultRow& a, const ResultRow& b) {
                     return std::tie(a.test_domain, a.step) <
                            std::tie(b.test_domain, b.step);
                   });
  std::string text;
  for (const ResultRow& r : rows) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "%s,%s,%s,%u,%u,%llu,%zu,%.6f,%.6f,%.6f,%.6f\n",
                  r.fingerprint.c_str(), r.method.c_str(), r.dg.c_str(),
                  unsigned(r.train_domain), unsigned(r.test_domain),
                  static_cast<unsigned long long>(r.seed), r.step,
                  r.cw_no_reject, r.cw_with_reject, r.open_set, r.owr_h);
    text += buf;
  }
  write_file(fragment, text);
  if (final_pool && dg && cell.dg.kind == DgKind::kRsda)
    *final_pool = dg_state.pool.pool;
  std::error_code ec;
  fs::remove_all(cell_dir, ec);
  return parse_results_csv(text, fragment);
}

}  // namespace detail

// Executes every (method, dg, seed) cell of the config, resuming partial
// cells from their checkpoints, and writes results.csv plus manifest.json
// into output_dir. Returns the results CSV text.
inline std::string drive_run(const ExperimentConfig& cfg, int jobs = 1) {
  namespace fs = std::filesystem;
  const auto t0 = std::chrono::steady_clock::now();
  cfg.validate();
  const EpisodeSchedule schedule = cfg.schedule();
  const auto domains = load_domain_datasets(cfg);
  fs::create_directories(cfg.output_dir);
  fs::create_directories(fs::path(cfg.output_dir) / "cells");

  {
    std::ofstream out(fs::path(cfg.output_dir) / "manifest.json");
    out << config_to_manifest(cfg).dump(2) << "\n";
  }

  const std::vector<CellConfig> cells = cfg.cells();
  std::vector<std::vector<ResultRow>> per_cell(cells.size());
  std::vector<std::vector<ComposedTransform>> pools(cells.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string failure;
  std::mutex failure_mu;

  auto worker = [&]() {
    while (!failed.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      try {
        const std::string cell_dir =
            (fs::path(cfg.output_dir) / "cells" / cells[i].fingerprint())
                .string();
        per_cell[i] = detail::run_cell_resumable(cells[i], schedule, domains,
                                                 cell_dir, &pools[i]);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(failure_mu);
        failure = e.what();
        failed.store(true);
      }
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int k = 0; k < jobs; ++k) threads.emplace_back(worker);
    for (auto& th : threads) th.join();
  }
  if (failed.load()) throw Error(failure);

  std::string csv = results_csv_header();
  for (const auto& rows : per_cell)
    for (const ResultRow& r : rows) {
      char buf[512];
      std::snprintf(buf, sizeof buf,
                    "%s,%s,%s,%u,%u,%llu,%zu,%.6f,%.6f,%.6f,%.6f\n",
                    r.fingerprint.c_str(), r.method.c_str(), r.dg.c_str(),
                    unsigned(r.train_domain), unsigned(r.test_domain),
                    static_cast<unsigned long long>(r.seed), r.step,
                    r.cw_no_reject, r.cw_with_reject, r.open_set, r.owr_h);
      csv += buf;
    }
  detail::write_file((fs::path(cfg.output_dir) / "results.csv").string(), csv);

  // Reproducibility extras: wall time and the evolved transform sets.
  nlohmann::json manifest = config_to_manifest(cfg);
  manifest["wall_time_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  nlohmann::json pool_log = nlohmann::json::object();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (pools[i].empty()) continue;
    nlohmann::json chains = nlohmann::json::array();
    for (const ComposedTransform& t : pools[i]) chains.push_back(t.describe());
    pool_log[cells[i].fingerprint()] = chains;
  }
  manifest["rsda_pools"] = pool_log;
  {
    std::ofstream out(fs::path(cfg.output_dir) / "manifest.json");
    out << manifest.dump(2) << "\n";
  }
  return csv;
}

}  // namespace owrlab
