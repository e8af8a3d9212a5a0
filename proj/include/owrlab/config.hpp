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

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "owrlab/benchmark.hpp"
#include "owrlab/eval/runner.hpp"
#include "owrlab/eval/validate.hpp"
#include "owrlab/schedule.hpp"

namespace owrlab {

inline constexpr const char* kOwrlabVersion = "1.0.0";

// The full experiment description: benchmark, schedule, method/plugin cells,
// validation grids and run bookkeeping. Parsed strictly (unknown keys are
// rejected with their path) and re-serialized in fully resolved form as the
// run manifest.
struct ExperimentConfig {
  // benchmark
  std::uint16_t classes = 20;
  std::uint16_t instances_per_class = 5;
  std::uint16_t samples_per_instance = 8;
  std::uint16_t image_size = 16;
  std::uint64_t benchmark_seed = 1234;
  std::vector<DomainSpec> domains = default_domain_ladder();
  // schedule
  double known_fraction = 0.5;
  std::size_t base_count = 4;
  std::size_t step_size = 2;
  std::uint64_t schedule_seed = 77;
  // network
  std::vector<std::size_t> mlp_hidden{96};
  std::size_t feature_dim = 48;
  // cells
  std::vector<Variant> methods{Variant::kNno, Variant::kDeepNno, Variant::kBdoc};
  std::vector<DgKind> dg_kinds{DgKind::kNone};
  std::map<std::string, nlohmann::json> method_overrides;  // "common" + per name
  DgOptions dg_options;
  // run
  std::uint16_t train_domain = 0;
  std::vector<std::uint16_t> test_domains{0, 1, 2};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::string data_dir = "data";
  std::string output_dir = "runs/out";
  // validation
  std::size_t validation_trials = 2;
  ValidationGrids grids;

  MethodConfig resolved_method(Variant variant) const;
  CellConfig cell(Variant variant, DgKind dg, std::uint64_t seed) const;
  std::vector<CellConfig> cells() const;
  EpisodeSchedule schedule() const {
    ClassSet all;
    for (std::uint16_t c = 0; c < classes; ++c) all.push_back(c);
    return build_schedule(all, known_fraction, base_count, step_size,
                          schedule_seed);
  }
  std::string domain_file(std::uint16_t domain) const {
    return concat(data_dir, "/domain_", domain, ".owrd");
  }
  void validate() const;
};

namespace detail {

[[noreturn]] inline void bad_key(const std::string& path, const std::string& key) {
  throw ConfigError(concat("config: unknown key '", path, key, "'"));
}

inline void check_keys(const nlohmann::json& obj, const std::string& path,
                       const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key)) bad_key(path, key);
}

template <typename T>
void maybe(const nlohmann::json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(concat("config: key '", key, "' has the wrong type"));
  }
}

inline DomainSpec domain_from_json(const nlohmann::json& j, const std::string& path) {
  check_keys(j, path,
             {"domain_id", "color_gain", "color_bias", "contrast", "blur_radius",
              "noise_sigma", "occlusion_count", "occlusion_max_patch",
              "scale_min", "scale_max"});
  DomainSpec d;
  maybe(j, "domain_id", d.domain_id);
  std::vector<float> gain, bias;
  maybe(j, "color_gain", gain);
  maybe(j, "color_bias", bias);
  if (!gain.empty()) {
    if (gain.size() != 3) throw ConfigError("config: color_gain wants 3 values");
    std::copy(gain.begin(), gain.end(), d.color_gain.begin());
  }
  if (!bias.empty()) {
    if (bias.size() != 3) throw ConfigError("config: color_bias wants 3 values");
    std::copy(bias.begin(), bias.end(), d.color_bias.begin());
  }
  maybe(j, "contrast", d.contrast);
  maybe(j, "blur_radius", d.blur_radius);
  maybe(j, "noise_sigma", d.noise_sigma);
  maybe(j, "occlusion_count", d.occlusion_count);
  maybe(j, "occlusion_max_patch", d.occlusion_max_patch);
  maybe(j, "scale_min", d.scale_min);
  maybe(j, "scale_max", d.scale_max);
  d.validate();
  return d;
}

inline nlohmann::json domain_to_json(const DomainSpec& d) {
  return {{"domain_id", d.domain_id},
          {"color_gain", std::vector<float>(d.color_gain.begin(), d.color_gain.end())},
          {"color_bias", std::vector<float>(d.color_bias.begin(), d.color_bias.end())},
          {"contrast", d.contrast},
          {"blur_radius", d.blur_radius},
          {"noise_sigma", d.noise_sigma},
          {"occlusion_count", d.occlusion_count},
          {"occlusion_max_patch", d.occlusion_max_patch},
          {"scale_min", d.scale_min},
          {"scale_max", d.scale_max}};
}

inline void apply_method_overrides(MethodConfig& m, const nlohmann::json& j,
                                   const std::string& path) {
  check_keys(j, path,
             {"lambda", "gamma", "lr", "weight_decay", "epochs_base",
              "epochs_incremental", "neg_weight", "tau_lr", "tau_epochs",
              "nno_tau_grid", "exemplars_per_class", "batch_size",
              "reserved_fraction", "phi_pooling"});
  maybe(j, "lambda", m.lambda_distill);
  maybe(j, "gamma", m.gamma_snnl);
  maybe(j, "lr", m.lr);
  maybe(j, "weight_decay", m.weight_decay);
  maybe(j, "epochs_base", m.epochs_base);
  maybe(j, "epochs_incremental", m.epochs_incremental);
  maybe(j, "neg_weight", m.neg_weight);
  maybe(j, "tau_lr", m.tau_lr);
  maybe(j, "tau_epochs", m.tau_epochs);
  maybe(j, "nno_tau_grid", m.nno_tau_grid);
  maybe(j, "exemplars_per_class", m.exemplars_per_class);
  maybe(j, "batch_size", m.batch_size);
  maybe(j, "reserved_fraction", m.reserved_fraction);
  if (j.contains("phi_pooling")) {
    const std::string p = j.at("phi_pooling").get<std::string>();
    if (p == "components")
      m.phi_pooling = PhiPooling::kComponents;
    else if (p == "sample_norm")
      m.phi_pooling = PhiPooling::kSampleNorm;
    else
      throw ConfigError(concat("config: phi_pooling '", p,
                               "' (want components|sample_norm)"));
  }
}

inline nlohmann::json method_to_json(const MethodConfig& m) {
  return {{"lambda", m.lambda_distill},
          {"gamma", m.gamma_snnl},
          {"lr", m.lr},
          {"weight_decay", m.weight_decay},
          {"epochs_base", m.epochs_base},
          {"epochs_incremental", m.epochs_incremental},
          {"neg_weight", m.neg_weight},
          {"tau_lr", m.tau_lr},
          {"tau_epochs", m.tau_epochs},
          {"nno_tau_grid", m.nno_tau_grid},
          {"exemplars_per_class", m.exemplars_per_class},
          {"batch_size", m.batch_size},
          {"reserved_fraction", m.reserved_fraction},
          {"phi_pooling", m.phi_pooling == PhiPooling::kComponents
                              ? "components"
                              : "sample_norm"}};
}

}  // namespace detail

inline MethodConfig ExperimentConfig::resolved_method(Variant variant) const {
  MethodConfig m = MethodConfig::defaults_for(variant);
  const auto common = method_overrides.find("common");
  if (common != method_overrides.end())
    detail::apply_method_overrides(m, common->second, "method_overrides.common.");
  const auto specific = method_overrides.find(variant_name(variant));
  if (specific != method_overrides.end())
    detail::apply_method_overrides(
        m, specific->second,
        concat("method_overrides.", variant_name(variant), "."));
  m.validate();
  return m;
}

inline CellConfig ExperimentConfig::cell(Variant variant, DgKind dg,
                                         std::uint64_t seed) const {
  CellConfig c;
  c.method = resolved_method(variant);
  c.dg = dg_options;
  c.dg.kind = dg;
  c.mlp_hidden = mlp_hidden;
  c.feature_dim = feature_dim;
  c.train_domain = train_domain;
  c.test_domains = test_domains;
  c.seed = seed;
  return c;
}

inline std::vector<CellConfig> ExperimentConfig::cells() const {
  std::vector<CellConfig> out;
  for (Variant v : methods)
    for (DgKind dg : dg_kinds)
      for (std::uint64_t seed : seeds) out.push_back(cell(v, dg, seed));
  return out;
}

inline void ExperimentConfig::validate() const {
  if (classes < 2) throw ConfigError("config: need at least 2 classes");
  if (instances_per_class < 2)
    throw ConfigError("config: instances_per_class must be >= 2");
  if (samples_per_instance < 1)
    throw ConfigError("config: samples_per_instance must be >= 1");
  if (image_size < 4) throw ConfigError("config: image_size must be >= 4");
  if (feature_dim < 2) throw ConfigError("config: feature_dim must be >= 2");
  if (methods.empty()) throw ConfigError("config: no methods selected");
  if (dg_kinds.empty()) throw ConfigError("config: no dg plugins selected");
  if (seeds.empty()) throw ConfigError("config: no seeds");
  if (test_domains.empty()) throw ConfigError("config: no test domains");
  std::set<std::uint16_t> domain_ids;
  for (const DomainSpec& d : domains) {
    d.validate();
    if (!domain_ids.insert(d.domain_id).second)
      throw ConfigError(concat("config: duplicate domain id ", d.domain_id));
  }
  if (!domain_ids.count(train_domain))
    throw ConfigError(concat("config: train domain ", train_domain,
                             " has no domain spec"));
  for (std::uint16_t d : test_domains)
    if (!domain_ids.count(d))
      throw ConfigError(concat("config: test domain ", d, " has no domain spec"));
  schedule();  // throws on infeasible arithmetic
  for (Variant v : methods) resolved_method(v);
  dg_options.validate();
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  using detail::check_keys;
  using detail::maybe;
  check_keys(j, "",
             {"benchmark", "schedule", "mlp", "methods", "dg", "method_overrides",
              "dg_options", "validation", "run", "data_dir", "output_dir",
              "owrlab_version", "format", "wall_time_seconds", "rsda_pools"});
  ExperimentConfig c;
  if (j.contains("benchmark")) {
    const auto& b = j.at("benchmark");
    check_keys(b, "benchmark.",
               {"classes", "instances_per_class", "samples_per_instance",
                "image_size", "seed", "domains"});
    maybe(b, "classes", c.classes);
    maybe(b, "instances_per_class", c.instances_per_class);
    maybe(b, "samples_per_instance", c.samples_per_instance);
    maybe(b, "image_size", c.image_size);
    maybe(b, "seed", c.benchmark_seed);
    if (b.contains("domains")) {
      c.domains.clear();
      std::size_t i = 0;
      for (const auto& dj : b.at("domains"))
        c.domains.push_back(
            detail::domain_from_json(dj, concat("benchmark.domains[", i++, "].")));
    }
  }
  if (j.contains("schedule")) {
    const auto& s = j.at("schedule");
    check_keys(s, "schedule.",
               {"known_fraction", "base_count", "step_size", "seed"});
    maybe(s, "known_fraction", c.known_fraction);
    maybe(s, "base_count", c.base_count);
    maybe(s, "step_size", c.step_size);
    maybe(s, "seed", c.schedule_seed);
  }
  if (j.contains("mlp")) {
    const auto& m = j.at("mlp");
    check_keys(m, "mlp.", {"hidden", "feature_dim"});
    maybe(m, "hidden", c.mlp_hidden);
    maybe(m, "feature_dim", c.feature_dim);
  }
  if (j.contains("methods")) {
    c.methods.clear();
    for (const auto& name : j.at("methods"))
      c.methods.push_back(variant_from_name(name.get<std::string>()));
  }
  if (j.contains("dg")) {
    c.dg_kinds.clear();
    for (const auto& name : j.at("dg"))
      c.dg_kinds.push_back(dg_kind_from_name(name.get<std::string>()));
  }
  if (j.contains("method_overrides")) {
    const auto& mo = j.at("method_overrides");
    check_keys(mo, "method_overrides.", {"common", "nno", "deepnno", "bdoc"});
    for (const auto& [key, value] : mo.items()) c.method_overrides[key] = value;
  }
  if (j.contains("dg_options")) {
    const auto& d = j.at("dg_options");
    check_keys(d, "dg_options.",
               {"rr_weight", "sc_keep_percentile", "sc_batch_ratio",
                "rsda_update_every", "rsda_population", "rsda_generations",
                "rsda_append_k", "rsda_max_chain"});
    maybe(d, "rr_weight", c.dg_options.rr_weight);
    maybe(d, "sc_keep_percentile", c.dg_options.sc_keep_percentile);
    maybe(d, "sc_batch_ratio", c.dg_options.sc_batch_ratio);
    maybe(d, "rsda_update_every", c.dg_options.rsda.update_every);
    maybe(d, "rsda_population", c.dg_options.rsda.population);
    maybe(d, "rsda_generations", c.dg_options.rsda.generations);
    maybe(d, "rsda_append_k", c.dg_options.rsda.append_k);
    maybe(d, "rsda_max_chain", c.dg_options.rsda.max_chain);
  }
  if (j.contains("validation")) {
    const auto& v = j.at("validation");
    check_keys(v, "validation.", {"trials", "grids"});
    maybe(v, "trials", c.validation_trials);
    if (v.contains("grids")) {
      const auto& g = v.at("grids");
      check_keys(g, "validation.grids.",
                 {"lr", "weight_decay", "lambda", "gamma", "neg_weight",
                  "tau_lr", "nno_tau_grid"});
      maybe(g, "lr", c.grids.lr);
      maybe(g, "weight_decay", c.grids.weight_decay);
      maybe(g, "lambda", c.grids.lambda);
      maybe(g, "gamma", c.grids.gamma);
      maybe(g, "neg_weight", c.grids.neg_weight);
      maybe(g, "tau_lr", c.grids.tau_lr);
      maybe(g, "nno_tau_grid", c.grids.nno_tau_grid);
    }
  }
  if (j.contains("run")) {
    const auto& r = j.at("run");
    check_keys(r, "run.", {"train_domain", "test_domains", "seeds"});
    maybe(r, "train_domain", c.train_domain);
    maybe(r, "test_domains", c.test_domains);
    maybe(r, "seeds", c.seeds);
  }
  maybe(j, "data_dir", c.data_dir);
  maybe(j, "output_dir", c.output_dir);

  // Environment override for the seed list.
  if (const char* env = std::getenv("OWRLAB_SEED")) {
    c.seeds.clear();
    std::string s(env);
    std::size_t pos = 0;
    while (pos < s.size()) {
      const std::size_t comma = s.find(',', pos);
      const std::string tok = s.substr(pos, comma == std::string::npos
                                                ? std::string::npos
                                                : comma - pos);
      if (!tok.empty()) {
        try {
          c.seeds.push_back(std::stoull(tok));
        } catch (const std::exception&) {
          throw ConfigError(concat("OWRLAB_SEED: bad seed '", tok, "'"));
        }
      }
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (c.seeds.empty())
      throw ConfigError("OWRLAB_SEED: no seeds parsed from environment");
  }
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(concat(path, ": cannot open config"));
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(concat(path, ": ", e.what()));
  }
  return config_from_json(j);
}

// Fully resolved config; rerunning from this reproduces the run bit-for-bit.
inline nlohmann::json config_to_manifest(const ExperimentConfig& c) {
  nlohmann::json j;
  j["owrlab_version"] = kOwrlabVersion;
  j["format"] = 1;
  nlohmann::json b;
  b["classes"] = c.classes;
  b["instances_per_class"] = c.instances_per_class;
  b["samples_per_instance"] = c.samples_per_instance;
  b["image_size"] = c.image_size;
  b["seed"] = c.benchmark_seed;
  nlohmann::json domains = nlohmann::json::array();
  for (const DomainSpec& d : c.domains) domains.push_back(detail::domain_to_json(d));
  b["domains"] = domains;
  j["benchmark"] = b;
  j["schedule"] = {{"known_fraction", c.known_fraction},
                   {"base_count", c.base_count},
                   {"step_size", c.step_size},
                   {"seed", c.schedule_seed}};
  j["mlp"] = {{"hidden", c.mlp_hidden}, {"feature_dim", c.feature_dim}};
  nlohmann::json methods = nlohmann::json::array();
  for (Variant v : c.methods) methods.push_back(variant_name(v));
  j["methods"] = methods;
  nlohmann::json dgs = nlohmann::json::array();
  for (DgKind k : c.dg_kinds) dgs.push_back(dg_kind_name(k));
  j["dg"] = dgs;
  nlohmann::json overrides;
  for (Variant v : c.methods)
    overrides[variant_name(v)] = detail::method_to_json(c.resolved_method(v));
  j["method_overrides"] = overrides;
  j["dg_options"] = {{"rr_weight", c.dg_options.rr_weight},
                     {"sc_keep_percentile", c.dg_options.sc_keep_percentile},
                     {"sc_batch_ratio", c.dg_options.sc_batch_ratio},
                     {"rsda_update_every", c.dg_options.rsda.update_every},
                     {"rsda_population", c.dg_options.rsda.population},
                     {"rsda_generations", c.dg_options.rsda.generations},
                     {"rsda_append_k", c.dg_options.rsda.append_k},
                     {"rsda_max_chain", c.dg_options.rsda.max_chain}};
  j["validation"] = {{"trials", c.validation_trials},
                     {"grids",
                      {{"lr", c.grids.lr},
                       {"weight_decay", c.grids.weight_decay},
                       {"lambda", c.grids.lambda},
                       {"gamma", c.grids.gamma},
                       {"neg_weight", c.grids.neg_weight},
                       {"tau_lr", c.grids.tau_lr},
                       {"nno_tau_grid", c.grids.nno_tau_grid}}}};
  j["run"] = {{"train_domain", c.train_domain},
              {"test_domains", c.test_domains},
              {"seeds", c.seeds}};
  j["data_dir"] = c.data_dir;
  j["output_dir"] = c.output_dir;
  return j;
}

}  // namespace owrlab
