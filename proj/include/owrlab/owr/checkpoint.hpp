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

#include <filesystem>
#include <fstream>
#include <string>

#include "owrlab/dg/plugin.hpp"
#include "owrlab/owr/model.hpp"

namespace owrlab {

namespace detail {

inline Dataset sample_map_to_dataset(
    const std::map<std::uint16_t, std::vector<Sample>>& by_class) {
  Dataset ds;
  bool first = true;
  for (const auto& [cls, samples] : by_class)
    for (const Sample& s : samples) {
      if (first) {
        ds.height = s.image.height;
        ds.width = s.image.width;
        ds.channels = s.image.channels;
        first = false;
      }
      ds.samples.push_back(s);
    }
  return ds;
}

inline std::map<std::uint16_t, std::vector<Sample>> dataset_to_sample_map(
    const Dataset& ds) {
  std::map<std::uint16_t, std::vector<Sample>> out;
  for (const Sample& s : ds.samples) out[s.class_id].push_back(s);
  return out;
}

}  // namespace detail

// Model checkpoint: weight blobs plus a structured text sidecar with the
// class state, thresholds and counters. Exemplar and reserved samples ride
// along as dataset files so a run can resume from any completed step.
inline void save_checkpoint(const std::string& dir, const OwrModel& model,
                            const DgState* dg = nullptr) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  save_weights((fs::path(dir) / "extractor.owrw").string(),
               model.extractor.params());
  if (model.prev_extractor.initialized())
    save_weights((fs::path(dir) / "prev.owrw").string(),
                 model.prev_extractor.params());
  if (model.rotation_head.initialized())
    save_weights((fs::path(dir) / "rotation_head.owrw").string(),
                 model.rotation_head.params());
  save_dataset((fs::path(dir) / "exemplars.owrd").string(),
               detail::sample_map_to_dataset(model.exemplars.stored));
  save_dataset((fs::path(dir) / "reserved.owrd").string(),
               detail::sample_map_to_dataset(model.reserved));

  nlohmann::json j;
  j["version"] = 1;
  j["steps_completed"] = model.steps_completed;
  j["run_seed"] = model.run_seed;
  j["known"] = model.classes.known;
  j["counts"] = nlohmann::json::object();
  j["centroids"] = nlohmann::json::object();
  for (const auto& [cls, mu] : model.classes.centroids)
    j["centroids"][std::to_string(cls)] = mu;
  for (const auto& [cls, n] : model.classes.counts)
    j["counts"][std::to_string(cls)] = n;
  j["tau"] = model.classes.tau;
  j["class_tau"] = nlohmann::json::object();
  for (const auto& [cls, tau] : model.classes.class_tau)
    j["class_tau"][std::to_string(cls)] = tau;
  j["normalizer"] = model.classes.normalizer;
  j["feature_std"] = model.classes.feature_std;
  j["tau_score_sum"] = model.classes.tau_score_sum;
  j["tau_weight_sum"] = model.classes.tau_weight_sum;
  j["pseudo_unknown"] = model.pseudo_unknown;
  j["exemplar_capacity"] = model.exemplars.capacity;
  j["mlp_widths"] = model.extractor.spec().layer_widths;
  j["mlp_seed"] = model.extractor.spec().seed;
  if (model.rotation_head.initialized()) {
    j["rotation_head_widths"] = model.rotation_head.spec().layer_widths;
    j["rotation_head_seed"] = model.rotation_head.spec().seed;
  }
  if (dg) {
    nlohmann::json dj;
    dj["iteration"] = dg->iteration;
    dj["rsda_rng"] = dg->rsda_rng.state();
    dj["rr_rng"] = dg->rr_rng.state();
    dj["sc_rng"] = dg->sc_rng.state();
    nlohmann::json pool = nlohmann::json::array();
    for (const ComposedTransform& t : dg->pool.pool) {
      nlohmann::json chain = nlohmann::json::array();
      for (const BasicTransform& b : t.chain)
        chain.push_back({{"kind", static_cast<int>(b.kind)},
                         {"magnitude", b.magnitude}});
      pool.push_back(chain);
    }
    dj["pool"] = pool;
    j["dg"] = dj;
  }
  std::ofstream out(fs::path(dir) / "state.json");
  out << j.dump(2) << "\n";
}

// Restores a checkpoint written by save_checkpoint. model.config must already
// carry the run configuration; dg, when given, must carry its options.
inline void load_checkpoint(const std::string& dir, OwrModel& model,
                            DgState* dg = nullptr) {
  namespace fs = std::filesystem;
  const std::string state_path = (fs::path(dir) / "state.json").string();
  std::ifstream in(state_path);
  if (!in) throw ParseError(concat(state_path, ": cannot open for reading"));
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(concat(state_path, ": ", e.what()));
  }

  MlpSpec spec;
  spec.layer_widths = j.at("mlp_widths").get<std::vector<std::size_t>>();
  spec.seed = j.at("mlp_seed").get<std::uint64_t>();
  model.extractor = Mlp(spec);
  auto loaded = load_weights((fs::path(dir) / "extractor.owrw").string());
  if (loaded.size() != model.extractor.params().size())
    throw ParseError(concat(dir, ": extractor blob has ", loaded.size(),
                            " parameters, spec wants ",
                            model.extractor.params().size()));
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    if (loaded[i].shape() != model.extractor.params()[i].shape())
      throw ParseError(concat(dir, ": extractor parameter ", i, " shape mismatch"));
    model.extractor.params()[i].values() = loaded[i].values();
  }
  if (fs::exists(fs::path(dir) / "prev.owrw")) {
    model.prev_extractor = Mlp(spec);
    auto prev = load_weights((fs::path(dir) / "prev.owrw").string());
    for (std::size_t i = 0; i < prev.size(); ++i)
      model.prev_extractor.params()[i].values() = prev[i].values();
    model.prev_extractor.set_trainable(false);
  } else {
    model.prev_extractor = Mlp();
  }
  if (j.contains("rotation_head_widths")) {
    MlpSpec hs;
    hs.layer_widths = j.at("rotation_head_widths").get<std::vector<std::size_t>>();
    hs.seed = j.at("rotation_head_seed").get<std::uint64_t>();
    model.rotation_head = Mlp(hs);
    auto head = load_weights((fs::path(dir) / "rotation_head.owrw").string());
    for (std::size_t i = 0; i < head.size(); ++i)
      model.rotation_head.params()[i].values() = head[i].values();
  } else {
    model.rotation_head = Mlp();
  }

  model.steps_completed = j.at("steps_completed").get<int>();
  model.run_seed = j.at("run_seed").get<std::uint64_t>();
  model.classes = ClassModel{};
  model.classes.known = j.at("known").get<std::vector<std::uint16_t>>();
  for (const auto& [key, value] : j.at("centroids").items())
    model.classes.centroids[static_cast<std::uint16_t>(std::stoul(key))] =
        value.get<std::vector<double>>();
  for (const auto& [key, value] : j.at("counts").items())
    model.classes.counts[static_cast<std::uint16_t>(std::stoul(key))] =
        value.get<std::size_t>();
  model.classes.tau = j.at("tau").get<double>();
  for (const auto& [key, value] : j.at("class_tau").items())
    model.classes.class_tau[static_cast<std::uint16_t>(std::stoul(key))] =
        value.get<double>();
  model.classes.normalizer = j.at("normalizer").get<double>();
  model.classes.feature_std = j.at("feature_std").get<double>();
  model.classes.tau_score_sum = j.at("tau_score_sum").get<double>();
  model.classes.tau_weight_sum = j.at("tau_weight_sum").get<double>();
  model.pseudo_unknown = j.at("pseudo_unknown").get<ClassSet>();
  model.exemplars.capacity = j.at("exemplar_capacity").get<int>();
  model.exemplars.stored = detail::dataset_to_sample_map(
      load_dataset((fs::path(dir) / "exemplars.owrd").string()));
  model.reserved = detail::dataset_to_sample_map(
      load_dataset((fs::path(dir) / "reserved.owrd").string()));

  if (dg && j.contains("dg")) {
    const auto& dj = j.at("dg");
    dg->iteration = dj.at("iteration").get<long>();
    dg->rsda_rng.set_state(dj.at("rsda_rng").get<std::uint64_t>());
    dg->rr_rng.set_state(dj.at("rr_rng").get<std::uint64_t>());
    dg->sc_rng.set_state(dj.at("sc_rng").get<std::uint64_t>());
    dg->pool.pool.clear();
    for (const auto& chain : dj.at("pool")) {
      ComposedTransform t;
      for (const auto& b : chain) {
        BasicTransform bt;
        bt.kind = static_cast<TransformKind>(b.at("kind").get<int>());
        bt.magnitude = b.at("magnitude").get<float>();
        t.chain.push_back(bt);
      }
      dg->pool.pool.push_back(std::move(t));
    }
  }
}

}  // namespace owrlab
