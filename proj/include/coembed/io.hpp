// Copyright 2026 The coembed Authors.
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

// File formats: JSON checkpoints, embedding TSV exports, the training-log
// CSV, metrics JSON / results CSV, and the synthetic-data meta.json.
//
// Checkpoint layout (JSON object):
//   format   "coembed-checkpoint", version 1
//   seed     RNG seed of the run
//   hyper    every HyperParams field by name
//   dims     {n_nodes, n_attrs, n_classes}
//   tensors  {name: {rows, cols, data: [row-major doubles]}} for the ten
//            ModelParams tensors
// Doubles are written in shortest round-trip form, so a reload is exact.

#ifndef COEMBED_IO_HPP_
#define COEMBED_IO_HPP_

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "coembed/errors.hpp"
#include "coembed/graphdata.hpp"
#include "coembed/model.hpp"
#include "coembed/trainer.hpp"

namespace coembed {

using json = nlohmann::ordered_json;

inline const char* to_string(PosWeightMode m) { return m == PosWeightMode::kBalanced ? "balanced" : "none"; }

inline PosWeightMode pos_weight_from_string(const std::string& s) {
  if (s == "balanced") return PosWeightMode::kBalanced;
  if (s == "none") return PosWeightMode::kNone;
  throw InputError("pos_weight must be 'balanced' or 'none', got '" + s + "'");
}

inline json hyper_to_json(const HyperParams& h) {
  return {{"latent_dim", h.latent_dim},   {"hidden_node", h.hidden_node},
          {"hidden_attr", h.hidden_attr}, {"hidden_disc", h.hidden_disc},
          {"alpha", h.alpha},             {"beta", h.beta},
          {"tau", h.tau},                 {"learning_rate", h.learning_rate},
          {"epochs", h.epochs},           {"seed", h.seed},
          {"pos_weight", to_string(h.pos_weight)}, {"self_loops", h.self_loops}};
}

// Missing keys keep their defaults; wrongly typed values throw InputError.
inline HyperParams hyper_from_json(const json& j, HyperParams h = {}) {
  try {
    auto get = [&j](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
    };
    get("latent_dim", h.latent_dim);
    get("hidden_node", h.hidden_node);
    get("hidden_attr", h.hidden_attr);
    get("hidden_disc", h.hidden_disc);
    get("alpha", h.alpha);
    get("beta", h.beta);
    get("tau", h.tau);
    get("learning_rate", h.learning_rate);
    get("epochs", h.epochs);
    get("seed", h.seed);
    get("self_loops", h.self_loops);
    if (j.contains("pos_weight")) h.pos_weight = pos_weight_from_string(j.at("pos_weight").get<std::string>());
  } catch (const json::exception& e) {
    throw InputError(std::string("bad hyperparameter value: ") + e.what());
  }
  return h;
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
  if (!out) throw InputError("write failed for " + path.string());
}

struct Checkpoint {
  HyperParams hyper;
  NetDims dims;
  ModelParams params;
};

inline json checkpoint_to_json(const Checkpoint& c) {
  json tensors = json::object();
  const auto ts = c.params.tensors();
  for (std::size_t k = 0; k < ts.size(); ++k) {
    tensors[ModelParams::kNames[k]] = {{"rows", ts[k]->rows()}, {"cols", ts[k]->cols()}, {"data", ts[k]->data()}};
  }
  return {{"format", "coembed-checkpoint"},
          {"version", 1},
          {"seed", c.hyper.seed},
          {"hyper", hyper_to_json(c.hyper)},
          {"dims", {{"n_nodes", c.dims.n_nodes}, {"n_attrs", c.dims.n_attrs}, {"n_classes", c.dims.n_classes}}},
          {"tensors", tensors}};
}

inline Checkpoint checkpoint_from_json(const json& j) {
  if (j.value("format", "") != "coembed-checkpoint") throw InputError("not a coembed checkpoint");
  if (j.value("version", 0) != 1) throw InputError("unsupported checkpoint version");
  Checkpoint c;
  try {
    c.hyper = hyper_from_json(j.at("hyper"));
    const json& d = j.at("dims");
    c.dims = {d.at("n_nodes").get<std::size_t>(), d.at("n_attrs").get<std::size_t>(),
              d.at("n_classes").get<std::size_t>()};
    auto ts = c.params.tensors();
    for (std::size_t k = 0; k < ts.size(); ++k) {
      const json& t = j.at("tensors").at(ModelParams::kNames[k]);
      *ts[k] = DenseMatrix(t.at("rows").get<std::size_t>(), t.at("cols").get<std::size_t>(),
                           t.at("data").get<std::vector<double>>());
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed checkpoint: ") + e.what());
  }
  c.params.check_shapes(c.dims, c.hyper);
  return c;
}

inline void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  write_text_file(path, checkpoint_to_json(c).dump(1) + "\n");
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) { return checkpoint_from_json(read_json_file(path)); }

namespace detail {

inline void write_gaussian_tsv(const std::filesystem::path& path, const DenseMatrix& mu, const DenseMatrix& logvar) {
  std::string s = "id";
  for (std::size_t d = 0; d < mu.cols(); ++d) s += "\tmu_" + std::to_string(d);
  for (std::size_t d = 0; d < logvar.cols(); ++d) s += "\tlogvar_" + std::to_string(d);
  s += "\n";
  for (std::size_t i = 0; i < mu.rows(); ++i) {
    s += std::to_string(i);
    for (double v : mu.row(i)) s += "\t" + format_real(v);
    for (double v : logvar.row(i)) s += "\t" + format_real(v);
    s += "\n";
  }
  write_text_file(path, s);
}

}  // namespace detail

// nodes.tsv, attrs.tsv and labels_pred.tsv in `dir`.
inline void write_embeddings(const std::filesystem::path& dir, const Inference& inf) {
  detail::write_gaussian_tsv(dir / "nodes.tsv", inf.node_mu, inf.node_logvar);
  detail::write_gaussian_tsv(dir / "attrs.tsv", inf.attr_mu, inf.attr_logvar);
  std::string s = "node\targmax_class\tprob\n";
  for (std::size_t i = 0; i < inf.pi.rows(); ++i) {
    const std::size_t k = argmax_row(inf.pi.row(i));
    s += std::to_string(i) + "\t" + std::to_string(k) + "\t" + format_real(inf.pi(i, k)) + "\n";
  }
  write_text_file(dir / "labels_pred.tsv", s);
}

// epoch (1-based) followed by every breakdown field.
inline std::string training_log_csv(const TrainHistory& h) {
  std::string s = "epoch";
  for (const char* name : ElboBreakdown::kFieldNames) s += std::string(",") + name;
  s += "\n";
  for (std::size_t e = 0; e < h.epochs.size(); ++e) {
    s += std::to_string(e + 1);
    for (double v : h.epochs[e].fields()) s += "," + format_real(v);
    s += "\n";
  }
  return s;
}

using Metrics = std::map<std::string, double>;

inline json metrics_to_json(const Metrics& m) {
  json j = json::object();
  for (const auto& [k, v] : m) j[k] = v;
  return j;
}

// Appends run_id,metric,value rows; writes the header when the file is new.
inline void append_results_csv(const std::filesystem::path& path, const std::string& run_id, const Metrics& m) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, std::ios::app | std::ios::binary);
  if (!out) throw InputError("cannot append to " + path.string());
  if (fresh) out << "run_id,metric,value\n";
  for (const auto& [k, v] : m) out << run_id << "," << k << "," << format_real(v) << "\n";
}

inline json sbm_to_json(const SbmConfig& c) {
  return {{"n_nodes", c.n_nodes},         {"n_communities", c.n_communities},
          {"p_intra", c.p_intra},         {"p_inter", c.p_inter},
          {"attrs_per_community", c.attrs_per_community}, {"p_attr_on", c.p_attr_on},
          {"p_attr_noise", c.p_attr_noise}, {"seed", c.seed}};
}

inline SbmConfig sbm_from_json(const json& j) {
  SbmConfig c;
  try {
    auto get = [&j](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
    };
    get("n_nodes", c.n_nodes);
    get("n_communities", c.n_communities);
    get("p_intra", c.p_intra);
    get("p_inter", c.p_inter);
    get("attrs_per_community", c.attrs_per_community);
    get("p_attr_on", c.p_attr_on);
    get("p_attr_noise", c.p_attr_noise);
    get("seed", c.seed);
  } catch (const json::exception& e) {
    throw InputError(std::string("bad SBM config value: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace coembed

#endif  // COEMBED_IO_HPP_
