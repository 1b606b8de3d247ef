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

// Command-line surface: run configuration, data preparation shared by all
// commands, and the train / eval / synth / gradcheck / sweep subcommands.
//
// A run is described by one flat JSON object (RunConfig). Every key can also
// be given as a flag of the same name, which overrides the file.

#ifndef COEMBED_CLI_HPP_
#define COEMBED_CLI_HPP_

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "coembed/errors.hpp"
#include "coembed/eval.hpp"
#include "coembed/graphdata.hpp"
#include "coembed/io.hpp"
#include "coembed/model.hpp"
#include "coembed/tape.hpp"
#include "coembed/trainer.hpp"

namespace coembed {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitVerifyFailed = 2;

struct RunConfig {
  HyperParams hyper;
  std::string edges;
  std::string attrs;
  std::string labels;  // optional
  std::string out = "out";
  std::string task = "attr";  // held-out pairs during training: attr, link or none
  SplitRatios split;
  double label_ratio = 0.1;
  std::string run_id = "run";
  std::size_t n_classes = 0;  // 0: infer from the labels file
  bool quiet = false;

  json to_json() const {
    json j = hyper_to_json(hyper);
    j["edges"] = edges;
    j["attrs"] = attrs;
    j["labels"] = labels;
    j["out"] = out;
    j["task"] = task;
    j["train_ratio"] = split.train;
    j["val_ratio"] = split.val;
    j["test_ratio"] = split.test;
    j["label_ratio"] = label_ratio;
    j["run_id"] = run_id;
    j["n_classes"] = n_classes;
    j["quiet"] = quiet;
    return j;
  }

  // Unknown keys are rejected so that typos do not silently fall back to
  // defaults.
  static RunConfig from_json(const json& j) {
    if (!j.is_object()) throw InputError("config must be a JSON object");
    const json known = RunConfig{}.to_json();
    for (const auto& [key, value] : j.items()) {
      if (!known.contains(key)) throw InputError("unknown config key '" + key + "'");
    }
    RunConfig c;
    c.hyper = hyper_from_json(j);
    try {
      auto get = [&j](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
      };
      get("edges", c.edges);
      get("attrs", c.attrs);
      get("labels", c.labels);
      get("out", c.out);
      get("task", c.task);
      get("train_ratio", c.split.train);
      get("val_ratio", c.split.val);
      get("test_ratio", c.split.test);
      get("label_ratio", c.label_ratio);
      get("run_id", c.run_id);
      get("n_classes", c.n_classes);
      get("quiet", c.quiet);
    } catch (const json::exception& e) {
      throw InputError(std::string("bad config value: ") + e.what());
    }
    if (c.task != "attr" && c.task != "link" && c.task != "none") {
      throw InputError("task must be attr, link or none, got '" + c.task + "'");
    }
    c.hyper.validate();
    return c;
  }
};

// Converts a flag string to the JSON type of `like`.
inline json coerce_flag(const std::string& key, const std::string& text, const json& like) {
  try {
    if (like.is_boolean()) {
      if (text == "true" || text == "1") return true;
      if (text == "false" || text == "0") return false;
      throw InputError("");
    }
    if (like.is_number_unsigned() || like.is_number_integer()) {
      std::size_t pos = 0;
      const unsigned long long v = std::stoull(text, &pos);
      if (pos != text.size() || text.front() == '-') throw InputError("");
      return v;
    }
    if (like.is_number_float()) {
      std::size_t pos = 0;
      const double v = std::stod(text, &pos);
      if (pos != text.size()) throw InputError("");
      return v;
    }
  } catch (const std::exception&) {
    throw InputError("flag --" + key + ": cannot parse '" + text + "'");
  }
  return text;
}

// Registers one string-valued flag per key of `defaults`.
class KeyFlags {
 public:
  KeyFlags(CLI::App& app, const json& defaults) : defaults_(defaults) {
    for (const auto& [key, value] : defaults_.items()) {
      opts_[key] = app.add_option("--" + key, values_[key], "config key '" + key + "'");
    }
  }

  // `base` with every given flag applied.
  json apply(json base) const {
    for (const auto& [key, opt] : opts_) {
      if (opt->count() > 0) base[key] = coerce_flag(key, values_.at(key), defaults_.at(key));
    }
    return base;
  }

 private:
  json defaults_;
  std::map<std::string, std::string> values_;
  std::map<std::string, CLI::Option*> opts_;
};

struct PreparedRun {
  AttributedNetwork full;       // as loaded
  AttributedNetwork train_net;  // held-out pairs removed
  LabelMask mask;
  std::optional<HoldoutSplit> split;
};

// The label mask uses `seed`, the holdout split `seed + 1`, so one seed
// fixes the whole run.
inline PreparedRun prepare_run(AttributedNetwork full, const RunConfig& cfg) {
  PreparedRun r;
  r.mask = sample_label_mask(full, cfg.label_ratio, cfg.hyper.seed);
  if (cfg.task == "attr" || cfg.task == "link") {
    const PairKind kind = cfg.task == "attr" ? PairKind::kAttribute : PairKind::kEdge;
    r.split = split_pairs(full, kind, cfg.split, cfg.hyper.seed + 1);
    r.train_net = remove_heldout(full, *r.split);
  } else {
    r.train_net = full;
  }
  r.full = std::move(full);
  return r;
}

inline AttributedNetwork load_config_network(const RunConfig& cfg, std::ostream& warn) {
  if (cfg.edges.empty() || cfg.attrs.empty()) throw InputError("config needs 'edges' and 'attrs' paths");
  LoadOptions opt;
  opt.n_classes = cfg.n_classes;
  opt.warnings = &warn;
  return load_network(NetworkPaths{cfg.edges, cfg.attrs, cfg.labels}, opt);
}

inline TrainResult run_training(const PreparedRun& run, const RunConfig& cfg, std::ostream* progress) {
  TrainOptions opt;
  if (run.split) opt.validation = &*run.split;
  if (progress != nullptr) {
    opt.on_epoch = [progress, &cfg](std::size_t epoch, const ElboBreakdown& b, double secs) {
      *progress << "epoch " << epoch + 1 << "/" << cfg.hyper.epochs << " total_J=" << format_real(b.total_J)
                << " seconds=" << secs << "\n";
    };
  }
  return train(run.train_net, run.mask, cfg.hyper, opt);
}

// task: class, attr or link. attr and link need a run trained with that
// task's pairs held out.
inline Metrics evaluate_task(const std::string& task, const ModelParams& params, const PreparedRun& run,
                             const RunConfig& cfg) {
  Metrics m;
  if (task == "class") {
    const NodeClassificationResult r = eval_node_classification(params, run.train_net, run.mask, cfg.hyper);
    m["dis_accuracy"] = r.dis.accuracy;
    m["dis_macro_f1"] = r.dis.macro_f1;
    m["dis_micro_f1"] = r.dis.micro_f1;
    m["linear_accuracy"] = r.linear.accuracy;
    m["linear_macro_f1"] = r.linear.macro_f1;
    m["linear_micro_f1"] = r.linear.micro_f1;
    return m;
  }
  if (task != "attr" && task != "link") throw InputError("eval task must be class, attr or link");
  if (cfg.task != task) {
    throw InputError("eval " + task + " needs a run trained with task=" + task + " (config has task=" + cfg.task + ")");
  }
  const RankingResult r = task == "attr"
                              ? eval_attribute_inference(params, run.train_net, run.mask, cfg.hyper, *run.split)
                              : eval_link_scoring(params, run.train_net, run.mask, cfg.hyper, *run.split);
  m[task + "_auc"] = r.auc;
  m[task + "_ap"] = r.ap;
  return m;
}

namespace detail {

struct ConfigSource {
  json resolved;
  std::optional<std::string> raw;  // verbatim file contents
};

inline ConfigSource resolve_config(const std::string& config_path, const KeyFlags& flags) {
  ConfigSource src;
  json base = json::object();
  if (!config_path.empty()) {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) throw InputError("cannot open config " + config_path);
    std::ostringstream ss;
    ss << in.rdbuf();
    src.raw = ss.str();
    try {
      base = json::parse(*src.raw);
    } catch (const json::parse_error& e) {
      throw InputError(config_path + ": " + e.what());
    }
  }
  src.resolved = flags.apply(base);
  return src;
}

inline void record_config(const std::filesystem::path& dir, const ConfigSource& src, const RunConfig& cfg) {
  if (src.raw) write_text_file(dir / "config.json", *src.raw);
  write_text_file(dir / "resolved_config.json", cfg.to_json().dump(2) + "\n");
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != ' ') {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace detail

// Output of one sweep point: a CSV row keyed by run id.
struct SweepPoint {
  std::string param;
  std::string value;
  std::uint64_t seed = 0;
  std::string run_id;
  Metrics metrics;
};

inline RunConfig with_sweep_value(RunConfig cfg, const std::string& param, const std::string& value) {
  json j = cfg.to_json();
  if (param != "beta" && param != "alpha" && param != "tau") throw InputError("sweep param must be beta, alpha or tau");
  j[param] = coerce_flag(param, value, j.at(param));
  return RunConfig::from_json(j);
}

// Trains once per task in `tasks` and collects ranking metrics plus the
// discriminator accuracy of the first run.
inline SweepPoint run_sweep_point(const AttributedNetwork& full, RunConfig cfg, const std::string& param,
                                  const std::string& value, std::uint64_t seed, const std::vector<std::string>& tasks) {
  cfg = with_sweep_value(cfg, param, value);
  cfg.hyper.seed = seed;
  SweepPoint p{param, value, seed, cfg.run_id + "_" + param + "=" + value + "_seed" + std::to_string(seed), {}};
  bool have_class = false;
  for (const std::string& task : tasks) {
    RunConfig c = cfg;
    c.task = task;
    const PreparedRun run = prepare_run(full, c);
    const TrainResult tr = run_training(run, c, nullptr);
    for (const auto& [k, v] : evaluate_task(task, tr.params, run, c)) p.metrics[k] = v;
    if (!have_class && !run.mask.labelled().empty()) {
      p.metrics["dis_accuracy"] = evaluate_task("class", tr.params, run, c).at("dis_accuracy");
      have_class = true;
    }
    p.metrics[task + "_final_total_J"] = tr.history.epochs.back().total_J;
  }
  return p;
}

inline std::string sweep_csv(const std::vector<SweepPoint>& points) {
  std::string s = "param,value,seed,run_id";
  if (points.empty()) return s + "\n";
  for (const auto& [k, v] : points.front().metrics) s += "," + k;
  s += "\n";
  for (const auto& p : points) {
    s += p.param + "," + p.value + "," + std::to_string(p.seed) + "," + p.run_id;
    for (const auto& [k, v] : p.metrics) s += "," + format_real(v);
    s += "\n";
  }
  return s;
}

namespace detail {

inline std::string serialize_point(const SweepPoint& p) {
  json j = {{"param", p.param}, {"value", p.value}, {"seed", p.seed}, {"run_id", p.run_id},
            {"metrics", metrics_to_json(p.metrics)}};
  return j.dump();
}

inline SweepPoint deserialize_point(const std::string& s) {
  const json j = json::parse(s);
  SweepPoint p{j.at("param"), j.at("value"), j.at("seed"), j.at("run_id"), {}};
  for (const auto& [k, v] : j.at("metrics").items()) p.metrics[k] = v.get<double>();
  return p;
}

// Runs `n` jobs in at most `jobs` child processes; job i writes its result
// to files[i].
template <typename Job>
void run_forked(std::size_t n, std::size_t jobs, const std::vector<std::filesystem::path>& files, Job&& job) {
  std::size_t next = 0, running = 0;
  bool failed = false;
  while (next < n || running > 0) {
    while (running < jobs && next < n) {
      std::cout.flush();
      std::cerr.flush();
      const pid_t pid = fork();
      if (pid < 0) throw std::runtime_error("fork failed");
      if (pid == 0) {
        int code = 0;
        try {
          write_text_file(files[next], job(next));
        } catch (const std::exception& e) {
          std::cerr << "error: " << e.what() << "\n";
          code = 1;
        }
        std::cerr.flush();
        _exit(code);
      }
      ++next;
      ++running;
    }
    int status = 0;
    if (wait(&status) > 0) {
      --running;
      if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) failed = true;
    }
  }
  if (failed) throw std::runtime_error("a sweep worker failed");
}

}  // namespace detail

inline int cmd_train(const RunConfig& cfg, const detail::ConfigSource& src, std::ostream& out, std::ostream& err) {
  const std::filesystem::path dir = cfg.out;
  const PreparedRun run = prepare_run(load_config_network(cfg, err), cfg);
  std::filesystem::create_directories(dir);
  const TrainResult tr = run_training(run, cfg, cfg.quiet ? nullptr : &out);
  record_config(dir, src, cfg);
  save_checkpoint(dir / "checkpoint.json", {cfg.hyper, NetDims::of(run.train_net), tr.params});
  write_text_file(dir / "training_log.csv", training_log_csv(tr.history));
  const ModelInputs in = ModelInputs::build(run.train_net, cfg.hyper.self_loops);
  write_embeddings(dir, infer(tr.params, in, run.train_net, run.mask));
  out << "trained " << tr.history.epochs.size() << " epochs, best epoch " << tr.history.best_epoch + 1
      << ", wrote " << dir.string() << "\n";
  return kExitOk;
}

inline int cmd_eval(const std::string& task, const RunConfig& cfg, const std::string& checkpoint, std::ostream& out,
                    std::ostream& err) {
  const std::filesystem::path dir = cfg.out;
  const Checkpoint ck = load_checkpoint(checkpoint.empty() ? dir / "checkpoint.json" : std::filesystem::path(checkpoint));
  RunConfig c = cfg;
  c.hyper = ck.hyper;
  const PreparedRun run = prepare_run(load_config_network(c, err), c);
  if (!(NetDims::of(run.train_net) == ck.dims)) throw InputError("checkpoint dimensions do not match the data");
  const Metrics m = evaluate_task(task, ck.params, run, c);
  std::filesystem::create_directories(dir);
  write_text_file(dir / ("metrics_" + task + ".json"), metrics_to_json(m).dump(2) + "\n");
  append_results_csv(dir / "results.csv", c.run_id, m);
  out << metrics_to_json(m).dump(2) << "\n";
  return kExitOk;
}

inline int cmd_synth(const SbmConfig& sbm, const std::filesystem::path& dir, std::ostream& out) {
  std::filesystem::create_directories(dir);
  const AttributedNetwork net = generate_sbm(sbm);
  save_network(net, NetworkPaths{dir / "edges.tsv", dir / "attrs.tsv", dir / "labels.tsv"});
  write_text_file(dir / "meta.json", sbm_to_json(sbm).dump(2) + "\n");
  out << "wrote " << net.n_nodes << " nodes, " << net.adjacency.nnz() / 2 << " edges, " << net.n_attrs
      << " attributes to " << dir.string() << "\n";
  return kExitOk;
}

inline int cmd_gradcheck(std::size_t trials, std::uint64_t seed, const std::string& mutate, double fault_scale,
                         std::ostream& out) {
  const Fixture fx = gradcheck_fixture();
  GradCheckOptions opt;
  opt.trials = trials;
  opt.seed = seed;
  if (!mutate.empty()) {
    opt.fault = ad::op_from_name(mutate);
    if (!opt.fault) throw InputError("unknown op '" + mutate + "' for --mutate");
    opt.fault_scale = fault_scale;
  }
  const GradCheckResult r = grad_check(fx.net, fx.mask, gradcheck_hyper(), opt);
  const bool pass = r.max_rel_error <= 1e-5;
  out << "max relative error " << r.max_rel_error << " over " << trials << " parameter points (" << r.seconds
      << " s): " << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? kExitOk : kExitVerifyFailed;
}

inline int cmd_sweep(const RunConfig& cfg, const detail::ConfigSource& src, const std::string& param,
                     const std::vector<std::string>& values, const std::vector<std::uint64_t>& seeds,
                     const std::vector<std::string>& tasks, std::size_t jobs, std::ostream& out, std::ostream& err) {
  if (values.empty()) throw InputError("sweep needs at least one value");
  for (const auto& t : tasks)
    if (t != "attr" && t != "link") throw InputError("sweep tasks must be attr or link");
  const std::filesystem::path dir = cfg.out;
  const AttributedNetwork full = load_config_network(cfg, err);
  std::filesystem::create_directories(dir);
  for (const auto& v : values) (void)with_sweep_value(cfg, param, v);

  struct Job {
    std::string value;
    std::uint64_t seed;
  };
  std::vector<Job> grid;
  for (const auto& v : values)
    for (std::uint64_t s : seeds) grid.push_back({v, s});
  std::vector<SweepPoint> points;
  auto compute = [&](std::size_t i) { return run_sweep_point(full, cfg, param, grid[i].value, grid[i].seed, tasks); };
  if (jobs <= 1) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      points.push_back(compute(i));
      if (!cfg.quiet) out << points.back().run_id << " done\n";
    }
  } else {
    const std::filesystem::path tmp = dir / ".sweep_parts";
    std::filesystem::create_directories(tmp);
    std::vector<std::filesystem::path> files;
    for (std::size_t i = 0; i < grid.size(); ++i) files.push_back(tmp / (std::to_string(i) + ".json"));
    detail::run_forked(grid.size(), jobs, files, [&](std::size_t i) { return detail::serialize_point(compute(i)); });
    for (const auto& f : files) {
      std::ifstream in(f);
      std::ostringstream ss;
      ss << in.rdbuf();
      points.push_back(detail::deserialize_point(ss.str()));
    }
    std::filesystem::remove_all(tmp);
  }
  record_config(dir, src, cfg);
  write_text_file(dir / "sweep.csv", sweep_csv(points));
  for (const auto& p : points) append_results_csv(dir / "results.csv", p.run_id, p.metrics);
  out << "wrote " << points.size() << " rows to " << (dir / "sweep.csv").string() << "\n";
  return kExitOk;
}

// Entry point; argv[0] is the program name.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Semi-supervised co-embedding of attributed networks"};
  app.require_subcommand(1);

  const json run_defaults = RunConfig{}.to_json();
  std::string train_config, eval_config, sweep_config;

  CLI::App* train = app.add_subcommand("train", "train a model and export embeddings");
  train->add_option("--config", train_config, "JSON run configuration");
  KeyFlags train_flags(*train, run_defaults);

  CLI::App* eval = app.add_subcommand("eval", "evaluate a trained checkpoint");
  std::string eval_task, checkpoint;
  eval->add_option("which", eval_task, "class, attr or link")->required()->check(CLI::IsMember({"class", "attr", "link"}));
  eval->add_option("--config", eval_config, "JSON run configuration");
  eval->add_option("--checkpoint", checkpoint, "checkpoint path (default <out>/checkpoint.json)");
  KeyFlags eval_flags(*eval, run_defaults);

  CLI::App* synth = app.add_subcommand("synth", "generate a stochastic block model network");
  std::string sbm_path, synth_out = "data";
  synth->add_option("--sbm", sbm_path, "JSON SBM configuration");
  synth->add_option("--out", synth_out, "output directory");
  KeyFlags synth_flags(*synth, sbm_to_json(SbmConfig{}));

  CLI::App* gradcheck = app.add_subcommand("gradcheck", "compare backprop with finite differences");
  std::size_t trials = 20;
  std::uint64_t gc_seed = 0;
  std::string mutate;
  double fault_scale = 1.5;
  gradcheck->add_option("--trials", trials, "random parameter points");
  gradcheck->add_option("--seed", gc_seed, "seed for parameter points and noise");
  gradcheck->add_option("--mutate", mutate, "corrupt the backward rule of this op (e.g. tanh)");
  gradcheck->add_option("--fault_scale", fault_scale, "gradient multiplier used by --mutate");

  CLI::App* sweep = app.add_subcommand("sweep", "train and evaluate over a list of values of one hyperparameter");
  std::string param = "beta", values, seeds_text, tasks_text = "attr";
  std::size_t jobs = 1;
  sweep->add_option("--config", sweep_config, "JSON run configuration");
  sweep->add_option("--param", param, "beta, alpha or tau")->check(CLI::IsMember({"beta", "alpha", "tau"}));
  sweep->add_option("--values", values, "comma-separated values")->required();
  sweep->add_option("--seeds", seeds_text, "comma-separated seeds (default: the config seed)");
  sweep->add_option("--tasks", tasks_text, "comma-separated tasks among attr, link");
  sweep->add_option("--jobs", jobs, "worker processes");
  KeyFlags sweep_flags(*sweep, run_defaults);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*train) {
      const auto src = detail::resolve_config(train_config, train_flags);
      return cmd_train(RunConfig::from_json(src.resolved), src, out, err);
    }
    if (*eval) {
      const auto src = detail::resolve_config(eval_config, eval_flags);
      return cmd_eval(eval_task, RunConfig::from_json(src.resolved), checkpoint, out, err);
    }
    if (*synth) {
      const auto src = detail::resolve_config(sbm_path, synth_flags);
      return cmd_synth(sbm_from_json(src.resolved), synth_out, out);
    }
    if (*gradcheck) return cmd_gradcheck(trials, gc_seed, mutate, fault_scale, out);
    if (*sweep) {
      const auto src = detail::resolve_config(sweep_config, sweep_flags);
      const RunConfig cfg = RunConfig::from_json(src.resolved);
      std::vector<std::uint64_t> seeds;
      for (const auto& s : detail::split_list(seeds_text)) seeds.push_back(coerce_flag("seeds", s, json(0u)).get<std::uint64_t>());
      if (seeds.empty()) seeds.push_back(cfg.hyper.seed);
      return cmd_sweep(cfg, src, param, detail::split_list(values), seeds, detail::split_list(tasks_text), jobs, out,
                       err);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace coembed

#endif  // COEMBED_CLI_HPP_
