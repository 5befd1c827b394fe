// Copyright 2026 The nbprune Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "nbprune/bench.hpp"
#include "nbprune/dataset.hpp"
#include "nbprune/errors.hpp"
#include "nbprune/pipeline.hpp"
#include "nbprune/selectors.hpp"
#include "nbprune/similarity.hpp"
#include "nbprune/synthetic.hpp"
#include "nbprune/verify.hpp"

namespace nbprune::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

std::string fnv1a64_hex(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open file: " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write file: " + path.string());
  out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

class Manifest {
 public:
  explicit Manifest(std::string command) { doc_["command"] = std::move(command); }

  void input(const std::string& flag, const std::optional<std::string>& path) {
    if (!path) return;
    doc_["inputs"].push_back(
        {{"flag", flag}, {"path", *path}, {"fnv1a64", fnv1a64_hex(*path)}});
  }
  void output(const fs::path& path) { doc_["outputs"].push_back(path.string()); }
  json& operator[](const char* key) { return doc_[key]; }

  void write(const fs::path& path) {
    doc_["tool_version"] = kToolVersion;
    if (!doc_.contains("inputs")) doc_["inputs"] = json::array();
    output(path);
    write_json(path, doc_);
  }

 private:
  json doc_;
};

std::vector<std::size_t> parse_size_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &pos);
    } catch (const std::exception&) {
      throw ArgumentError("--m-list: not an integer: '" + item + "'");
    }
    if (pos != item.size() || v == 0) {
      throw ArgumentError("--m-list: not a positive integer: '" + item + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw ArgumentError("--m-list is empty");
  return out;
}

std::vector<std::string> split_names(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// ---------------------------------------------------------------- prune

struct PruneArgs {
  std::string embeddings;
  std::string method;
  std::optional<std::size_t> size;
  std::optional<double> ratio;
  std::optional<std::string> probs;
  std::optional<std::string> labels;
  std::optional<std::string> true_labels;
  std::optional<std::string> scores;
  std::optional<std::string> confidence;
  std::string confidence_metric = "max_prob";
  std::optional<std::uint32_t> num_classes;
  std::optional<double> tau;
  std::optional<std::string> preset;
  std::string utility = "tanh";
  std::string gain_mode = "paper";
  bool no_lazy = false;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::string out = ".";
  std::optional<std::string> graph_cache;
  std::uint64_t max_edges = GraphBuildOptions{}.max_edges;
};

void add_prune(CLI::App& app, PruneArgs& a) {
  auto* cmd = app.add_subcommand("prune", "Select a subset and write indices/report");
  cmd->add_option("--embeddings", a.embeddings, "Embedding matrix (.bin or .csv)")->required();
  cmd->add_option("--method", a.method, "Selection method")->required();
  auto* size = cmd->add_option("--size", a.size, "Subset size");
  auto* ratio = cmd->add_option("--ratio", a.ratio, "Subset ratio in (0, 1]");
  size->excludes(ratio);
  cmd->add_option("--probs", a.probs, "Class probabilities (.bin or .csv)");
  cmd->add_option("--labels", a.labels, "Noisy labels, one per line");
  cmd->add_option("--true-labels", a.true_labels, "Ground-truth labels for noise_ratio");
  cmd->add_option("--scores", a.scores, "Per-example scores, one per line");
  cmd->add_option("--confidence", a.confidence, "External confidences, one per line");
  cmd->add_option("--confidence-metric", a.confidence_metric,
                  "max_prob | diff_prob | external");
  cmd->add_option("--num-classes", a.num_classes, "Number of classes");
  auto* tau = cmd->add_option("--tau", a.tau, "Cosine neighborhood threshold");
  cmd->add_option("--preset", a.preset, "cifar10n | cifar100n | clothing1m")->excludes(tau);
  cmd->add_option("--utility", a.utility, "tanh | identity | log1p");
  cmd->add_option("--gain-mode", a.gain_mode, "paper | exact");
  cmd->add_flag("--no-lazy", a.no_lazy, "Use the full-scan greedy loop");
  cmd->add_option("--seed", a.seed, "Random seed");
  cmd->add_option("--threads", a.threads, "Worker threads");
  cmd->add_option("--out", a.out, "Output directory");
  cmd->add_option("--graph-cache", a.graph_cache, "Neighbor graph cache file");
  cmd->add_option("--max-edges", a.max_edges, "Abort when the graph would exceed this many edges");
}

std::uint32_t infer_num_classes(const PruneArgs& a, const PruneInputs& in) {
  if (a.num_classes) return *a.num_classes;
  if (in.probabilities) return static_cast<std::uint32_t>(in.probabilities->cols());
  std::uint32_t c = 0;
  if (in.noisy_labels) {
    for (Label y : *in.noisy_labels) c = std::max(c, y + 1);
  }
  if (in.true_labels) {
    for (Label y : *in.true_labels) c = std::max(c, y + 1);
  }
  return c;
}

int cmd_prune(const PruneArgs& a, std::ostream& out) {
  const auto run_start = Clock::now();
  SelectorConfig config;
  config.method = parse_method(a.method);
  if (!a.size && !a.ratio) throw ArgumentError("one of --size or --ratio is required");
  config.budget = a.size ? Budget::count(*a.size) : Budget::ratio(*a.ratio);
  if (a.tau) config.tau = *a.tau;
  if (a.preset) config.tau = preset_tau(*a.preset);
  config.utility = Utility::parse(a.utility);
  config.gain_mode = parse_gain_mode(a.gain_mode);
  config.lazy = !a.no_lazy;
  config.seed = a.seed;
  config.threads = std::max<std::size_t>(1, a.threads);
  const ConfidenceMetric metric = parse_confidence_metric(a.confidence_metric);

  // Flag requirements are checked before any file is read.
  const Method method = config.method;
  const bool greedy = uses_neighbor_graph(method);
  if (greedy && !config.tau) {
    throw ArgumentError("--tau (or --preset) is required for " + a.method);
  }
  if (greedy) {
    if (metric == ConfidenceMetric::kExternal && !a.confidence) {
      throw ArgumentError("--confidence is required with --confidence-metric external");
    }
    if (metric != ConfidenceMetric::kExternal && !a.probs) {
      throw ArgumentError("--probs is required to derive confidences for " + a.method);
    }
  }
  if ((method == Method::kPrune4RelBalanced || method == Method::kModerate) && !a.labels) {
    throw ArgumentError("--labels is required for " + a.method);
  }
  if (method == Method::kMargin && !a.probs) {
    throw ArgumentError("--probs is required for margin");
  }
  if (method == Method::kSmallLoss && !a.scores && !(a.probs && a.labels)) {
    throw ArgumentError("small_loss needs --scores or both --probs and --labels");
  }
  if ((method == Method::kForgetting || method == Method::kGrand ||
       method == Method::kSsp) &&
      !a.scores) {
    throw ArgumentError("--scores is required for " + a.method);
  }

  PruneInputs in;
  in.embeddings = load_embeddings(a.embeddings, format_for_path(a.embeddings));
  const std::size_t m = in.embeddings.rows();
  auto check_len = [m](std::size_t n, const std::string& what) {
    if (n != m) {
      throw FormatError(what + " has " + std::to_string(n) + " entries, expected " +
                        std::to_string(m));
    }
  };
  if (a.probs) {
    in.probabilities = load_matrix(*a.probs, format_for_path(*a.probs));
    check_len(in.probabilities->rows(), *a.probs);
    validate_probabilities(*in.probabilities);
  }
  if (a.labels) {
    in.noisy_labels = load_labels(*a.labels);
    check_len(in.noisy_labels->size(), *a.labels);
  }
  if (a.true_labels) {
    in.true_labels = load_labels(*a.true_labels);
    check_len(in.true_labels->size(), *a.true_labels);
  }
  in.num_classes = infer_num_classes(a, in);
  if (in.noisy_labels) {
    for (Label y : *in.noisy_labels) {
      if (y >= in.num_classes) throw FormatError(*a.labels + ": label out of range");
    }
  }
  if (a.confidence) {
    in.confidence = external_confidence(load_reals(*a.confidence), m);
  } else if (in.probabilities) {
    in.confidence = compute_confidence(*in.probabilities, metric);
  }
  if (a.scores) {
    AuxScores scores;
    scores.values = load_reals(*a.scores);
    check_len(scores.values.size(), *a.scores);
    switch (method) {
      case Method::kForgetting: scores.kind = ScoreKind::kForgettingEvents; break;
      case Method::kGrand: scores.kind = ScoreKind::kGradNorm; break;
      case Method::kSsp: scores.kind = ScoreKind::kSspPrototypicality; break;
      default: scores.kind = ScoreKind::kLoss; break;
    }
    in.scores = std::move(scores);
  } else if (method == Method::kSmallLoss) {
    in.scores = compute_small_loss_scores(*in.probabilities, *in.noisy_labels);
  }

  GraphBuildOptions graph_options;
  graph_options.threads = config.threads;
  graph_options.max_edges = a.max_edges;
  std::optional<NeighborGraph> cached;
  double cache_load_s = 0.0;
  if (a.graph_cache && config.tau && fs::exists(*a.graph_cache)) {
    const auto start = Clock::now();
    cached = load_graph(*a.graph_cache);
    cache_load_s = std::chrono::duration<double>(Clock::now() - start).count();
    if (cached->size() != m || cached->tau() != *config.tau) {
      throw FormatError(*a.graph_cache + ": cached graph does not match m/tau");
    }
    in.graph = &*cached;
  } else if (a.graph_cache && config.tau) {
    const auto start = Clock::now();
    cached = build_graph(in.embeddings, *config.tau, graph_options);
    cache_load_s = std::chrono::duration<double>(Clock::now() - start).count();
    save_graph(*a.graph_cache, *cached);
    in.graph = &*cached;
  }

  PruneReport report = run_prune(in, config, graph_options);
  if (cached) report.timings.graph_build_s = cache_load_s;

  const fs::path dir(a.out);
  fs::create_directories(dir);
  const fs::path selected_path = dir / "selected.txt";
  const fs::path report_path = dir / "report.json";
  save_indices(selected_path, report.selected);
  write_json(report_path, report_to_json(report));

  Manifest manifest("prune");
  manifest["config"] = config_to_json(config);
  manifest.input("--embeddings", a.embeddings);
  manifest.input("--probs", a.probs);
  manifest.input("--labels", a.labels);
  manifest.input("--true-labels", a.true_labels);
  manifest.input("--scores", a.scores);
  manifest.input("--confidence", a.confidence);
  manifest.output(selected_path);
  manifest.output(report_path);
  manifest["timings"] = {
      {"graph_build_s", report.timings.graph_build_s},
      {"selection_s", report.timings.selection_s},
      {"total_s", std::chrono::duration<double>(Clock::now() - run_start).count()}};
  manifest.write(dir / "manifest.json");
  out << "selected " << report.selected.size() << " of " << m << " -> "
      << selected_path.string() << "\n";
  return kExitOk;
}

// ----------------------------------------------------------------- eval

struct EvalArgs {
  std::string selected;
  std::string noisy_labels;
  std::optional<std::string> true_labels;
  std::optional<std::uint32_t> num_classes;
  std::optional<std::string> out;
};

void add_eval(CLI::App& app, EvalArgs& a) {
  auto* cmd = app.add_subcommand("eval", "Summarize a selected subset");
  cmd->add_option("--selected", a.selected, "Selected indices file")->required();
  cmd->add_option("--noisy-labels", a.noisy_labels, "Noisy labels file")->required();
  cmd->add_option("--true-labels", a.true_labels, "Ground-truth labels file");
  cmd->add_option("--num-classes", a.num_classes, "Number of classes");
  cmd->add_option("--out", a.out, "Write the JSON summary here instead of stdout");
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const IndexList selected = load_indices(a.selected);
  const auto noisy = load_labels(a.noisy_labels);
  std::optional<std::vector<Label>> truth;
  if (a.true_labels) {
    truth = load_labels(*a.true_labels);
    if (truth->size() != noisy.size()) {
      throw FormatError(*a.true_labels + ": length does not match noisy labels");
    }
  }
  for (std::uint32_t i : selected) {
    if (i >= noisy.size()) {
      throw FormatError(a.selected + ": index " + std::to_string(i) + " out of range");
    }
  }
  std::uint32_t c = 0;
  if (a.num_classes) {
    c = *a.num_classes;
  } else {
    for (Label y : noisy) c = std::max(c, y + 1);
    if (truth) for (Label y : *truth) c = std::max(c, y + 1);
  }
  json j;
  j["selected_count"] = selected.size();
  j["per_class_counts"] = per_class_counts(selected, noisy, c);
  j["noise_ratio"] = truth ? json(noise_ratio(selected, noisy, *truth)) : json(nullptr);
  if (a.out) {
    write_json(*a.out, j);
  } else {
    out << j.dump(2) << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  SynthConfig config;
  std::string noise_model = "asymmetric";
  std::string out = ".";
};

void add_synth(CLI::App& app, SynthArgs& a) {
  auto* cmd = app.add_subcommand("synth", "Generate a synthetic noisy dataset");
  cmd->add_option("--classes", a.config.num_classes, "Number of classes");
  cmd->add_option("--per-class", a.config.points_per_class, "Examples per class");
  cmd->add_option("--dim", a.config.embedding_dim, "Embedding dimension");
  cmd->add_option("--concentration", a.config.within_class_concentration,
                  "Within-class concentration");
  cmd->add_option("--separation", a.config.between_class_separation,
                  "Between-class separation");
  cmd->add_option("--noise", a.config.noise_rate, "Label noise rate in [0, 1)");
  cmd->add_option("--noise-model", a.noise_model, "asymmetric | symmetric");
  cmd->add_option("--seed", a.config.seed, "Random seed");
  cmd->add_option("--out", a.out, "Output directory");
}

int cmd_synth(SynthArgs a, std::ostream& out) {
  a.config.noise_model = parse_noise_model(a.noise_model);
  const SyntheticData data = generate_synthetic(a.config);
  const fs::path dir(a.out);
  fs::create_directories(dir);
  Manifest manifest("synth");
  manifest["config"] = {{"classes", a.config.num_classes},
                        {"per_class", a.config.points_per_class},
                        {"dim", a.config.embedding_dim},
                        {"concentration", a.config.within_class_concentration},
                        {"separation", a.config.between_class_separation},
                        {"noise", a.config.noise_rate},
                        {"noise_model", to_string(a.config.noise_model)},
                        {"seed", a.config.seed}};
  const fs::path emb = dir / "embeddings.bin";
  const fs::path probs = dir / "probs.bin";
  const fs::path noisy = dir / "noisy_labels.txt";
  const fs::path truth = dir / "true_labels.txt";
  const fs::path conf = dir / "confidence.txt";
  save_matrix(emb, data.dataset.embeddings, MatrixFormat::kBinary);
  save_matrix(probs, *data.dataset.probabilities, MatrixFormat::kBinary);
  save_labels(noisy, data.dataset.noisy_labels);
  save_labels(truth, *data.dataset.ground_truth_labels);
  save_reals(conf, data.confidence);
  for (const auto& p : {emb, probs, noisy, truth, conf}) manifest.output(p);
  std::size_t flips = 0;
  for (std::size_t i = 0; i < data.dataset.size(); ++i) {
    flips += data.dataset.noisy_labels[i] != (*data.dataset.ground_truth_labels)[i];
  }
  manifest["flipped"] = flips;
  manifest.write(dir / "manifest.json");
  out << "wrote " << data.dataset.size() << " examples (" << flips << " flipped) to "
      << dir.string() << "\n";
  return kExitOk;
}

// --------------------------------------------------------------- verify

struct VerifyArgs {
  std::string preset = "exhaustive";
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  bool relabel_study = false;
  std::optional<std::string> out;
};

void add_verify(CLI::App& app, VerifyArgs& a) {
  auto* cmd = app.add_subcommand("verify", "Run the property-based verification suite");
  cmd->add_option("--preset", a.preset, "exhaustive | quick");
  cmd->add_option("--seed", a.seed, "Random seed");
  cmd->add_option("--threads", a.threads, "Worker threads");
  cmd->add_flag("--relabel-study", a.relabel_study,
                "Also run the neighborhood-confidence vs re-labeling correlation study");
  cmd->add_option("--out", a.out, "Directory for JSON/CSV results");
}

int cmd_verify(const VerifyArgs& a, std::ostream& out) {
  const VerifyPlan plan = verify_plan(a.preset);
  const auto outcomes = run_verification(plan, a.seed, std::max<std::size_t>(1, a.threads));
  bool ok = true;
  json summary = json::array();
  for (const auto& o : outcomes) {
    ok = ok && o.passed();
    out << (o.passed() ? "PASS " : "FAIL ") << o.name << " trials=" << o.trials
        << " violations=" << o.violations << " worst_slack=" << o.worst_slack << "\n";
    summary.push_back({{"name", o.name},
                       {"trials", o.trials},
                       {"violations", o.violations},
                       {"worst_slack", o.worst_slack}});
  }
  std::optional<RelabelStudy> study;
  if (a.relabel_study) {
    RelabelStudyConfig cfg;
    cfg.synth.seed = a.seed;
    cfg.synth.points_per_class = 500;
    cfg.threads = std::max<std::size_t>(1, a.threads);
    study = run_relabel_study(cfg);
    out << "relabel study spearman=" << study->report.spearman << "\n";
  }
  if (a.out) {
    const fs::path dir(*a.out);
    fs::create_directories(dir);
    Manifest manifest("verify");
    manifest["config"] = {{"preset", a.preset}, {"seed", a.seed}};
    write_json(dir / "verify.json", {{"properties", summary}, {"passed", ok}});
    manifest.output(dir / "verify.json");
    if (study) {
      write_text(dir / "correlation.csv", correlation_csv(study->report));
      json cj = correlation_json(study->report);
      cj["mean_nbr_conf_corrected"] = study->mean_nbr_conf_corrected;
      cj["mean_nbr_conf_uncorrected"] = study->mean_nbr_conf_uncorrected;
      write_json(dir / "correlation.json", cj);
      manifest.output(dir / "correlation.csv");
      manifest.output(dir / "correlation.json");
    }
    manifest.write(dir / "manifest.json");
  }
  return ok ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
  std::string m_list = "1000,2000,4000";
  std::uint32_t dim = 32;
  std::size_t repeat = 1;
  double ratio = 0.5;
  double tau = 0.975;
  std::string methods = "prune4rel,prune4rel_lazy,kcenter_greedy";
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::optional<std::string> out;
};

void add_bench(CLI::App& app, BenchArgs& a) {
  auto* cmd = app.add_subcommand("bench", "Time selection methods across dataset sizes");
  cmd->add_option("--m-list", a.m_list, "Comma-separated dataset sizes");
  cmd->add_option("--d", a.dim, "Embedding dimension");
  cmd->add_option("--repeat", a.repeat, "Repetitions per point (minimum is reported)");
  cmd->add_option("--ratio", a.ratio, "Selection ratio");
  cmd->add_option("--tau", a.tau, "Neighborhood threshold");
  cmd->add_option("--methods", a.methods, "Comma-separated methods");
  cmd->add_option("--seed", a.seed, "Random seed");
  cmd->add_option("--threads", a.threads, "Worker threads");
  cmd->add_option("--out", a.out, "Write CSV here instead of stdout");
}

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  BenchConfig cfg;
  cfg.m_list = parse_size_list(a.m_list);
  cfg.dim = a.dim;
  cfg.repeat = a.repeat;
  cfg.ratio = a.ratio;
  cfg.tau = a.tau;
  cfg.methods = split_names(a.methods);
  cfg.seed = a.seed;
  cfg.threads = std::max<std::size_t>(1, a.threads);
  const std::string csv = bench_csv(run_benchmark(cfg));
  if (a.out) {
    write_text(*a.out, csv);
  } else {
    out << csv;
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"nbprune: neighborhood-confidence data pruning"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);
  PruneArgs prune;
  EvalArgs eval;
  SynthArgs synth;
  VerifyArgs verify;
  BenchArgs bench;
  add_prune(app, prune);
  add_eval(app, eval);
  add_synth(app, synth);
  add_verify(app, verify);
  add_bench(app, bench);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "E_ARG: " << e.what() << "\n";
    return kExitArgument;
  }

  try {
    if (app.got_subcommand("prune")) return cmd_prune(prune, out);
    if (app.got_subcommand("eval")) return cmd_eval(eval, out);
    if (app.got_subcommand("synth")) return cmd_synth(synth, out);
    if (app.got_subcommand("verify")) return cmd_verify(verify, out);
    if (app.got_subcommand("bench")) return cmd_bench(bench, out);
  } catch (const ArgumentError& e) {
    err << e.code() << ": " << e.what() << "\n";
    return kExitArgument;
  } catch (const FormatError& e) {
    err << e.code() << ": " << e.what() << "\n";
    return kExitFormat;
  } catch (const GuardError& e) {
    err << e.code() << ": " << e.what() << "\n";
    return kExitGuard;
  } catch (const fs::filesystem_error& e) {
    err << "E_FORMAT: " << e.what() << "\n";
    return kExitFormat;
  } catch (const std::exception& e) {
    err << "E_INTERNAL: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace nbprune::cli
