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

#include "nbprune/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <string>

#include "nbprune/errors.hpp"

namespace nbprune {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

template <class T>
const T& require(const std::optional<T>& value, Method method, const char* what) {
  if (!value) {
    throw ArgumentError(std::string(to_string(method)) + " requires " + what);
  }
  return *value;
}

}  // namespace

PruneReport run_prune(const PruneInputs& inputs, const SelectorConfig& config,
                      GraphBuildOptions graph_options) {
  const std::size_t m = inputs.embeddings.rows();
  if (m == 0) throw ArgumentError("no examples");
  const std::size_t s = config.budget.resolve(m);
  graph_options.threads = config.threads;

  PruneReport report;
  report.config = config;

  const bool needs_graph = uses_neighbor_graph(config.method);
  const bool can_score = inputs.confidence && config.tau;
  std::optional<NeighborGraph> owned_graph;
  const NeighborGraph* graph = inputs.graph;
  if ((needs_graph || can_score) && graph == nullptr) {
    if (!config.tau) {
      throw ArgumentError(std::string(to_string(config.method)) + " requires tau");
    }
    const auto start = Clock::now();
    owned_graph = build_graph(inputs.embeddings, *config.tau, graph_options);
    report.timings.graph_build_s = seconds_since(start);
    graph = &*owned_graph;
  }
  if (graph != nullptr && graph->size() != m) {
    throw ArgumentError("graph size does not match embeddings");
  }

  GreedyOptions greedy{config.utility, config.gain_mode, config.lazy, config.threads};
  const auto start = Clock::now();
  switch (config.method) {
    case Method::kPrune4Rel: {
      const auto& conf = require(inputs.confidence, config.method, "confidences");
      auto result = select_prune4rel(*graph, conf.values, s, greedy);
      report.selected = std::move(result.selected);
      break;
    }
    case Method::kPrune4RelBalanced: {
      const auto& conf = require(inputs.confidence, config.method, "confidences");
      const auto& labels = require(inputs.noisy_labels, config.method, "labels");
      auto result = select_prune4rel_balanced(*graph, conf.values, labels,
                                              inputs.num_classes, s, greedy);
      report.selected = std::move(result.selected);
      break;
    }
    case Method::kUniform:
      report.selected = select_uniform(m, s, config.seed);
      break;
    case Method::kSmallLoss:
      report.selected = select_small_loss(
          require(inputs.scores, config.method, "loss scores"), s);
      break;
    case Method::kForgetting:
      report.selected = select_forgetting(
          require(inputs.scores, config.method, "forgetting scores"), s);
      break;
    case Method::kGrand:
      report.selected =
          select_grand(require(inputs.scores, config.method, "gradient-norm scores"), s);
      break;
    case Method::kSsp:
      report.selected = select_ssp(
          require(inputs.scores, config.method, "prototypicality scores"), s);
      break;
    case Method::kMargin:
      report.selected = select_margin(
          require(inputs.probabilities, config.method, "probabilities"), s);
      break;
    case Method::kKCenterGreedy:
      report.selected =
          select_kcenter_greedy(inputs.embeddings, s, config.seed, config.threads);
      break;
    case Method::kModerate:
      report.selected = select_moderate(
          inputs.embeddings, require(inputs.noisy_labels, config.method, "labels"),
          inputs.num_classes, s);
      break;
  }
  report.timings.selection_s = seconds_since(start);

  if (graph != nullptr && inputs.confidence) {
    report.objective_value = subset_objective(*graph, inputs.confidence->values,
                                              report.selected, config.utility);
  }
  if (inputs.noisy_labels) {
    report.per_class_counts =
        per_class_counts(report.selected, *inputs.noisy_labels, inputs.num_classes);
    if (inputs.true_labels) {
      report.noise_ratio =
          noise_ratio(report.selected, *inputs.noisy_labels, *inputs.true_labels);
    }
  }
  return report;
}

std::vector<std::size_t> per_class_counts(std::span<const std::uint32_t> selected,
                                          std::span<const Label> labels,
                                          std::uint32_t num_classes) {
  std::vector<std::size_t> counts(num_classes, 0);
  for (std::uint32_t i : selected) {
    if (i >= labels.size()) {
      throw ArgumentError("selected index " + std::to_string(i) + " out of range");
    }
    if (labels[i] >= num_classes) throw ArgumentError("label out of range");
    ++counts[labels[i]];
  }
  return counts;
}

double noise_ratio(std::span<const std::uint32_t> selected,
                   std::span<const Label> noisy_labels,
                   std::span<const Label> true_labels) {
  if (noisy_labels.size() != true_labels.size()) {
    throw ArgumentError("noisy and true label counts differ");
  }
  if (selected.empty()) return 0.0;
  std::size_t noisy = 0;
  for (std::uint32_t i : selected) {
    if (i >= noisy_labels.size()) {
      throw ArgumentError("selected index " + std::to_string(i) + " out of range");
    }
    if (noisy_labels[i] != true_labels[i]) ++noisy;
  }
  return static_cast<double>(noisy) / static_cast<double>(selected.size());
}

nlohmann::json config_to_json(const SelectorConfig& config) {
  nlohmann::json j;
  j["method"] = to_string(config.method);
  if (const auto* count = std::get_if<std::size_t>(&config.budget.value)) {
    j["size"] = *count;
  } else {
    j["ratio"] = std::get<double>(config.budget.value);
  }
  j["tau"] = config.tau ? nlohmann::json(*config.tau) : nlohmann::json(nullptr);
  j["utility"] = config.utility.name();
  j["gain_mode"] = to_string(config.gain_mode);
  j["lazy"] = config.lazy;
  j["seed"] = config.seed;
  j["tie_break"] = "lowest_index";
  return j;
}

nlohmann::json report_to_json(const PruneReport& report) {
  nlohmann::json j;
  j["selected_count"] = report.selected.size();
  j["objective_value"] = report.objective_value
                             ? nlohmann::json(*report.objective_value)
                             : nlohmann::json(nullptr);
  j["per_class_counts"] = report.per_class_counts;
  j["noise_ratio"] = report.noise_ratio ? nlohmann::json(*report.noise_ratio)
                                        : nlohmann::json(nullptr);
  j["timings"] = {{"graph_build_s", report.timings.graph_build_s},
                  {"selection_s", report.timings.selection_s}};
  j["config"] = config_to_json(report.config);
  return j;
}

void save_indices(const std::filesystem::path& path,
                  std::span<const std::uint32_t> indices) {
  save_labels(path, indices);
}

IndexList load_indices(const std::filesystem::path& path) {
  return load_labels(path);
}

double preset_tau(std::string_view preset) {
  if (preset == "cifar10n") return 0.975;
  if (preset == "cifar100n") return 0.95;
  if (preset == "clothing1m") return 0.8;
  throw ArgumentError("unknown preset: " + std::string(preset));
}

}  // namespace nbprune
