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

#ifndef NBPRUNE_PIPELINE_HPP_
#define NBPRUNE_PIPELINE_HPP_

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "nbprune/dataset.hpp"
#include "nbprune/selectors.hpp"
#include "nbprune/similarity.hpp"

namespace nbprune {

// Everything a selector may consume. Which fields are required depends on
// the method; run_prune reports the first missing one.
struct PruneInputs {
  Matrix embeddings;
  std::optional<std::vector<Label>> noisy_labels;
  std::uint32_t num_classes = 0;
  std::optional<Matrix> probabilities;
  std::optional<std::vector<Label>> true_labels;
  std::optional<ConfidenceVector> confidence;
  std::optional<AuxScores> scores;
  // Prebuilt graph; when null and one is needed, it is built from embeddings.
  const NeighborGraph* graph = nullptr;
};

struct PhaseTimings {
  double graph_build_s = 0.0;
  double selection_s = 0.0;
};

struct PruneReport {
  IndexList selected;
  // Present whenever a graph and confidences were available.
  std::optional<double> objective_value;
  std::vector<std::size_t> per_class_counts;
  std::optional<double> noise_ratio;
  PhaseTimings timings;
  SelectorConfig config;
};

PruneReport run_prune(const PruneInputs& inputs, const SelectorConfig& config,
                      GraphBuildOptions graph_options = {});

std::vector<std::size_t> per_class_counts(std::span<const std::uint32_t> selected,
                                          std::span<const Label> labels,
                                          std::uint32_t num_classes);

// Fraction of selected examples whose noisy label differs from the truth.
double noise_ratio(std::span<const std::uint32_t> selected,
                   std::span<const Label> noisy_labels,
                   std::span<const Label> true_labels);

nlohmann::json config_to_json(const SelectorConfig& config);
nlohmann::json report_to_json(const PruneReport& report);

// One zero-based index per line, in selection order.
void save_indices(const std::filesystem::path& path,
                  std::span<const std::uint32_t> indices);
IndexList load_indices(const std::filesystem::path& path);

// Named tau values tuned per benchmark: cifar10n, cifar100n, clothing1m.
double preset_tau(std::string_view preset);

}  // namespace nbprune

#endif  // NBPRUNE_PIPELINE_HPP_
