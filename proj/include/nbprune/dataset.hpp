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

#ifndef NBPRUNE_DATASET_HPP_
#define NBPRUNE_DATASET_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nbprune/matrix.hpp"

namespace nbprune {

using Label = std::uint32_t;

// The universe to prune: one embedding row and one (possibly wrong) label per
// example, plus optional classifier probabilities and, for synthetic or
// evaluation data, the true labels.
struct Dataset {
  Matrix embeddings;
  std::vector<Label> noisy_labels;
  std::uint32_t num_classes = 0;
  std::optional<Matrix> probabilities;
  std::optional<std::vector<Label>> ground_truth_labels;

  std::size_t size() const { return embeddings.rows(); }

  // Throws ArgumentError/FormatError when any invariant is broken: label
  // counts, label range, zero-norm embeddings, probability rows.
  void validate() const;
};

enum class ConfidenceMetric { kMaxProb, kDiffProb, kExternal };

std::string_view to_string(ConfidenceMetric metric);
ConfidenceMetric parse_confidence_metric(std::string_view name);

// Per-example confidence C(x), every value in [0, 1].
struct ConfidenceVector {
  std::vector<double> values;
  ConfidenceMetric metric = ConfidenceMetric::kExternal;
};

enum class ScoreKind { kLoss, kForgettingEvents, kGradNorm, kSspPrototypicality };

std::string_view to_string(ScoreKind kind);

// Per-example scores consumed by the score-ranking baselines.
struct AuxScores {
  std::vector<double> values;
  ScoreKind kind = ScoreKind::kLoss;
};

enum class MatrixFormat { kBinary, kCsv };

// ".csv" selects CSV, anything else the binary container.
MatrixFormat format_for_path(const std::filesystem::path& path);

// Binary container: "NBPR", u32 version (1), u64 rows, u32 cols, then
// rows*cols float32, all little-endian, row-major. CSV has no header row.
Matrix load_matrix(const std::filesystem::path& path, MatrixFormat format);
void save_matrix(const std::filesystem::path& path, const Matrix& matrix,
                 MatrixFormat format);

Matrix parse_csv_matrix(std::string_view text);
std::string to_csv(const Matrix& matrix);

Matrix load_embeddings(const std::filesystem::path& path, MatrixFormat format);

// One base-10 integer per line.
std::vector<Label> load_labels(const std::filesystem::path& path);
void save_labels(const std::filesystem::path& path, std::span<const Label> labels);

// One decimal real per line.
std::vector<double> load_reals(const std::filesystem::path& path);
void save_reals(const std::filesystem::path& path, std::span<const double> values);

// Each row must sum to 1 within 1e-5 with entries in [0, 1].
void validate_probabilities(const Matrix& probabilities);

ConfidenceVector compute_confidence(const Matrix& probabilities,
                                    ConfidenceMetric metric);

// External confidences supplied by the user, checked to lie in [0, 1].
ConfidenceVector external_confidence(std::vector<double> values,
                                     std::size_t expected_size);

// Cross-entropy of the noisy label, -log(max(p, 1e-12)).
AuxScores compute_small_loss_scores(const Matrix& probabilities,
                                    std::span<const Label> noisy_labels);

inline constexpr double kProbabilityFloor = 1e-12;
inline constexpr double kProbabilityRowTolerance = 1e-5;

}  // namespace nbprune

#endif  // NBPRUNE_DATASET_HPP_
