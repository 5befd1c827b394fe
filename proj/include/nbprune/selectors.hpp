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

#ifndef NBPRUNE_SELECTORS_HPP_
#define NBPRUNE_SELECTORS_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "nbprune/dataset.hpp"
#include "nbprune/matrix.hpp"
#include "nbprune/objective.hpp"
#include "nbprune/similarity.hpp"

namespace nbprune {

using IndexList = std::vector<std::uint32_t>;

enum class Method {
  kPrune4Rel,
  kPrune4RelBalanced,
  kUniform,
  kSmallLoss,
  kMargin,
  kKCenterGreedy,
  kForgetting,
  kGrand,
  kModerate,
  kSsp,
};

std::string_view to_string(Method method);
Method parse_method(std::string_view name);
bool uses_neighbor_graph(Method method);

// kPaperFaithful ranks candidates by their own-term score; kExactMarginal
// ranks by the full objective increment.
enum class GainMode { kPaperFaithful, kExactMarginal };

std::string_view to_string(GainMode mode);
GainMode parse_gain_mode(std::string_view name);

// Target subset size, given either as a count or as a ratio of m.
struct Budget {
  std::variant<std::size_t, double> value = std::size_t{1};

  static Budget count(std::size_t s) { return Budget{s}; }
  static Budget ratio(double r) { return Budget{r}; }

  // Ratio resolves by round-half-up. Throws ArgumentError unless 1 <= s <= m.
  std::size_t resolve(std::size_t m) const;
};

struct SelectorConfig {
  Method method = Method::kPrune4Rel;
  Budget budget;
  std::optional<double> tau;
  Utility utility;
  GainMode gain_mode = GainMode::kPaperFaithful;
  bool lazy = true;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

struct GreedyOptions {
  Utility utility;
  GainMode gain_mode = GainMode::kPaperFaithful;
  bool lazy = true;
  std::size_t threads = 1;
};

struct GreedyResult {
  IndexList selected;
  double objective = 0.0;
  std::vector<double> nbr_conf;
};

// Greedy neighborhood-confidence selection: starting from the empty set,
// repeatedly add the unselected example with the largest gain (lowest index
// on ties) until |S| = s. Lazy and eager runs return identical sequences.
GreedyResult select_prune4rel(const NeighborGraph& graph,
                              std::span<const double> confidence, std::size_t s,
                              const GreedyOptions& options = {});

// Class-balanced variant: visits classes round-robin, picking the best
// unselected member of each (classes with nothing left are skipped), and
// returns the moment |S| = s.
GreedyResult select_prune4rel_balanced(const NeighborGraph& graph,
                                       std::span<const double> confidence,
                                       std::span<const Label> labels,
                                       std::uint32_t num_classes, std::size_t s,
                                       const GreedyOptions& options = {});

IndexList select_uniform(std::size_t m, std::size_t s, std::uint64_t seed);

enum class Order { kAscending, kDescending };

// Stable rank by score in the given direction, lowest index first on ties.
IndexList select_by_score(std::span<const double> scores, std::size_t s,
                          Order order);

IndexList select_small_loss(const AuxScores& scores, std::size_t s);
IndexList select_forgetting(const AuxScores& scores, std::size_t s);
IndexList select_grand(const AuxScores& scores, std::size_t s);
IndexList select_ssp(const AuxScores& scores, std::size_t s);

// Ascending top1 - top2 margin.
IndexList select_margin(const Matrix& probabilities, std::size_t s);

// Farthest-point traversal. The first center is drawn from `seed`; each
// later pick maximizes the Euclidean distance to its nearest center.
IndexList select_kcenter_greedy(const Matrix& embeddings, std::size_t s,
                                std::uint64_t seed, std::size_t threads = 1);
IndexList select_kcenter_greedy_from(const Matrix& embeddings, std::size_t s,
                                     std::uint32_t first_center,
                                     std::size_t threads = 1);

// Ranks examples by |distance to own-class centroid - class median distance|.
IndexList select_moderate(const Matrix& embeddings, std::span<const Label> labels,
                          std::uint32_t num_classes, std::size_t s);

}  // namespace nbprune

#endif  // NBPRUNE_SELECTORS_HPP_
