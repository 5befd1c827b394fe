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

#ifndef NBPRUNE_OBJECTIVE_HPP_
#define NBPRUNE_OBJECTIVE_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "nbprune/similarity.hpp"

namespace nbprune {

enum class UtilityKind { kTanh, kIdentity, kLog1p };

// Non-decreasing concave map with u(0) = 0 applied to each example's
// neighborhood confidence before summing.
class Utility {
 public:
  constexpr Utility() = default;
  constexpr explicit Utility(UtilityKind kind) : kind_(kind) {}

  double operator()(double z) const;
  UtilityKind kind() const { return kind_; }
  std::string_view name() const;

  static Utility parse(std::string_view name);

 private:
  UtilityKind kind_ = UtilityKind::kTanh;
};

// A growing subset S together with the running neighborhood confidence
//   nbr_conf[i] = sum_{j in S, j ~ i} w(i, j) * C(j)
// maintained with compensated summation. Holds a reference to the graph,
// which must outlive the state.
class SelectionState {
 public:
  SelectionState(const NeighborGraph& graph, std::span<const double> confidence);

  // Adds x to S and folds w(x, v) * C(x) into every neighbor v.
  // Throws ArgumentError if x is out of range or already selected.
  void add(std::uint32_t x);

  std::size_t universe_size() const { return in_set_.size(); }
  std::size_t size() const { return selected_.size(); }
  bool contains(std::size_t i) const { return in_set_[i] != 0; }
  std::span<const std::uint32_t> selected() const { return selected_; }
  std::span<const double> nbr_conf() const { return sum_; }
  std::span<const double> confidence() const { return confidence_; }
  const NeighborGraph& graph() const { return *graph_; }

 private:
  const NeighborGraph* graph_;
  std::vector<double> confidence_;
  std::vector<std::uint32_t> selected_;
  std::vector<std::uint8_t> in_set_;
  std::vector<double> sum_;
  std::vector<double> compensation_;
};

double neighborhood_confidence(const SelectionState& state, std::size_t i);

// sum_i u(nbr_conf[i]).
double total_objective(const SelectionState& state, Utility utility);

// OBJ(S + x) - OBJ(S), evaluated over neighbors(x) only. Clamped at 0.
double marginal_gain_exact(const SelectionState& state, std::size_t x,
                           Utility utility);

// The candidate's own-term score u(nbr_conf[x] + C(x)) - u(nbr_conf[x]),
// clamped at 0. This is the score the greedy loop ranks by in the default
// gain mode.
double marginal_gain_paper(const SelectionState& state, std::size_t x,
                           Utility utility);
double own_term_gain(double nbr_conf, double confidence, Utility utility);

// From-scratch evaluation of the neighborhood confidences of a subset.
std::vector<double> recompute_nbr_conf(const NeighborGraph& graph,
                                       std::span<const double> confidence,
                                       std::span<const std::uint32_t> subset);

double subset_objective(const NeighborGraph& graph,
                        std::span<const double> confidence,
                        std::span<const std::uint32_t> subset, Utility utility);

}  // namespace nbprune

#endif  // NBPRUNE_OBJECTIVE_HPP_
