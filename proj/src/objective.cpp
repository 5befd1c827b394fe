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

#include "nbprune/objective.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nbprune/errors.hpp"

namespace nbprune {
namespace {

// Neumaier summation over a range of terms.
class CompensatedSum {
 public:
  void add(double y) {
    const double t = sum_ + y;
    if (std::abs(sum_) >= std::abs(y)) {
      comp_ += (sum_ - t) + y;
    } else {
      comp_ += (y - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace

double Utility::operator()(double z) const {
  switch (kind_) {
    case UtilityKind::kTanh: return std::tanh(z);
    case UtilityKind::kIdentity: return z;
    case UtilityKind::kLog1p: return std::log1p(z);
  }
  return z;
}

std::string_view Utility::name() const {
  switch (kind_) {
    case UtilityKind::kTanh: return "tanh";
    case UtilityKind::kIdentity: return "identity";
    case UtilityKind::kLog1p: return "log1p";
  }
  return "?";
}

Utility Utility::parse(std::string_view name) {
  if (name == "tanh") return Utility(UtilityKind::kTanh);
  if (name == "identity") return Utility(UtilityKind::kIdentity);
  if (name == "log1p") return Utility(UtilityKind::kLog1p);
  throw ArgumentError("unknown utility: " + std::string(name));
}

SelectionState::SelectionState(const NeighborGraph& graph,
                               std::span<const double> confidence)
    : graph_(&graph),
      confidence_(confidence.begin(), confidence.end()),
      in_set_(graph.size(), 0),
      sum_(graph.size(), 0.0),
      compensation_(graph.size(), 0.0) {
  if (confidence.size() != graph.size()) {
    throw ArgumentError("confidence length " + std::to_string(confidence.size()) +
                        " does not match graph size " +
                        std::to_string(graph.size()));
  }
}

void SelectionState::add(std::uint32_t x) {
  if (x >= in_set_.size()) throw ArgumentError("index out of range");
  if (in_set_[x]) throw ArgumentError("example already selected");
  in_set_[x] = 1;
  selected_.push_back(x);
  const double cx = confidence_[x];
  // Kahan update; weights are symmetric so scanning x's row reaches every v
  // whose row contains x.
  for (const Neighbor& n : graph_->neighbors(x)) {
    const double y = static_cast<double>(n.weight) * cx - compensation_[n.index];
    const double t = sum_[n.index] + y;
    compensation_[n.index] = (t - sum_[n.index]) - y;
    sum_[n.index] = t;
  }
}

double neighborhood_confidence(const SelectionState& state, std::size_t i) {
  if (i >= state.universe_size()) throw ArgumentError("index out of range");
  return state.nbr_conf()[i];
}

double total_objective(const SelectionState& state, Utility utility) {
  CompensatedSum total;
  for (double c : state.nbr_conf()) total.add(utility(c));
  return total.value();
}

double marginal_gain_exact(const SelectionState& state, std::size_t x,
                           Utility utility) {
  if (x >= state.universe_size()) throw ArgumentError("index out of range");
  if (state.contains(x)) throw ArgumentError("example already selected");
  const auto nbr = state.nbr_conf();
  const double cx = state.confidence()[x];
  CompensatedSum gain;
  for (const Neighbor& n : state.graph().neighbors(x)) {
    const double before = nbr[n.index];
    gain.add(utility(before + static_cast<double>(n.weight) * cx) - utility(before));
  }
  return std::max(0.0, gain.value());
}

double own_term_gain(double nbr_conf, double confidence, Utility utility) {
  return std::max(0.0, utility(nbr_conf + confidence) - utility(nbr_conf));
}

double marginal_gain_paper(const SelectionState& state, std::size_t x,
                           Utility utility) {
  if (x >= state.universe_size()) throw ArgumentError("index out of range");
  if (state.contains(x)) throw ArgumentError("example already selected");
  return own_term_gain(state.nbr_conf()[x], state.confidence()[x], utility);
}

std::vector<double> recompute_nbr_conf(const NeighborGraph& graph,
                                       std::span<const double> confidence,
                                       std::span<const std::uint32_t> subset) {
  std::vector<CompensatedSum> acc(graph.size());
  for (std::uint32_t j : subset) {
    if (j >= graph.size()) throw ArgumentError("index out of range");
    for (const Neighbor& n : graph.neighbors(j)) {
      acc[n.index].add(static_cast<double>(n.weight) * confidence[j]);
    }
  }
  std::vector<double> out(graph.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = acc[i].value();
  return out;
}

double subset_objective(const NeighborGraph& graph,
                        std::span<const double> confidence,
                        std::span<const std::uint32_t> subset, Utility utility) {
  CompensatedSum total;
  for (double c : recompute_nbr_conf(graph, confidence, subset)) {
    total.add(utility(c));
  }
  return total.value();
}

}  // namespace nbprune
