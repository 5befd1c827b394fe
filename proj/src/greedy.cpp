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

#include <algorithm>
#include <limits>
#include <optional>
#include <string>

#include "nbprune/errors.hpp"
#include "nbprune/parallel.hpp"
#include "nbprune/selectors.hpp"

namespace nbprune {
namespace {

struct HeapEntry {
  double gain;
  std::uint32_t index;
  std::uint64_t stamp;
};

// Max-heap order: larger gain first, then lower index.
struct HeapLess {
  bool operator()(const HeapEntry& a, const HeapEntry& b) const {
    if (a.gain != b.gain) return a.gain < b.gain;
    return a.index > b.index;
  }
};

// Shared machinery for the plain and class-balanced greedy loops. Candidates
// are partitioned into pools; `select_next(pool)` adds the best remaining
// member of that pool to the state.
//
// Lazy bookkeeping differs per gain mode:
//  - own-term gains depend only on nbr_conf[x], so every affected candidate
//    is re-scored on commit and re-pushed with a new version; stale heap
//    entries are dropped on pop;
//  - exact gains depend on the whole neighborhood, so candidates within two
//    hops of the pick are only marked dirty and re-scored when they reach the
//    top of the heap (stale gains bound the fresh ones from above).
class GreedyEngine {
 public:
  GreedyEngine(const NeighborGraph& graph, std::span<const double> confidence,
               std::vector<IndexList> pools, std::vector<std::uint32_t> pool_of,
               const GreedyOptions& options)
      : graph_(graph),
        state_(graph, confidence),
        options_(options),
        pools_(std::move(pools)),
        pool_of_(std::move(pool_of)) {
    const std::size_t m = graph.size();
    if (options_.gain_mode == GainMode::kPaperFaithful) {
      own_gain_.resize(m);
      for (std::size_t x = 0; x < m; ++x) {
        own_gain_[x] = own_term_gain(0.0, confidence[x], options_.utility);
      }
    }
    if (options_.lazy) {
      version_.assign(m, 0);
      dirty_since_.assign(m, 0);
      heaps_.resize(pools_.size());
      std::vector<double> initial(m);
      if (options_.gain_mode == GainMode::kPaperFaithful) {
        initial = own_gain_;
      } else {
        score_exact_parallel(initial, 0, m, [](std::size_t k) { return k; });
      }
      for (std::size_t p = 0; p < pools_.size(); ++p) {
        auto& heap = heaps_[p];
        heap.reserve(pools_[p].size());
        for (std::uint32_t x : pools_[p]) heap.push_back({initial[x], x, 0});
        std::make_heap(heap.begin(), heap.end(), HeapLess{});
      }
    }
  }

  std::optional<std::uint32_t> select_next(std::size_t pool) {
    const std::optional<std::uint32_t> pick =
        options_.lazy ? pick_lazy(pool) : pick_eager(pool);
    if (pick) commit(*pick);
    return pick;
  }

  const SelectionState& state() const { return state_; }

 private:
  template <class IndexOf>
  void score_exact_parallel(std::vector<double>& out, std::size_t lo,
                            std::size_t hi, IndexOf index_of) {
    parallel_for(lo, hi, options_.threads, [&](std::size_t a, std::size_t b) {
      for (std::size_t k = a; k < b; ++k) {
        const std::size_t x = index_of(k);
        out[x] = state_.contains(x)
                     ? -std::numeric_limits<double>::infinity()
                     : marginal_gain_exact(state_, x, options_.utility);
      }
    });
  }

  // Selected candidates carry a gain of -inf, so the scan needs no membership
  // test; strict > on an ascending scan keeps the lowest index on ties.
  std::optional<std::uint32_t> pick_eager(std::size_t pool) {
    const IndexList& members = pools_[pool];
    if (options_.gain_mode == GainMode::kExactMarginal) {
      if (scratch_.size() != graph_.size()) scratch_.resize(graph_.size());
      score_exact_parallel(scratch_, 0, members.size(),
                           [&](std::size_t k) { return members[k]; });
    }
    const double* gains = options_.gain_mode == GainMode::kExactMarginal
                              ? scratch_.data()
                              : own_gain_.data();
    constexpr double kNone = -std::numeric_limits<double>::infinity();
    double best_gain = kNone;
    std::uint32_t best = 0;
    if (members.size() == graph_.size()) {
      // single pool holding every index in order
      for (std::size_t x = 0; x < members.size(); ++x) {
        if (gains[x] > best_gain) {
          best_gain = gains[x];
          best = static_cast<std::uint32_t>(x);
        }
      }
    } else {
      for (std::uint32_t x : members) {
        if (gains[x] > best_gain) {
          best_gain = gains[x];
          best = x;
        }
      }
    }
    if (best_gain == kNone) return std::nullopt;
    return best;
  }

  std::optional<std::uint32_t> pick_lazy(std::size_t pool) {
    auto& heap = heaps_[pool];
    while (!heap.empty()) {
      std::pop_heap(heap.begin(), heap.end(), HeapLess{});
      const HeapEntry top = heap.back();
      heap.pop_back();
      if (state_.contains(top.index)) continue;
      if (options_.gain_mode == GainMode::kPaperFaithful) {
        if (top.stamp != version_[top.index]) continue;
        return top.index;
      }
      const bool fresh = top.stamp >= dirty_since_[top.index] &&
                         top.stamp >= global_dirty_;
      if (fresh) return top.index;
      heap.push_back({marginal_gain_exact(state_, top.index, options_.utility),
                      top.index, step_});
      std::push_heap(heap.begin(), heap.end(), HeapLess{});
    }
    return std::nullopt;
  }

  void commit(std::uint32_t x) {
    state_.add(x);
    ++step_;
    if (!own_gain_.empty()) own_gain_[x] = -std::numeric_limits<double>::infinity();
    const auto nbr_conf = state_.nbr_conf();
    const auto confidence = state_.confidence();
    if (options_.gain_mode == GainMode::kPaperFaithful) {
      for (const Neighbor& n : graph_.neighbors(x)) {
        const std::uint32_t v = n.index;
        if (state_.contains(v)) continue;
        own_gain_[v] = own_term_gain(nbr_conf[v], confidence[v], options_.utility);
        if (options_.lazy) {
          ++version_[v];
          auto& heap = heaps_[pool_of_[v]];
          heap.push_back({own_gain_[v], v, version_[v]});
          std::push_heap(heap.begin(), heap.end(), HeapLess{});
        }
      }
      return;
    }
    if (!options_.lazy) return;
    std::size_t two_hop = 0;
    for (const Neighbor& n : graph_.neighbors(x)) {
      two_hop += graph_.neighbors(n.index).size();
    }
    if (two_hop > graph_.size()) {
      global_dirty_ = step_;
      return;
    }
    for (const Neighbor& n : graph_.neighbors(x)) {
      for (const Neighbor& y : graph_.neighbors(n.index)) {
        dirty_since_[y.index] = step_;
      }
    }
  }

  const NeighborGraph& graph_;
  SelectionState state_;
  GreedyOptions options_;
  std::vector<IndexList> pools_;
  std::vector<std::uint32_t> pool_of_;
  std::vector<double> own_gain_;
  std::vector<double> scratch_;
  std::vector<std::vector<HeapEntry>> heaps_;
  std::vector<std::uint64_t> version_;
  std::vector<std::uint64_t> dirty_since_;
  std::uint64_t global_dirty_ = 0;
  std::uint64_t step_ = 0;
};

void check_budget(std::size_t s, std::size_t m) {
  if (s == 0 || s > m) {
    throw ArgumentError("budget " + std::to_string(s) + " must lie in [1, " +
                        std::to_string(m) + "]");
  }
}

GreedyResult finish(const GreedyEngine& engine, Utility utility) {
  const SelectionState& state = engine.state();
  GreedyResult result;
  result.selected.assign(state.selected().begin(), state.selected().end());
  result.objective = total_objective(state, utility);
  result.nbr_conf.assign(state.nbr_conf().begin(), state.nbr_conf().end());
  return result;
}

}  // namespace

GreedyResult select_prune4rel(const NeighborGraph& graph,
                              std::span<const double> confidence, std::size_t s,
                              const GreedyOptions& options) {
  const std::size_t m = graph.size();
  check_budget(s, m);
  IndexList all(m);
  for (std::size_t i = 0; i < m; ++i) all[i] = static_cast<std::uint32_t>(i);
  GreedyEngine engine(graph, confidence, {std::move(all)},
                      std::vector<std::uint32_t>(m, 0), options);
  for (std::size_t step = 0; step < s; ++step) engine.select_next(0);
  return finish(engine, options.utility);
}

GreedyResult select_prune4rel_balanced(const NeighborGraph& graph,
                                       std::span<const double> confidence,
                                       std::span<const Label> labels,
                                       std::uint32_t num_classes, std::size_t s,
                                       const GreedyOptions& options) {
  const std::size_t m = graph.size();
  check_budget(s, m);
  if (labels.size() != m) throw ArgumentError("label count does not match graph");
  if (num_classes == 0) throw ArgumentError("num_classes must be positive");
  std::vector<IndexList> pools(num_classes);
  std::vector<std::uint32_t> pool_of(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (labels[i] >= num_classes) throw ArgumentError("label out of range");
    pools[labels[i]].push_back(static_cast<std::uint32_t>(i));
    pool_of[i] = labels[i];
  }
  GreedyEngine engine(graph, confidence, std::move(pools), std::move(pool_of),
                      options);
  std::size_t taken = 0;
  while (taken < s) {
    for (std::uint32_t j = 0; j < num_classes; ++j) {
      if (!engine.select_next(j)) continue;
      if (++taken == s) break;
    }
  }
  return finish(engine, options.utility);
}

}  // namespace nbprune
