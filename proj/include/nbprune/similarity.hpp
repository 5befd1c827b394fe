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

#ifndef NBPRUNE_SIMILARITY_HPP_
#define NBPRUNE_SIMILARITY_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "nbprune/matrix.hpp"

namespace nbprune {

struct Neighbor {
  std::uint32_t index;
  float weight;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// Thresholded cosine-similarity graph. Row i lists every j with
// sim(i, j) >= tau, ascending by j, including the self edge (i, 1.0).
// Immutable once built; symmetric with identical weights in both directions.
class NeighborGraph {
 public:
  NeighborGraph() = default;
  // Rows must already be sorted and contain their self edge.
  NeighborGraph(double tau, std::vector<std::vector<Neighbor>> rows);

  double tau() const { return tau_; }
  std::size_t size() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t edge_count() const { return edges_.size(); }
  bool self_included() const { return true; }

  std::span<const Neighbor> neighbors(std::size_t i) const {
    return {edges_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }

  friend bool operator==(const NeighborGraph&, const NeighborGraph&) = default;

 private:
  double tau_ = 1.0;
  std::vector<std::size_t> offsets_;
  std::vector<Neighbor> edges_;
};

struct GraphBuildOptions {
  std::size_t block_rows = 1024;
  std::size_t threads = 1;
  std::uint64_t max_edges = 2'000'000'000;
};

// dot(u, v) / (|u| |v|) clamped to [-1, 1]. Throws on a zero-norm input.
double cosine_similarity(std::span<const float> u, std::span<const float> v);

// Exact all-pairs build. Rows are L2-normalized once and compared in row
// blocks; output is bit-identical for any thread count or block size.
// Throws ArgumentError for tau outside (-1, 1] or a zero-norm row, and
// GuardError when the (predicted or actual) edge count exceeds max_edges.
NeighborGraph build_graph(const Matrix& embeddings, double tau,
                          const GraphBuildOptions& options = {});

// Cache layout: "NBGR", u32 version, u64 m, f64 tau, then per row a u32
// count followed by (u32 index, f32 weight) pairs; little-endian.
void save_graph(const std::filesystem::path& path, const NeighborGraph& graph);
NeighborGraph load_graph(const std::filesystem::path& path);

}  // namespace nbprune

#endif  // NBPRUNE_SIMILARITY_HPP_
