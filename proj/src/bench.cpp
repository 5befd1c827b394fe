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

#include "nbprune/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>

#include "nbprune/errors.hpp"
#include "nbprune/selectors.hpp"
#include "nbprune/similarity.hpp"
#include "nbprune/synthetic.hpp"

namespace nbprune {
namespace {

using Clock = std::chrono::steady_clock;

}  // namespace

std::vector<BenchRow> run_benchmark(const BenchConfig& config) {
  if (config.repeat == 0) throw ArgumentError("repeat must be positive");
  for (const auto& name : config.methods) {
    if (name != "prune4rel" && name != "prune4rel_lazy" && name != "kcenter_greedy") {
      throw ArgumentError("unknown bench method: " + name);
    }
  }
  std::vector<BenchRow> rows;
  for (std::size_t m : config.m_list) {
    SynthConfig synth;
    synth.num_classes = 10;
    synth.points_per_class = static_cast<std::uint32_t>(std::max<std::size_t>(1, m / 10));
    synth.embedding_dim = config.dim;
    synth.seed = config.seed;
    const auto data = generate_synthetic(synth);
    const Matrix& emb = data.dataset.embeddings;
    const std::size_t s = Budget::ratio(config.ratio).resolve(emb.rows());
    GraphBuildOptions graph_options;
    graph_options.threads = config.threads;
    std::optional<NeighborGraph> graph;
    for (const auto& name : config.methods) {
      if (name != "kcenter_greedy" && !graph) {
        graph = build_graph(emb, config.tau, graph_options);
      }
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < config.repeat; ++r) {
        const auto start = Clock::now();
        if (name == "kcenter_greedy") {
          select_kcenter_greedy(emb, s, config.seed, config.threads);
        } else {
          GreedyOptions opts;
          opts.lazy = name == "prune4rel_lazy";
          opts.threads = config.threads;
          select_prune4rel(*graph, data.confidence, s, opts);
        }
        best = std::min(best, std::chrono::duration<double>(Clock::now() - start).count());
      }
      rows.push_back({emb.rows(), name, best, s});
    }
  }
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::string out = "m,method,seconds\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%zu,%s,%.6f\n", r.m, r.method.c_str(), r.seconds);
    out += buf;
  }
  return out;
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw ArgumentError("slope needs at least two matching points");
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace nbprune
