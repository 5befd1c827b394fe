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

#ifndef NBPRUNE_BENCH_HPP_
#define NBPRUNE_BENCH_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace nbprune {

// Timing sweep over dataset sizes on synthetic data. Method names:
//   prune4rel       eager greedy (full candidate scan per step)
//   prune4rel_lazy  heap-based greedy
//   kcenter_greedy  farthest-point baseline
struct BenchConfig {
  std::vector<std::size_t> m_list = {1000, 2000, 4000};
  std::uint32_t dim = 32;
  std::size_t repeat = 1;
  double ratio = 0.5;
  double tau = 0.975;
  std::vector<std::string> methods = {"prune4rel", "prune4rel_lazy", "kcenter_greedy"};
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

struct BenchRow {
  std::size_t m = 0;
  std::string method;
  double seconds = 0.0;  // selection time, minimum over repeats
  std::size_t steps = 0;
};

std::vector<BenchRow> run_benchmark(const BenchConfig& config);

std::string bench_csv(const std::vector<BenchRow>& rows);

// Least-squares slope of log(y) against log(x).
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace nbprune

#endif  // NBPRUNE_BENCH_HPP_
