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

#ifndef NBPRUNE_VERIFY_HPP_
#define NBPRUNE_VERIFY_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "nbprune/dataset.hpp"
#include "nbprune/objective.hpp"
#include "nbprune/rng.hpp"
#include "nbprune/selectors.hpp"
#include "nbprune/similarity.hpp"
#include "nbprune/synthetic.hpp"

namespace nbprune {

struct ExpansionSeparation {
  double alpha = 0.0;  // mean neighbor count, self excluded
  double beta = 0.0;   // mean fraction of neighbors with another true class
};

// Requires ground-truth labels. Examples without neighbors contribute 0 to
// beta.
ExpansionSeparation measure_expansion_separation(const Dataset& dataset,
                                                 const NeighborGraph& graph);

struct BruteForceResult {
  IndexList subset;
  double objective = 0.0;
};

inline constexpr double kMaxBruteForceSubsets = 1e7;

// Exhaustive maximum over all size-s subsets; the lexicographically smallest
// subset wins ties. Throws GuardError when C(m, s) exceeds 1e7.
BruteForceResult brute_force_optimum(const NeighborGraph& graph,
                                     std::span<const double> confidence,
                                     std::size_t s, Utility utility,
                                     std::size_t threads = 1);

// Neighborhood-vote stand-in for re-labeling. Each example takes the label
// with the largest sum of w(i, k) * C(k) over selected neighbors k (lowest
// class on ties) and is "corrected" when that matches its true label. No
// selected neighbor, or all-zero votes, counts as not corrected.
std::vector<std::uint8_t> relabel_proxy(const Dataset& dataset,
                                        const NeighborGraph& graph,
                                        std::span<const double> confidence,
                                        std::span<const std::uint32_t> selected);

struct CorrelationBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  std::optional<double> correction_rate;  // empty bin -> nullopt
};

struct CorrelationReport {
  std::vector<CorrelationBin> bins;
  double spearman = 0.0;
};

// Spearman rank correlation with average ranks for ties; 0 when either side
// is constant.
double spearman(std::span<const double> a, std::span<const double> b);

// Equal-width bins over [min, max] of nbr_conf.
CorrelationReport correlation_report(std::span<const double> nbr_conf,
                                     std::span<const std::uint8_t> corrected,
                                     std::size_t num_bins = 15);

std::string correlation_csv(const CorrelationReport& report);
nlohmann::json correlation_json(const CorrelationReport& report);

// Random small instance for the property drivers: Gaussian embeddings
// (low dimension so thresholds in (0, 1) produce real neighborhoods) and
// uniform confidences.
struct RandomInstance {
  Matrix embeddings;
  std::vector<double> confidence;
  NeighborGraph graph;
};

RandomInstance make_random_instance(Rng& rng, std::size_t m, std::size_t dim,
                                    double tau);

struct PropertyOutcome {
  std::string name;
  std::size_t trials = 0;
  std::size_t violations = 0;
  // Smallest slack seen (negative means a violation).
  double worst_slack = 0.0;

  bool passed() const { return violations == 0; }
};

inline constexpr double kPropertyTolerance = 1e-9;

PropertyOutcome check_monotonicity(std::size_t probes, std::uint64_t seed);
PropertyOutcome check_submodularity(std::size_t probes, std::uint64_t seed);
// Incremental gains and running neighborhood confidences against
// from-scratch recomputation.
PropertyOutcome check_incremental_consistency(std::size_t probes, std::uint64_t seed);
PropertyOutcome check_approximation_bound(std::size_t instances, std::uint64_t seed,
                                          std::size_t threads = 1);
PropertyOutcome check_lazy_equivalence(std::size_t instances, std::size_t max_m,
                                       std::uint64_t seed, std::size_t threads = 1);

struct VerifyPlan {
  std::size_t bound_instances = 200;
  std::size_t monotonicity_probes = 500;
  std::size_t submodularity_probes = 500;
  std::size_t consistency_probes = 200;
  std::size_t lazy_instances = 100;
  std::size_t lazy_max_m = 2000;
};

// "exhaustive" or "quick".
VerifyPlan verify_plan(std::string_view preset);

std::vector<PropertyOutcome> run_verification(const VerifyPlan& plan,
                                              std::uint64_t seed,
                                              std::size_t threads = 1);

// Correlation between neighborhood confidence and proxy re-labeling success
// for a greedy subset on synthetic data.
struct RelabelStudyConfig {
  SynthConfig synth;
  double tau = 0.975;
  double ratio = 0.2;
  std::size_t num_bins = 15;
  std::size_t threads = 1;
};

struct RelabelStudy {
  CorrelationReport report;
  double mean_nbr_conf_corrected = 0.0;
  double mean_nbr_conf_uncorrected = 0.0;
  double subset_noise_ratio = 0.0;
  double dataset_noise_ratio = 0.0;
};

RelabelStudy run_relabel_study(const RelabelStudyConfig& config);

}  // namespace nbprune

#endif  // NBPRUNE_VERIFY_HPP_
