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

#include "nbprune/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "nbprune/errors.hpp"
#include "nbprune/parallel.hpp"
#include "nbprune/pipeline.hpp"

namespace nbprune {
namespace {

constexpr std::array<double, 3> kBoundTaus = {0.3, 0.7, 0.95};

double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / i;
  return r;
}

std::size_t uniform_between(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + rng.below(hi - lo + 1);
}

double pick_tau(Rng& rng) { return kBoundTaus[rng.below(kBoundTaus.size())]; }

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i + 1;
    while (j < order.size() && v[order[j]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j - 1) + 1.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = r;
    i = j;
  }
  return ranks;
}

void record(PropertyOutcome& out, double slack) {
  ++out.trials;
  if (out.trials == 1 || slack < out.worst_slack) out.worst_slack = slack;
  if (slack < -kPropertyTolerance) ++out.violations;
}

IndexList random_subset(Rng& rng, std::size_t m, double p) {
  IndexList out;
  for (std::size_t i = 0; i < m; ++i) {
    if (rng.uniform() < p) out.push_back(static_cast<std::uint32_t>(i));
  }
  rng.shuffle(out);
  return out;
}

std::optional<std::uint32_t> random_outside(Rng& rng, std::size_t m,
                                            const std::vector<std::uint8_t>& member) {
  IndexList outside;
  for (std::size_t i = 0; i < m; ++i) {
    if (!member[i]) outside.push_back(static_cast<std::uint32_t>(i));
  }
  if (outside.empty()) return std::nullopt;
  return outside[rng.below(outside.size())];
}

}  // namespace

ExpansionSeparation measure_expansion_separation(const Dataset& dataset,
                                                 const NeighborGraph& graph) {
  if (!dataset.ground_truth_labels) {
    throw ArgumentError("expansion/separation needs ground-truth labels");
  }
  const auto& truth = *dataset.ground_truth_labels;
  if (truth.size() != graph.size()) throw ArgumentError("label count does not match graph");
  const std::size_t m = graph.size();
  if (m == 0) return {};
  double alpha = 0.0;
  double beta = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t count = 0;
    std::size_t other = 0;
    for (const Neighbor& n : graph.neighbors(i)) {
      if (n.index == i) continue;
      ++count;
      if (truth[n.index] != truth[i]) ++other;
    }
    alpha += static_cast<double>(count);
    if (count > 0) beta += static_cast<double>(other) / static_cast<double>(count);
  }
  return {alpha / static_cast<double>(m), beta / static_cast<double>(m)};
}

BruteForceResult brute_force_optimum(const NeighborGraph& graph,
                                     std::span<const double> confidence,
                                     std::size_t s, Utility utility,
                                     std::size_t threads) {
  const std::size_t m = graph.size();
  if (s == 0 || s > m) throw ArgumentError("subset size out of range");
  if (binomial(m, s) > kMaxBruteForceSubsets) {
    throw GuardError("C(" + std::to_string(m) + ", " + std::to_string(s) +
                     ") subsets exceed the brute-force cap");
  }
  if (confidence.size() != m) throw ArgumentError("confidence length mismatch");

  // Work is split by first element; every subset starting with a smaller
  // first element is lexicographically smaller, so an in-order reduction
  // with strict improvement keeps the smallest subset on ties.
  const std::size_t firsts = m - s + 1;
  std::vector<BruteForceResult> partial(firsts);
  std::vector<std::uint8_t> found(firsts, 0);
  parallel_for(0, firsts, threads, [&](std::size_t lo, std::size_t hi) {
    IndexList combo(s);
    for (std::size_t first = lo; first < hi; ++first) {
      combo[0] = static_cast<std::uint32_t>(first);
      for (std::size_t k = 1; k < s; ++k) combo[k] = static_cast<std::uint32_t>(first + k);
      while (true) {
        const double value = subset_objective(graph, confidence, combo, utility);
        if (!found[first] || value > partial[first].objective) {
          partial[first] = {combo, value};
          found[first] = 1;
        }
        // Next combination of positions 1..s-1; position 0 stays fixed.
        bool advanced = false;
        for (std::size_t k = s - 1; k >= 1 && !advanced; --k) {
          if (combo[k] < m - s + k) {
            ++combo[k];
            for (std::size_t t = k + 1; t < s; ++t) combo[t] = combo[t - 1] + 1;
            advanced = true;
          }
        }
        if (!advanced) break;
      }
    }
  });
  BruteForceResult best = partial[0];
  for (std::size_t f = 1; f < firsts; ++f) {
    if (found[f] && partial[f].objective > best.objective) best = partial[f];
  }
  return best;
}

std::vector<std::uint8_t> relabel_proxy(const Dataset& dataset,
                                        const NeighborGraph& graph,
                                        std::span<const double> confidence,
                                        std::span<const std::uint32_t> selected) {
  if (!dataset.ground_truth_labels) {
    throw ArgumentError("re-labeling proxy needs ground-truth labels");
  }
  const std::size_t m = graph.size();
  const auto& truth = *dataset.ground_truth_labels;
  if (truth.size() != m || dataset.noisy_labels.size() != m || confidence.size() != m) {
    throw ArgumentError("dataset, graph and confidence sizes differ");
  }
  std::vector<std::uint8_t> in_set(m, 0);
  for (std::uint32_t k : selected) {
    if (k >= m) throw ArgumentError("selected index out of range");
    in_set[k] = 1;
  }
  std::vector<std::uint8_t> corrected(m, 0);
  std::vector<double> votes(dataset.num_classes, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    std::fill(votes.begin(), votes.end(), 0.0);
    for (const Neighbor& n : graph.neighbors(i)) {
      if (!in_set[n.index]) continue;
      votes[dataset.noisy_labels[n.index]] +=
          static_cast<double>(n.weight) * confidence[n.index];
    }
    std::size_t best = 0;
    for (std::size_t j = 1; j < votes.size(); ++j) {
      if (votes[j] > votes[best]) best = j;
    }
    corrected[i] = votes[best] > 0.0 && best == truth[i];
  }
  return corrected;
}

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ArgumentError("spearman: length mismatch");
  if (a.empty()) throw ArgumentError("spearman: empty input");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

CorrelationReport correlation_report(std::span<const double> nbr_conf,
                                     std::span<const std::uint8_t> corrected,
                                     std::size_t num_bins) {
  if (nbr_conf.empty()) throw ArgumentError("correlation report: empty input");
  if (nbr_conf.size() != corrected.size()) {
    throw ArgumentError("correlation report: length mismatch");
  }
  if (num_bins == 0) throw ArgumentError("need at least one bin");
  const auto [lo_it, hi_it] = std::minmax_element(nbr_conf.begin(), nbr_conf.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  const double width = (hi - lo) / static_cast<double>(num_bins);
  CorrelationReport report;
  report.bins.resize(num_bins);
  std::vector<std::size_t> hits(num_bins, 0);
  for (std::size_t b = 0; b < num_bins; ++b) {
    report.bins[b].lo = lo + width * static_cast<double>(b);
    report.bins[b].hi = b + 1 == num_bins ? hi : lo + width * static_cast<double>(b + 1);
  }
  for (std::size_t i = 0; i < nbr_conf.size(); ++i) {
    std::size_t b = 0;
    if (width > 0.0) {
      b = std::min(num_bins - 1,
                   static_cast<std::size_t>((nbr_conf[i] - lo) / width));
    }
    ++report.bins[b].count;
    hits[b] += corrected[i] ? 1 : 0;
  }
  for (std::size_t b = 0; b < num_bins; ++b) {
    if (report.bins[b].count > 0) {
      report.bins[b].correction_rate =
          static_cast<double>(hits[b]) / static_cast<double>(report.bins[b].count);
    }
  }
  std::vector<double> as_real(corrected.begin(), corrected.end());
  report.spearman = spearman(nbr_conf, as_real);
  return report;
}

std::string correlation_csv(const CorrelationReport& report) {
  std::string out = "bin_lo,bin_hi,count,correction_rate\n";
  char buf[128];
  for (const auto& b : report.bins) {
    if (b.correction_rate) {
      std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%zu,%.9g\n", b.lo, b.hi, b.count,
                    *b.correction_rate);
    } else {
      std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%zu,\n", b.lo, b.hi, b.count);
    }
    out += buf;
  }
  return out;
}

nlohmann::json correlation_json(const CorrelationReport& report) {
  nlohmann::json bins = nlohmann::json::array();
  for (const auto& b : report.bins) {
    bins.push_back({{"bin_lo", b.lo},
                    {"bin_hi", b.hi},
                    {"count", b.count},
                    {"correction_rate", b.correction_rate
                                            ? nlohmann::json(*b.correction_rate)
                                            : nlohmann::json(nullptr)}});
  }
  return {{"spearman", report.spearman}, {"bins", bins}};
}

RandomInstance make_random_instance(Rng& rng, std::size_t m, std::size_t dim,
                                    double tau) {
  RandomInstance inst;
  inst.embeddings = Matrix(m, dim);
  for (std::size_t i = 0; i < m; ++i) {
    auto row = inst.embeddings.row(i);
    double n2 = 0.0;
    do {
      n2 = 0.0;
      for (float& v : row) {
        v = static_cast<float>(rng.normal());
        n2 += double{v} * v;
      }
    } while (n2 < 1e-6);
  }
  inst.confidence.resize(m);
  for (double& c : inst.confidence) c = rng.uniform();
  inst.graph = build_graph(inst.embeddings, tau);
  return inst;
}

PropertyOutcome check_monotonicity(std::size_t probes, std::uint64_t seed) {
  PropertyOutcome out{"monotonicity"};
  Rng rng(seed);
  const Utility utilities[] = {Utility(UtilityKind::kTanh), Utility(UtilityKind::kLog1p),
                               Utility(UtilityKind::kIdentity)};
  while (out.trials < probes) {
    const std::size_t m = uniform_between(rng, 2, 14);
    const auto inst = make_random_instance(rng, m, uniform_between(rng, 2, 5), pick_tau(rng));
    const Utility u = utilities[out.trials % 3];
    IndexList base = random_subset(rng, m, 0.5);
    std::vector<std::uint8_t> member(m, 0);
    for (auto i : base) member[i] = 1;
    const auto x = random_outside(rng, m, member);
    if (!x) continue;
    IndexList grown = base;
    grown.push_back(*x);
    const double before = subset_objective(inst.graph, inst.confidence, base, u);
    const double after = subset_objective(inst.graph, inst.confidence, grown, u);
    record(out, after - before);
  }
  return out;
}

PropertyOutcome check_submodularity(std::size_t probes, std::uint64_t seed) {
  PropertyOutcome out{"submodularity"};
  Rng rng(seed);
  const Utility utilities[] = {Utility(UtilityKind::kTanh), Utility(UtilityKind::kLog1p),
                               Utility(UtilityKind::kIdentity)};
  while (out.trials < probes) {
    const std::size_t m = uniform_between(rng, 2, 14);
    const auto inst = make_random_instance(rng, m, uniform_between(rng, 2, 5), pick_tau(rng));
    const Utility u = utilities[out.trials % 3];
    const IndexList larger = random_subset(rng, m, 0.6);
    IndexList smaller;
    for (auto i : larger) {
      if (rng.uniform() < 0.5) smaller.push_back(i);
    }
    std::vector<std::uint8_t> member(m, 0);
    for (auto i : larger) member[i] = 1;
    const auto x = random_outside(rng, m, member);
    if (!x) continue;
    SelectionState small_state(inst.graph, inst.confidence);
    for (auto i : smaller) small_state.add(i);
    SelectionState large_state(inst.graph, inst.confidence);
    for (auto i : larger) large_state.add(i);
    record(out, marginal_gain_exact(small_state, *x, u) -
                    marginal_gain_exact(large_state, *x, u));
  }
  return out;
}

PropertyOutcome check_incremental_consistency(std::size_t probes, std::uint64_t seed) {
  PropertyOutcome out{"incremental_consistency"};
  Rng rng(seed);
  const Utility u(UtilityKind::kTanh);
  while (out.trials < probes) {
    const std::size_t m = uniform_between(rng, 2, 60);
    const std::size_t dim = uniform_between(rng, 2, 6);
    const auto inst = make_random_instance(rng, m, dim, pick_tau(rng));
    const IndexList order = random_subset(rng, m, 0.7);
    SelectionState state(inst.graph, inst.confidence);
    IndexList so_far;
    double slack = 0.0;
    for (auto x : order) {
      const double predicted = marginal_gain_exact(state, x, u);
      const double before = subset_objective(inst.graph, inst.confidence, so_far, u);
      so_far.push_back(x);
      const double after = subset_objective(inst.graph, inst.confidence, so_far, u);
      state.add(x);
      // Gains within 1e-9 of the from-scratch difference.
      slack = std::min(slack, -std::abs(predicted - std::max(0.0, after - before)));
      // Running sums within 1e-6 of a direct weighted sum over the
      // embeddings, independent of the graph.
      for (std::size_t i = 0; i < m; ++i) {
        double direct = 0.0;
        for (auto j : so_far) {
          const float w = i == j ? 1.0f
                                 : static_cast<float>(cosine_similarity(
                                       inst.embeddings.row(i), inst.embeddings.row(j)));
          if (w >= inst.graph.tau()) direct += static_cast<double>(w) * inst.confidence[j];
        }
        const double err = std::abs(direct - state.nbr_conf()[i]);
        if (err > 1e-6) slack = std::min(slack, -err);
      }
    }
    record(out, slack);
  }
  return out;
}

PropertyOutcome check_approximation_bound(std::size_t instances, std::uint64_t seed,
                                          std::size_t threads) {
  PropertyOutcome out{"approximation_bound"};
  Rng rng(seed);
  const double factor = 1.0 - 1.0 / std::numbers::e;
  for (std::size_t t = 0; t < instances; ++t) {
    const std::size_t m = uniform_between(rng, 2, 14);
    const std::size_t s = uniform_between(rng, 1, std::min<std::size_t>(7, m));
    const double tau = kBoundTaus[t % kBoundTaus.size()];
    const auto inst = make_random_instance(rng, m, uniform_between(rng, 2, 5), tau);
    GreedyOptions opts;
    opts.gain_mode = GainMode::kExactMarginal;
    opts.threads = threads;
    const auto greedy = select_prune4rel(inst.graph, inst.confidence, s, opts);
    const auto best = brute_force_optimum(inst.graph, inst.confidence, s, opts.utility, threads);
    const double greedy_value =
        subset_objective(inst.graph, inst.confidence, greedy.selected, opts.utility);
    record(out, greedy_value - factor * best.objective);
  }
  return out;
}

PropertyOutcome check_lazy_equivalence(std::size_t instances, std::size_t max_m,
                                       std::uint64_t seed, std::size_t threads) {
  PropertyOutcome out{"lazy_equals_eager"};
  Rng rng(seed);
  const double taus[] = {0.6, 0.8, 0.95};
  for (std::size_t t = 0; t < instances; ++t) {
    const std::size_t m = uniform_between(rng, 2, std::max<std::size_t>(2, max_m));
    const std::size_t dim = uniform_between(rng, 6, 16);
    const auto inst = make_random_instance(rng, m, dim, taus[rng.below(3)]);
    for (GainMode mode : {GainMode::kPaperFaithful, GainMode::kExactMarginal}) {
      const std::size_t cap = mode == GainMode::kExactMarginal ? 200 : m;
      const std::size_t s = uniform_between(rng, 1, std::min(m, cap));
      GreedyOptions eager{Utility(), mode, false, threads};
      GreedyOptions lazy{Utility(), mode, true, threads};
      const auto a = select_prune4rel(inst.graph, inst.confidence, s, eager);
      const auto b = select_prune4rel(inst.graph, inst.confidence, s, lazy);
      record(out, a.selected == b.selected ? 0.0 : -1.0);
    }
  }
  return out;
}

VerifyPlan verify_plan(std::string_view preset) {
  if (preset == "exhaustive") return VerifyPlan{};
  if (preset == "quick") return VerifyPlan{20, 50, 50, 20, 10, 300};
  throw ArgumentError("unknown verify preset: " + std::string(preset));
}

std::vector<PropertyOutcome> run_verification(const VerifyPlan& plan,
                                              std::uint64_t seed,
                                              std::size_t threads) {
  return {
      check_approximation_bound(plan.bound_instances, seed, threads),
      check_monotonicity(plan.monotonicity_probes, seed + 1),
      check_submodularity(plan.submodularity_probes, seed + 2),
      check_incremental_consistency(plan.consistency_probes, seed + 3),
      check_lazy_equivalence(plan.lazy_instances, plan.lazy_max_m, seed + 4, threads),
  };
}

RelabelStudy run_relabel_study(const RelabelStudyConfig& config) {
  const SyntheticData data = generate_synthetic(config.synth);
  const Dataset& ds = data.dataset;
  GraphBuildOptions graph_options;
  graph_options.threads = config.threads;
  const NeighborGraph graph = build_graph(ds.embeddings, config.tau, graph_options);
  const std::size_t s = Budget::ratio(config.ratio).resolve(ds.size());
  GreedyOptions opts;
  opts.threads = config.threads;
  const GreedyResult greedy = select_prune4rel(graph, data.confidence, s, opts);
  const auto corrected = relabel_proxy(ds, graph, data.confidence, greedy.selected);

  RelabelStudy study;
  study.report = correlation_report(greedy.nbr_conf, corrected, config.num_bins);
  double sum_c = 0.0, sum_u = 0.0;
  std::size_t n_c = 0, n_u = 0;
  for (std::size_t i = 0; i < corrected.size(); ++i) {
    if (corrected[i]) {
      sum_c += greedy.nbr_conf[i];
      ++n_c;
    } else {
      sum_u += greedy.nbr_conf[i];
      ++n_u;
    }
  }
  study.mean_nbr_conf_corrected = n_c ? sum_c / n_c : 0.0;
  study.mean_nbr_conf_uncorrected = n_u ? sum_u / n_u : 0.0;
  study.subset_noise_ratio =
      noise_ratio(greedy.selected, ds.noisy_labels, *ds.ground_truth_labels);
  IndexList all(ds.size());
  std::iota(all.begin(), all.end(), 0u);
  study.dataset_noise_ratio = noise_ratio(all, ds.noisy_labels, *ds.ground_truth_labels);
  return study;
}

}  // namespace nbprune
