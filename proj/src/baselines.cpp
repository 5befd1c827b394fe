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
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "nbprune/errors.hpp"
#include "nbprune/parallel.hpp"
#include "nbprune/rng.hpp"
#include "nbprune/selectors.hpp"

namespace nbprune {
namespace {

void check_budget(std::size_t s, std::size_t m) {
  if (s == 0 || s > m) {
    throw ArgumentError("budget " + std::to_string(s) + " must lie in [1, " +
                        std::to_string(m) + "]");
  }
}

void check_kind(const AuxScores& scores, ScoreKind expected) {
  if (scores.kind != expected) {
    throw ArgumentError("expected " + std::string(to_string(expected)) +
                        " scores, got " + std::string(to_string(scores.kind)));
  }
}

double top_margin(std::span<const float> row) {
  double top1 = -1.0;
  double top2 = -1.0;
  for (float p : row) {
    if (p > top1) {
      top2 = top1;
      top1 = p;
    } else if (p > top2) {
      top2 = p;
    }
  }
  return top1 - top2;
}

double squared_distance(std::span<const float> a, std::span<const float> b) {
  double d2 = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = double{a[k]} - b[k];
    d2 += diff * diff;
  }
  return d2;
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kPrune4Rel: return "prune4rel";
    case Method::kPrune4RelBalanced: return "prune4rel_balanced";
    case Method::kUniform: return "uniform";
    case Method::kSmallLoss: return "small_loss";
    case Method::kMargin: return "margin";
    case Method::kKCenterGreedy: return "kcenter_greedy";
    case Method::kForgetting: return "forgetting";
    case Method::kGrand: return "grand";
    case Method::kModerate: return "moderate";
    case Method::kSsp: return "ssp";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::kPrune4Rel, Method::kPrune4RelBalanced, Method::kUniform,
                   Method::kSmallLoss, Method::kMargin, Method::kKCenterGreedy,
                   Method::kForgetting, Method::kGrand, Method::kModerate,
                   Method::kSsp}) {
    if (to_string(m) == name) return m;
  }
  throw ArgumentError("unknown method: " + std::string(name));
}

bool uses_neighbor_graph(Method method) {
  return method == Method::kPrune4Rel || method == Method::kPrune4RelBalanced;
}

std::string_view to_string(GainMode mode) {
  return mode == GainMode::kPaperFaithful ? "paper" : "exact";
}

GainMode parse_gain_mode(std::string_view name) {
  if (name == "paper" || name == "paper_faithful") return GainMode::kPaperFaithful;
  if (name == "exact" || name == "exact_marginal") return GainMode::kExactMarginal;
  throw ArgumentError("unknown gain mode: " + std::string(name));
}

std::size_t Budget::resolve(std::size_t m) const {
  std::size_t s = 0;
  if (const auto* count = std::get_if<std::size_t>(&value)) {
    s = *count;
  } else {
    const double r = std::get<double>(value);
    if (!(r > 0.0 && r <= 1.0)) {
      throw ArgumentError("ratio must lie in (0, 1], got " + std::to_string(r));
    }
    s = static_cast<std::size_t>(std::floor(r * static_cast<double>(m) + 0.5));
    if (s == 0) throw ArgumentError("ratio rounds to an empty subset");
  }
  check_budget(s, m);
  return s;
}

IndexList select_uniform(std::size_t m, std::size_t s, std::uint64_t seed) {
  check_budget(s, m);
  IndexList pool(m);
  std::iota(pool.begin(), pool.end(), 0u);
  Rng rng(seed);
  // Partial Fisher-Yates: the first s slots become the sample, in draw order.
  for (std::size_t i = 0; i < s; ++i) {
    const std::size_t j = i + rng.below(m - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(s);
  return pool;
}

IndexList select_by_score(std::span<const double> scores, std::size_t s,
                          Order order) {
  check_budget(s, scores.size());
  IndexList idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0u);
  if (order == Order::kAscending) {
    std::stable_sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) {
      return scores[a] < scores[b];
    });
  } else {
    std::stable_sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) {
      return scores[a] > scores[b];
    });
  }
  idx.resize(s);
  return idx;
}

IndexList select_small_loss(const AuxScores& scores, std::size_t s) {
  check_kind(scores, ScoreKind::kLoss);
  return select_by_score(scores.values, s, Order::kAscending);
}

IndexList select_forgetting(const AuxScores& scores, std::size_t s) {
  check_kind(scores, ScoreKind::kForgettingEvents);
  return select_by_score(scores.values, s, Order::kDescending);
}

IndexList select_grand(const AuxScores& scores, std::size_t s) {
  check_kind(scores, ScoreKind::kGradNorm);
  return select_by_score(scores.values, s, Order::kDescending);
}

IndexList select_ssp(const AuxScores& scores, std::size_t s) {
  check_kind(scores, ScoreKind::kSspPrototypicality);
  return select_by_score(scores.values, s, Order::kDescending);
}

IndexList select_margin(const Matrix& probabilities, std::size_t s) {
  if (probabilities.cols() < 2) throw ArgumentError("margin needs at least two classes");
  validate_probabilities(probabilities);
  std::vector<double> margins(probabilities.rows());
  for (std::size_t i = 0; i < margins.size(); ++i) {
    margins[i] = top_margin(probabilities.row(i));
  }
  return select_by_score(margins, s, Order::kAscending);
}

IndexList select_kcenter_greedy(const Matrix& embeddings, std::size_t s,
                                std::uint64_t seed, std::size_t threads) {
  check_budget(s, embeddings.rows());
  Rng rng(seed);
  const auto first = static_cast<std::uint32_t>(rng.below(embeddings.rows()));
  return select_kcenter_greedy_from(embeddings, s, first, threads);
}

IndexList select_kcenter_greedy_from(const Matrix& embeddings, std::size_t s,
                                     std::uint32_t first_center,
                                     std::size_t threads) {
  const std::size_t m = embeddings.rows();
  check_budget(s, m);
  if (first_center >= m) throw ArgumentError("first center out of range");
  std::vector<double> min_d2(m, std::numeric_limits<double>::infinity());
  std::vector<std::uint8_t> chosen(m, 0);
  IndexList centers;
  centers.reserve(s);
  std::uint32_t next = first_center;
  while (true) {
    centers.push_back(next);
    chosen[next] = 1;
    if (centers.size() == s) break;
    const auto c = embeddings.row(next);
    parallel_for(0, m, threads, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) {
        min_d2[i] = std::min(min_d2[i], squared_distance(embeddings.row(i), c));
      }
    });
    double best = -1.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (!chosen[i] && min_d2[i] > best) {
        best = min_d2[i];
        next = static_cast<std::uint32_t>(i);
      }
    }
  }
  return centers;
}

IndexList select_moderate(const Matrix& embeddings, std::span<const Label> labels,
                          std::uint32_t num_classes, std::size_t s) {
  const std::size_t m = embeddings.rows();
  const std::size_t d = embeddings.cols();
  check_budget(s, m);
  if (labels.size() != m) throw ArgumentError("label count does not match rows");
  std::vector<std::vector<double>> centroid(num_classes, std::vector<double>(d, 0.0));
  std::vector<std::size_t> count(num_classes, 0);
  for (std::size_t i = 0; i < m; ++i) {
    if (labels[i] >= num_classes) throw ArgumentError("label out of range");
    ++count[labels[i]];
    const auto row = embeddings.row(i);
    for (std::size_t k = 0; k < d; ++k) centroid[labels[i]][k] += row[k];
  }
  for (std::uint32_t j = 0; j < num_classes; ++j) {
    if (count[j] == 0) {
      throw ArgumentError("class " + std::to_string(j) + " has no examples");
    }
    for (double& v : centroid[j]) v /= static_cast<double>(count[j]);
  }
  std::vector<double> dist(m);
  std::vector<std::vector<double>> per_class(num_classes);
  for (std::size_t i = 0; i < m; ++i) {
    const auto row = embeddings.row(i);
    const auto& c = centroid[labels[i]];
    double d2 = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double diff = row[k] - c[k];
      d2 += diff * diff;
    }
    dist[i] = std::sqrt(d2);
    per_class[labels[i]].push_back(dist[i]);
  }
  std::vector<double> median(num_classes);
  for (std::uint32_t j = 0; j < num_classes; ++j) median[j] = median_of(per_class[j]);
  std::vector<double> score(m);
  for (std::size_t i = 0; i < m; ++i) score[i] = std::abs(dist[i] - median[labels[i]]);
  return select_by_score(score, s, Order::kAscending);
}

}  // namespace nbprune
