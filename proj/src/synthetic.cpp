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

#include "nbprune/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "nbprune/errors.hpp"
#include "nbprune/rng.hpp"

namespace nbprune {
namespace {

void normalize(std::vector<double>& v) {
  double n2 = 0.0;
  for (double x : v) n2 += x * x;
  const double inv = 1.0 / std::sqrt(n2);
  for (double& x : v) x *= inv;
}

// c + 1 orthonormal vectors from Gram-Schmidt on Gaussian draws.
std::vector<std::vector<double>> random_orthonormal(std::size_t count,
                                                    std::size_t dim, Rng& rng) {
  std::vector<std::vector<double>> basis;
  while (basis.size() < count) {
    std::vector<double> v(dim);
    for (double& x : v) x = rng.normal();
    for (const auto& b : basis) {
      const double proj = std::inner_product(v.begin(), v.end(), b.begin(), 0.0);
      for (std::size_t k = 0; k < dim; ++k) v[k] -= proj * b[k];
    }
    double n2 = 0.0;
    for (double x : v) n2 += x * x;
    if (n2 < 1e-12) continue;
    normalize(v);
    basis.push_back(std::move(v));
  }
  return basis;
}

}  // namespace

std::string_view to_string(NoiseModel model) {
  return model == NoiseModel::kAsymmetricNextClass ? "asymmetric" : "symmetric";
}

NoiseModel parse_noise_model(std::string_view name) {
  if (name == "asymmetric" || name == "asymmetric_next_class") {
    return NoiseModel::kAsymmetricNextClass;
  }
  if (name == "symmetric") return NoiseModel::kSymmetric;
  throw ArgumentError("unknown noise model: " + std::string(name));
}

SyntheticData generate_synthetic(const SynthConfig& config) {
  const std::uint32_t c = config.num_classes;
  const std::uint32_t per = config.points_per_class;
  const std::uint32_t d = config.embedding_dim;
  if (c == 0 || per == 0) throw ArgumentError("classes and points per class must be positive");
  if (d <= c) {
    throw ArgumentError("cannot place " + std::to_string(c) +
                        " separated centers in dimension " + std::to_string(d) +
                        "; need embedding_dim > num_classes");
  }
  if (!(config.within_class_concentration > 0.0)) {
    throw ArgumentError("concentration must be positive");
  }
  if (!(config.between_class_separation >= 0.0)) {
    throw ArgumentError("separation must be non-negative");
  }
  if (!(config.noise_rate >= 0.0 && config.noise_rate < 1.0)) {
    throw ArgumentError("noise rate must lie in [0, 1)");
  }
  if (config.noise_model == NoiseModel::kSymmetric && c < 2 && config.noise_rate > 0) {
    throw ArgumentError("symmetric noise needs at least two classes");
  }

  Rng rng(config.seed);
  const auto basis = random_orthonormal(c + 1, d, rng);
  std::vector<std::vector<double>> centers(c, std::vector<double>(d));
  for (std::uint32_t j = 0; j < c; ++j) {
    for (std::uint32_t k = 0; k < d; ++k) {
      centers[j][k] = config.between_class_separation * basis[j][k] + basis[c][k];
    }
    normalize(centers[j]);
  }

  const std::size_t m = std::size_t{c} * per;
  SyntheticData out;
  Dataset& ds = out.dataset;
  ds.num_classes = c;
  ds.embeddings = Matrix(m, d);
  ds.noisy_labels.resize(m);
  ds.ground_truth_labels.emplace(m);
  const double spread = 1.0 / std::sqrt(config.within_class_concentration * d);
  std::vector<double> point(d);
  for (std::uint32_t j = 0; j < c; ++j) {
    for (std::uint32_t p = 0; p < per; ++p) {
      const std::size_t i = std::size_t{j} * per + p;
      for (std::uint32_t k = 0; k < d; ++k) {
        point[k] = centers[j][k] + spread * rng.normal();
      }
      normalize(point);
      auto row = ds.embeddings.row(i);
      for (std::uint32_t k = 0; k < d; ++k) row[k] = static_cast<float>(point[k]);
      (*ds.ground_truth_labels)[i] = j;
      ds.noisy_labels[i] = j;
    }
  }

  const auto flips = static_cast<std::uint32_t>(std::floor(config.noise_rate * per));
  std::vector<std::uint8_t> is_noisy(m, 0);
  std::vector<std::uint32_t> members(per);
  for (std::uint32_t j = 0; j < c; ++j) {
    std::iota(members.begin(), members.end(), 0u);
    rng.shuffle(members);
    for (std::uint32_t f = 0; f < flips; ++f) {
      const std::size_t i = std::size_t{j} * per + members[f];
      Label target;
      if (config.noise_model == NoiseModel::kAsymmetricNextClass) {
        target = (j + 1) % c;
      } else {
        target = static_cast<Label>(rng.below(c - 1));
        if (target >= j) ++target;
      }
      ds.noisy_labels[i] = target;
      is_noisy[i] = 1;
    }
  }

  out.confidence.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double mean = is_noisy[i] ? config.noisy_confidence_mean
                                    : config.clean_confidence_mean;
    const double sd = is_noisy[i] ? config.noisy_confidence_sd
                                  : config.clean_confidence_sd;
    out.confidence[i] = std::clamp(mean + sd * rng.normal(), 0.0, 1.0);
  }

  ds.probabilities.emplace(m, c);
  for (std::size_t i = 0; i < m; ++i) {
    auto row = ds.probabilities->row(i);
    if (c == 1) {
      row[0] = 1.0f;
      continue;
    }
    const double top = 1.0 / c + (1.0 - 1.0 / c) * out.confidence[i];
    const double rest = (1.0 - top) / (c - 1);
    for (std::uint32_t k = 0; k < c; ++k) row[k] = static_cast<float>(rest);
    row[ds.noisy_labels[i]] = static_cast<float>(top);
  }
  return out;
}

}  // namespace nbprune
