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

#ifndef NBPRUNE_SYNTHETIC_HPP_
#define NBPRUNE_SYNTHETIC_HPP_

#include <cstdint>
#include <string_view>
#include <vector>

#include "nbprune/dataset.hpp"

namespace nbprune {

enum class NoiseModel { kAsymmetricNextClass, kSymmetric };

std::string_view to_string(NoiseModel model);
NoiseModel parse_noise_model(std::string_view name);

// Clustered data on the unit sphere with controllable neighborhood structure.
//
// Class centers are normalize(separation * e_j + u) for orthonormal e_j and a
// shared direction u, so two centers have cosine 1 / (1 + separation^2).
// Points are normalize(center + g / sqrt(concentration)) with g ~ N(0, I/d):
// higher concentration means more same-class neighbors (expansion), higher
// separation fewer cross-class ones.
struct SynthConfig {
  std::uint32_t num_classes = 10;
  std::uint32_t points_per_class = 100;
  std::uint32_t embedding_dim = 32;
  double within_class_concentration = 20.0;
  double between_class_separation = 2.0;
  double noise_rate = 0.2;
  NoiseModel noise_model = NoiseModel::kAsymmetricNextClass;
  // Confidences are clamped normals: clean examples high, noisy ones low.
  double clean_confidence_mean = 0.85;
  double clean_confidence_sd = 0.10;
  double noisy_confidence_mean = 0.35;
  double noisy_confidence_sd = 0.15;
  std::uint64_t seed = 0;
};

struct SyntheticData {
  Dataset dataset;  // carries ground_truth_labels and probabilities
  std::vector<double> confidence;
};

// Exactly floor(noise_rate * points_per_class) examples per class receive a
// wrong label. Probability rows put 1/c + (1 - 1/c) * confidence on the noisy
// label, so max_prob recovers the confidence ordering.
// Throws ArgumentError when embedding_dim <= num_classes (the centers need
// c + 1 orthogonal directions) or a parameter is out of range.
SyntheticData generate_synthetic(const SynthConfig& config);

}  // namespace nbprune

#endif  // NBPRUNE_SYNTHETIC_HPP_
