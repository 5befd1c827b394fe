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
#include <numeric>

#include "doctest.h"
#include "nbprune/errors.hpp"
#include "nbprune/pipeline.hpp"
#include "nbprune/synthetic.hpp"
#include "nbprune/verify.hpp"
#include "support.hpp"

using namespace nbprune;

TEST_CASE("synthetic flips are exact and go to the next class") {
  SynthConfig cfg;
  cfg.num_classes = 10;
  cfg.points_per_class = 100;
  cfg.noise_rate = 0.2;
  const auto data = generate_synthetic(cfg);
  const Dataset& ds = data.dataset;
  REQUIRE(ds.size() == 1000);
  REQUIRE(ds.ground_truth_labels);
  REQUIRE(ds.probabilities);
  CHECK_NOTHROW(ds.validate());
  std::vector<int> flips(10, 0);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const Label y = (*ds.ground_truth_labels)[i];
    const Label n = ds.noisy_labels[i];
    if (y != n) {
      ++flips[y];
      CHECK(n == (y + 1) % 10);
    }
  }
  for (int f : flips) CHECK(f == 20);
  for (double c : data.confidence) {
    CHECK(c >= 0.0);
    CHECK(c <= 1.0);
  }
  // max_prob recovers the confidence and lands on the noisy label
  const auto mp = compute_confidence(*ds.probabilities, ConfidenceMetric::kMaxProb);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(mp.values[i] == doctest::Approx(0.1 + 0.9 * data.confidence[i]).epsilon(1e-6));
    CHECK((*ds.probabilities)(i, ds.noisy_labels[i]) == doctest::Approx(mp.values[i]));
  }
}

TEST_CASE("synthetic noise variants") {
  SynthConfig cfg;
  cfg.noise_rate = 0.0;
  const auto clean = generate_synthetic(cfg);
  CHECK(clean.dataset.noisy_labels == *clean.dataset.ground_truth_labels);

  cfg.noise_rate = 0.3;
  cfg.noise_model = NoiseModel::kSymmetric;
  cfg.points_per_class = 50;
  const auto sym = generate_synthetic(cfg);
  std::size_t flips = 0;
  for (std::size_t i = 0; i < sym.dataset.size(); ++i) {
    flips += sym.dataset.noisy_labels[i] != (*sym.dataset.ground_truth_labels)[i];
  }
  CHECK(flips == 10 * 15);
  const double m = double(sym.dataset.size());
  CHECK(std::abs(flips / m - 0.3) <= 2 / std::sqrt(m));

  CHECK(generate_synthetic(cfg).dataset.embeddings == sym.dataset.embeddings);
  cfg.embedding_dim = 10;
  CHECK_THROWS_AS(generate_synthetic(cfg), ArgumentError);
  cfg.embedding_dim = 32;
  cfg.noise_rate = 1.0;
  CHECK_THROWS_AS(generate_synthetic(cfg), ArgumentError);
}

TEST_CASE("synthetic geometry limits") {
  SynthConfig cfg;
  cfg.num_classes = 4;
  cfg.points_per_class = 30;
  cfg.embedding_dim = 16;
  cfg.within_class_concentration = 1e9;
  cfg.between_class_separation = 0.0;
  const auto data = generate_synthetic(cfg);
  const Matrix& e = data.dataset.embeddings;
  const auto& y = *data.dataset.ground_truth_labels;
  // with zero separation every center is the shared direction
  for (std::size_t i = 0; i < e.rows(); ++i) {
    for (std::size_t j = i + 1; j < e.rows(); ++j) {
      CHECK(test::direct_cosine(e, i, j) > 0.999);
    }
  }
  cfg.between_class_separation = 2.0;
  const auto sep = generate_synthetic(cfg);
  // centers have cosine 1 / (1 + sep^2) = 0.2
  const Matrix& f = sep.dataset.embeddings;
  const auto& ys = *sep.dataset.ground_truth_labels;
  for (std::size_t i = 0; i < f.rows(); i += 7) {
    for (std::size_t j = 0; j < f.rows(); j += 5) {
      const double c = test::direct_cosine(f, i, j);
      if (ys[i] == ys[j]) {
        CHECK(c > 0.999);
      } else {
        CHECK(c == doctest::Approx(0.2).epsilon(1e-3));
      }
    }
  }
  (void)y;
}

TEST_CASE("expansion and separation measures") {
  Dataset ds;
  ds.embeddings = test::make_matrix(2, 2, {1, 0, 1, 0});
  ds.noisy_labels = {0, 0};
  ds.num_classes = 2;
  ds.ground_truth_labels = std::vector<Label>{0, 0};
  const NeighborGraph g = build_graph(ds.embeddings, 0.5);
  auto r = measure_expansion_separation(ds, g);
  CHECK(r.alpha == 1.0);
  CHECK(r.beta == 0.0);
  ds.ground_truth_labels = std::vector<Label>{0, 1};
  r = measure_expansion_separation(ds, g);
  CHECK(r.alpha == 1.0);
  CHECK(r.beta == 1.0);

  Rng rng(3);
  Dataset d2;
  d2.embeddings = test::gaussian_matrix(rng, 30, 4);
  d2.noisy_labels.assign(30, 0);
  d2.num_classes = 1;
  d2.ground_truth_labels = d2.noisy_labels;
  r = measure_expansion_separation(d2, build_graph(d2.embeddings, 1.0));
  CHECK(r.alpha == 0.0);
  CHECK(r.beta == 0.0);
  d2.ground_truth_labels.reset();
  CHECK_THROWS(measure_expansion_separation(d2, build_graph(d2.embeddings, 1.0)));
}

TEST_CASE("more separation never raises beta") {
  double prev = 2.0;
  for (double sep : {0.5, 1.0, 1.5, 2.0, 3.0}) {
    SynthConfig cfg;
    cfg.points_per_class = 60;
    cfg.within_class_concentration = 4.0;
    cfg.between_class_separation = sep;
    cfg.seed = 5;
    const auto data = generate_synthetic(cfg);
    const auto r =
        measure_expansion_separation(data.dataset, build_graph(data.dataset.embeddings, 0.6));
    CHECK(r.beta <= prev);
    prev = r.beta;
  }
}

TEST_CASE("brute force") {
  const NeighborGraph g = build_graph(test::tiny_embeddings(), 0.5);
  const auto conf = test::tiny_confidence();
  // pairs: {0,1} -> 2 tanh(1.7), {0,2} -> 2 tanh(0.9) + tanh(0.7),
  //        {1,2} -> 2 tanh(0.8) + tanh(0.7)
  const auto best = brute_force_optimum(g, conf, 2, Utility{});
  const double v01 = 2 * std::tanh(1.7);
  const double v02 = 2 * std::tanh(0.9) + std::tanh(0.7);
  const double v12 = 2 * std::tanh(0.8) + std::tanh(0.7);
  CHECK(best.objective == doctest::Approx(std::max({v01, v02, v12})));
  CHECK(best.subset == IndexList{0, 2});
  CHECK(brute_force_optimum(g, conf, 3, Utility{}).subset == IndexList{0, 1, 2});

  Rng rng(7);
  const auto c2 = test::uniform_vector(rng, 12);
  const NeighborGraph g1 = build_graph(test::gaussian_matrix(rng, 12, 6), 1.0);
  const auto top = std::max_element(c2.begin(), c2.end()) - c2.begin();
  CHECK(brute_force_optimum(g1, c2, 1, Utility{}).subset == IndexList{std::uint32_t(top)});
  // ties resolve to the lexicographically smallest subset
  const NeighborGraph g3 = build_graph(test::make_matrix(4, 1, {1, 1, 1, 1}), 0.5);
  CHECK(brute_force_optimum(g3, std::vector<double>(4, 0.5), 2, Utility{}).subset ==
        IndexList{0, 1});
  // thread count does not matter
  const NeighborGraph g4 = build_graph(test::gaussian_matrix(rng, 14, 2), 0.3);
  const auto c4 = test::uniform_vector(rng, 14);
  const auto a = brute_force_optimum(g4, c4, 6, Utility{}, 1);
  const auto b = brute_force_optimum(g4, c4, 6, Utility{}, 4);
  CHECK(a.subset == b.subset);
  CHECK(a.objective == b.objective);

  const NeighborGraph big = build_graph(test::gaussian_matrix(rng, 60, 2), 0.9);
  CHECK_THROWS_AS(brute_force_optimum(big, test::uniform_vector(rng, 60), 30, Utility{}),
                  GuardError);
}

TEST_CASE("relabel proxy votes") {
  // example 0 true class 0, noisy 1; neighbors 1 (clean, class 0) and 2
  // (class 1). Votes: class 0 gets 0.9 * 0.9, class 1 gets 0.6 * 0.5.
  NeighborGraph g(0.5, {{{0, 1.0f}, {1, 0.9f}, {2, 0.6f}},
                        {{0, 0.9f}, {1, 1.0f}},
                        {{0, 0.6f}, {2, 1.0f}},
                        {{3, 1.0f}}});
  Dataset ds;
  ds.embeddings = test::make_matrix(4, 1, {1, 1, 1, 1});
  ds.noisy_labels = {1, 0, 1, 0};
  ds.num_classes = 2;
  ds.ground_truth_labels = std::vector<Label>{0, 0, 1, 0};
  const std::vector<double> conf{0.2, 0.9, 0.5, 0.4};
  const auto c = relabel_proxy(ds, g, conf, std::vector<std::uint32_t>{1, 2});
  CHECK(c[0] == 1);
  CHECK(c[1] == 1);  // its own selected self edge, clean
  CHECK(c[2] == 1);
  CHECK(c[3] == 0);  // no selected neighbor: abstain
  ds.ground_truth_labels.reset();
  CHECK_THROWS(relabel_proxy(ds, g, conf, std::vector<std::uint32_t>{1}));
}

TEST_CASE("spearman") {
  std::vector<double> a(50), b(50);
  std::iota(a.begin(), a.end(), 0.0);
  for (std::size_t i = 0; i < 50; ++i) b[i] = std::exp(0.1 * a[i]);
  CHECK(spearman(a, b) == doctest::Approx(1.0));
  std::vector<double> rev(b.rbegin(), b.rend());
  CHECK(spearman(a, rev) == doctest::Approx(-1.0));
  CHECK(spearman(a, std::vector<double>(50, 1.0)) == 0.0);
  // averaged ranks: x = [1,2,3,4], y = [0,0,1,1] -> ranks 1.5,1.5,3.5,3.5
  // rho = cov / (sd sd) = 2 / sqrt(5 * 4) = 0.894427
  CHECK(spearman(std::vector<double>{1, 2, 3, 4}, std::vector<double>{0, 0, 1, 1}) ==
        doctest::Approx(0.8944272).epsilon(1e-6));
  Rng rng(101);
  std::vector<double> x(1000), y(1000);
  for (std::size_t i = 0; i < 1000; ++i) {
    x[i] = rng.uniform();
    y[i] = rng.below(2);
  }
  CHECK(std::abs(spearman(x, y)) < 0.2);
}

TEST_CASE("correlation report bins") {
  const std::vector<double> nbr{0.0, 0.1, 0.3, 0.9, 1.0};
  const std::vector<std::uint8_t> corrected{0, 0, 1, 1, 1};
  const auto r = correlation_report(nbr, corrected, 5);
  REQUIRE(r.bins.size() == 5);
  CHECK(r.bins[0].lo == 0.0);
  CHECK(r.bins[4].hi == 1.0);
  CHECK(r.bins[0].count == 2);  // 0.0, 0.1
  CHECK(*r.bins[0].correction_rate == 0.0);
  CHECK(r.bins[1].count == 1);
  CHECK(!r.bins[2].correction_rate);
  CHECK(r.bins[4].count == 2);  // 0.9 and the maximum
  CHECK(r.spearman > 0.8);
  const std::string csv = correlation_csv(r);
  CHECK(csv.rfind("bin_lo,bin_hi,count,correction_rate\n", 0) == 0);
  const auto j = correlation_json(r);
  CHECK(j["bins"].size() == 5);
  CHECK(j["bins"][2]["correction_rate"].is_null());
  CHECK_THROWS(correlation_report(std::vector<double>{}, std::vector<std::uint8_t>{}, 5));
}

TEST_CASE("property drivers pass on a small budget") {
  for (const auto& o : run_verification(verify_plan("quick"), 3)) {
    INFO(o.name);
    CHECK(o.passed());
    CHECK(o.trials > 0);
  }
  CHECK_THROWS_AS(verify_plan("nope"), ArgumentError);
}

TEST_CASE("relabel study direction on a small set") {
  RelabelStudyConfig cfg;
  cfg.synth.points_per_class = 200;
  const auto st = run_relabel_study(cfg);
  CHECK(st.mean_nbr_conf_corrected > st.mean_nbr_conf_uncorrected);
  CHECK(st.subset_noise_ratio < st.dataset_noise_ratio);
  CHECK(st.dataset_noise_ratio == doctest::Approx(0.2));
}

TEST_CASE("pipeline helpers") {
  const std::vector<Label> noisy{0, 1, 1, 2}, truth{0, 1, 0, 2};
  const std::vector<std::uint32_t> sel{0, 2, 3};
  CHECK(per_class_counts(sel, noisy, 3) == std::vector<std::size_t>{1, 1, 1});
  CHECK(noise_ratio(sel, noisy, truth) == doctest::Approx(1.0 / 3.0));
  CHECK(noise_ratio(std::vector<std::uint32_t>{0, 1, 3}, noisy, truth) == 0.0);
  CHECK(preset_tau("cifar10n") == 0.975);
  CHECK(preset_tau("cifar100n") == 0.95);
  CHECK(preset_tau("clothing1m") == 0.8);
  CHECK_THROWS_AS(preset_tau("imagenet"), ArgumentError);
  test::TempDir dir("idx");
  save_indices(dir / "s.txt", sel);
  CHECK(test::read_file(dir / "s.txt") == "0\n2\n3\n");
  CHECK(load_indices(dir / "s.txt") == IndexList{0, 2, 3});
}
