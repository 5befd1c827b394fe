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

#include <cmath>
#include <limits>

#include "doctest.h"
#include "nbprune/dataset.hpp"
#include "nbprune/errors.hpp"
#include "support.hpp"

using namespace nbprune;
using nbprune::test::TempDir;

TEST_CASE("binary matrix round trip") {
  TempDir dir("ds_bin");
  const Matrix m = test::make_matrix(3, 2, {1.5f, -2.0f, 0.25f, 3.0f, 1e-7f, -0.0f});
  save_matrix(dir / "m.bin", m, MatrixFormat::kBinary);
  const Matrix back = load_matrix(dir / "m.bin", MatrixFormat::kBinary);
  CHECK(back == m);
  // header: 4 magic + 4 version + 8 rows + 4 cols
  CHECK(std::filesystem::file_size(dir / "m.bin") == 20 + 6 * 4);
}

TEST_CASE("binary header layout is little-endian NBPR v1") {
  TempDir dir("ds_hdr");
  save_matrix(dir / "m.bin", test::make_matrix(1, 1, {1.0f}), MatrixFormat::kBinary);
  const std::string bytes = test::read_file(dir / "m.bin");
  REQUIRE(bytes.size() == 24);
  CHECK(bytes.substr(0, 4) == "NBPR");
  CHECK(bytes[4] == 1);
  CHECK(bytes[8] == 1);
  CHECK(bytes[16] == 1);
  // 1.0f = 0x3f800000
  CHECK(static_cast<unsigned char>(bytes[23]) == 0x3f);
  CHECK(static_cast<unsigned char>(bytes[22]) == 0x80);
}

TEST_CASE("csv parsing") {
  const Matrix m = parse_csv_matrix("1,0\n0,1\n");
  CHECK(m == test::make_matrix(2, 2, {1, 0, 0, 1}));
  CHECK_THROWS_AS(parse_csv_matrix("1,0\n0,1,2\n"), FormatError);
  CHECK_THROWS_AS(parse_csv_matrix("1,abc\n"), FormatError);
  CHECK_THROWS_AS(parse_csv_matrix("1,nan\n"), FormatError);
  CHECK_THROWS_AS(parse_csv_matrix("inf,1\n"), FormatError);
}

TEST_CASE("csv round trip within float precision") {
  TempDir dir("ds_csv");
  Rng rng(3);
  const Matrix m = test::gaussian_matrix(rng, 17, 5);
  save_matrix(dir / "m.csv", m, MatrixFormat::kCsv);
  const Matrix back = load_matrix(dir / "m.csv", MatrixFormat::kCsv);
  REQUIRE(back.rows() == 17);
  REQUIRE(back.cols() == 5);
  for (std::size_t i = 0; i < 17; ++i) {
    for (std::size_t j = 0; j < 5; ++j) CHECK(back(i, j) == m(i, j));
  }
}

TEST_CASE("format detection and malformed binaries") {
  CHECK(format_for_path("x.csv") == MatrixFormat::kCsv);
  CHECK(format_for_path("x.bin") == MatrixFormat::kBinary);
  TempDir dir("ds_bad");
  test::write_file(dir / "bad.bin", "NOPE1234");
  CHECK_THROWS_AS(load_matrix(dir / "bad.bin", MatrixFormat::kBinary), FormatError);
  save_matrix(dir / "ok.bin", test::make_matrix(2, 2, {1, 2, 3, 4}), MatrixFormat::kBinary);
  std::string bytes = test::read_file(dir / "ok.bin");
  test::write_file(dir / "short.bin", bytes.substr(0, bytes.size() - 2));
  CHECK_THROWS_AS(load_matrix(dir / "short.bin", MatrixFormat::kBinary), FormatError);
  CHECK_THROWS_AS(load_matrix(dir / "missing.bin", MatrixFormat::kBinary), FormatError);
  // NaN payload
  Matrix nan(1, 1);
  nan(0, 0) = std::numeric_limits<float>::quiet_NaN();
  save_matrix(dir / "nan.bin", nan, MatrixFormat::kBinary);
  CHECK_THROWS_AS(load_matrix(dir / "nan.bin", MatrixFormat::kBinary), FormatError);
}

TEST_CASE("embeddings reject zero rows") {
  TempDir dir("ds_zero");
  save_matrix(dir / "z.bin", test::make_matrix(2, 2, {1, 0, 0, 0}), MatrixFormat::kBinary);
  CHECK_THROWS_AS(load_embeddings(dir / "z.bin", MatrixFormat::kBinary), FormatError);
}

TEST_CASE("labels and reals files") {
  TempDir dir("ds_lbl");
  const std::vector<Label> labels{0, 3, 1, 1};
  save_labels(dir / "l.txt", labels);
  CHECK(load_labels(dir / "l.txt") == labels);
  const std::vector<double> reals{0.125, 1.0 / 3.0, 0.0};
  save_reals(dir / "r.txt", reals);
  CHECK(load_reals(dir / "r.txt") == reals);
  test::write_file(dir / "bad.txt", "1\n-2\n");
  CHECK_THROWS_AS(load_labels(dir / "bad.txt"), FormatError);
  test::write_file(dir / "bad2.txt", "0.5\nnan\n");
  CHECK_THROWS_AS(load_reals(dir / "bad2.txt"), FormatError);
}

TEST_CASE("probability validation") {
  CHECK_NOTHROW(validate_probabilities(test::make_matrix(1, 3, {0.7f, 0.2f, 0.1f})));
  CHECK_THROWS(validate_probabilities(test::make_matrix(1, 2, {0.7f, 0.2f})));
  CHECK_THROWS(validate_probabilities(test::make_matrix(1, 2, {1.2f, -0.2f})));
}

TEST_CASE("confidence metrics") {
  const Matrix p = test::make_matrix(2, 3, {0.7f, 0.2f, 0.1f, 0.1f, 0.3f, 0.6f});
  const auto mp = compute_confidence(p, ConfidenceMetric::kMaxProb);
  CHECK(mp.values[0] == doctest::Approx(0.7).epsilon(1e-6));
  CHECK(mp.values[1] == doctest::Approx(0.6).epsilon(1e-6));
  const auto dp = compute_confidence(p, ConfidenceMetric::kDiffProb);
  CHECK(dp.values[0] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(dp.values[1] == doctest::Approx(0.3).epsilon(1e-6));
  const auto tie =
      compute_confidence(test::make_matrix(1, 2, {0.5f, 0.5f}), ConfidenceMetric::kDiffProb);
  CHECK(tie.values[0] == 0.0);
  CHECK_THROWS(compute_confidence(test::make_matrix(1, 1, {1.0f}), ConfidenceMetric::kDiffProb));
  CHECK_THROWS(compute_confidence(p, ConfidenceMetric::kExternal));
}

TEST_CASE("confidence is permutation-equivariant and diff <= max") {
  Rng rng(11);
  const std::size_t m = 200, c = 5;
  Matrix p(m, c);
  for (std::size_t i = 0; i < m; ++i) {
    double total = 0;
    std::vector<double> row(c);
    for (double& v : row) total += (v = rng.uniform() + 1e-3);
    for (std::size_t j = 0; j < c; ++j) p(i, j) = static_cast<float>(row[j] / total);
  }
  std::vector<std::size_t> perm(m);
  for (std::size_t i = 0; i < m; ++i) perm[i] = i;
  rng.shuffle(perm);
  Matrix q(m, c);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < c; ++j) q(i, j) = p(perm[i], j);
  }
  for (auto metric : {ConfidenceMetric::kMaxProb, ConfidenceMetric::kDiffProb}) {
    const auto a = compute_confidence(p, metric);
    const auto b = compute_confidence(q, metric);
    for (std::size_t i = 0; i < m; ++i) CHECK(b.values[i] == a.values[perm[i]]);
  }
  const auto mx = compute_confidence(p, ConfidenceMetric::kMaxProb);
  const auto df = compute_confidence(p, ConfidenceMetric::kDiffProb);
  for (std::size_t i = 0; i < m; ++i) {
    CHECK(df.values[i] <= mx.values[i]);
    CHECK(mx.values[i] >= 0.0);
    CHECK(mx.values[i] <= 1.0);
  }
}

TEST_CASE("external confidence bounds") {
  CHECK(external_confidence({0.0, 0.5, 1.0}, 3).values.size() == 3);
  CHECK_THROWS(external_confidence({0.5, 1.5}, 2));
  CHECK_THROWS(external_confidence({0.5}, 2));
}

TEST_CASE("small-loss scores") {
  const Matrix p = test::make_matrix(3, 2, {1.0f, 0.0f, 0.5f, 0.5f, 0.0f, 1.0f});
  const std::vector<Label> y{0, 1, 0};
  const auto s = compute_small_loss_scores(p, y);
  CHECK(s.kind == ScoreKind::kLoss);
  CHECK(s.values[0] == doctest::Approx(0.0));
  CHECK(s.values[1] == doctest::Approx(0.69314718).epsilon(1e-7));
  // floored at 1e-12
  CHECK(s.values[2] == doctest::Approx(27.631021).epsilon(1e-6));
  CHECK_THROWS(compute_small_loss_scores(p, std::vector<Label>{0, 2, 0}));
}

TEST_CASE("dataset validation") {
  Dataset ds;
  ds.embeddings = test::make_matrix(2, 2, {1, 0, 0, 1});
  ds.noisy_labels = {0, 1};
  ds.num_classes = 2;
  CHECK_NOTHROW(ds.validate());
  ds.noisy_labels = {0, 2};
  CHECK_THROWS(ds.validate());
  ds.noisy_labels = {0};
  CHECK_THROWS(ds.validate());
}
