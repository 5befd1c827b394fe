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

#ifndef NBPRUNE_TESTS_SUPPORT_HPP_
#define NBPRUNE_TESTS_SUPPORT_HPP_

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <unistd.h>

#include "nbprune/matrix.hpp"
#include "nbprune/rng.hpp"
#include "nbprune/similarity.hpp"

namespace nbprune::test {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("nbprune_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

inline Matrix make_matrix(std::size_t rows, std::size_t cols,
                          std::vector<float> values) {
  return Matrix(rows, cols, std::move(values));
}

// Three examples: two identical vectors and one orthogonal one.
inline Matrix tiny_embeddings() { return make_matrix(3, 2, {1, 0, 1, 0, 0, 1}); }
inline std::vector<double> tiny_confidence() { return {0.9, 0.8, 0.7}; }

inline Matrix gaussian_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = static_cast<float>(rng.normal());
  }
  return m;
}

inline std::vector<double> uniform_vector(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform();
  return v;
}

// Direct O(m^2 d) cosine evaluation in double, independent of build_graph.
inline double direct_cosine(const Matrix& e, std::size_t i, std::size_t j) {
  double dot = 0, ni = 0, nj = 0;
  for (std::size_t k = 0; k < e.cols(); ++k) {
    dot += double(e(i, k)) * e(j, k);
    ni += double(e(i, k)) * e(i, k);
    nj += double(e(j, k)) * e(j, k);
  }
  return dot / std::sqrt(ni * nj);
}

}  // namespace nbprune::test

#endif  // NBPRUNE_TESTS_SUPPORT_HPP_
