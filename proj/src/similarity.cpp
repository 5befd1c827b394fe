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

#include "nbprune/similarity.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "nbprune/errors.hpp"
#include "nbprune/parallel.hpp"

namespace nbprune {
namespace {

constexpr char kGraphMagic[4] = {'N', 'B', 'G', 'R'};
constexpr std::uint32_t kGraphVersion = 1;
constexpr std::size_t kColumnTile = 256;
constexpr std::size_t kGuardSampleRows = 256;

// Four interleaved partial sums, combined in a fixed order. Each term is a
// product of two coordinates, so dot(a, b) and dot(b, a) are bitwise equal.
double dot(const double* a, const double* b, std::size_t d) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t k = 0;
  for (; k + 4 <= d; k += 4) {
    s0 += a[k] * b[k];
    s1 += a[k + 1] * b[k + 1];
    s2 += a[k + 2] * b[k + 2];
    s3 += a[k + 3] * b[k + 3];
  }
  for (; k < d; ++k) s0 += a[k] * b[k];
  return (s0 + s1) + (s2 + s3);
}

std::vector<double> normalized_rows(const Matrix& embeddings) {
  const std::size_t m = embeddings.rows();
  const std::size_t d = embeddings.cols();
  std::vector<double> out(m * d);
  for (std::size_t i = 0; i < m; ++i) {
    const auto row = embeddings.row(i);
    double norm2 = 0.0;
    for (float v : row) norm2 += double{v} * v;
    if (!(norm2 > 0.0) || !std::isfinite(norm2)) {
      throw ArgumentError("embedding row " + std::to_string(i) +
                          " has zero norm");
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (std::size_t k = 0; k < d; ++k) out[i * d + k] = row[k] * inv;
  }
  return out;
}

// Stored weight for a pair; the comparison against tau uses this exact value
// so that every stored weight is >= tau.
float edge_weight(double similarity) {
  return static_cast<float>(std::clamp(similarity, -1.0, 1.0));
}

template <class T>
void append_le(std::string& out, T value) {
  for (std::size_t b = 0; b < sizeof(T); ++b) {
    out.push_back(static_cast<char>((value >> (8 * b)) & 0xff));
  }
}

template <class T>
T read_le(const std::string& bytes, std::size_t& pos) {
  if (pos + sizeof(T) > bytes.size()) {
    throw FormatError("graph cache truncated");
  }
  T value = 0;
  for (std::size_t b = 0; b < sizeof(T); ++b) {
    value |= static_cast<T>(static_cast<unsigned char>(bytes[pos + b])) << (8 * b);
  }
  pos += sizeof(T);
  return value;
}

}  // namespace

NeighborGraph::NeighborGraph(double tau, std::vector<std::vector<Neighbor>> rows)
    : tau_(tau) {
  offsets_.reserve(rows.size() + 1);
  offsets_.push_back(0);
  std::size_t total = 0;
  for (const auto& r : rows) total += r.size();
  edges_.reserve(total);
  for (auto& r : rows) {
    edges_.insert(edges_.end(), r.begin(), r.end());
    offsets_.push_back(edges_.size());
  }
}

double cosine_similarity(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size()) throw ArgumentError("dimension mismatch");
  double uv = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    uv += double{u[k]} * v[k];
    uu += double{u[k]} * u[k];
    vv += double{v[k]} * v[k];
  }
  if (!(uu > 0.0) || !(vv > 0.0)) throw ArgumentError("zero-norm vector");
  return std::clamp(uv / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

NeighborGraph build_graph(const Matrix& embeddings, double tau,
                          const GraphBuildOptions& options) {
  if (!(tau > -1.0 && tau <= 1.0)) {
    throw ArgumentError("tau must lie in (-1, 1], got " + std::to_string(tau));
  }
  const std::size_t m = embeddings.rows();
  const std::size_t d = embeddings.cols();
  if (m > UINT32_MAX) throw ArgumentError("too many rows for 32-bit indices");
  const std::vector<double> unit = normalized_rows(embeddings);

  auto scan_row = [&](std::size_t i, std::size_t j_lo, std::size_t j_hi,
                      std::vector<Neighbor>& out) {
    const double* a = unit.data() + i * d;
    for (std::size_t j = j_lo; j < j_hi; ++j) {
      if (j == i) {
        out.push_back({static_cast<std::uint32_t>(i), 1.0f});
        continue;
      }
      const float w = edge_weight(dot(a, unit.data() + j * d, d));
      if (w >= tau) out.push_back({static_cast<std::uint32_t>(j), w});
    }
  };

  // Predict the edge count from evenly spaced sample rows before paying for
  // the full build.
  {
    const std::size_t samples = std::min(m, kGuardSampleRows);
    std::uint64_t sampled_edges = 0;
    std::vector<Neighbor> scratch;
    for (std::size_t t = 0; t < samples; ++t) {
      scratch.clear();
      scan_row(t * m / samples, 0, m, scratch);
      sampled_edges += scratch.size();
    }
    const double predicted =
        static_cast<double>(sampled_edges) / samples * static_cast<double>(m);
    if (predicted > static_cast<double>(options.max_edges)) {
      throw GuardError("predicted edge count " +
                       std::to_string(static_cast<std::uint64_t>(predicted)) +
                       " exceeds cap " + std::to_string(options.max_edges) +
                       "; raise tau");
    }
  }

  std::vector<std::vector<Neighbor>> rows(m);
  std::atomic<std::uint64_t> total_edges{0};
  const std::size_t block = std::max<std::size_t>(1, options.block_rows);
  const std::size_t num_blocks = (m + block - 1) / block;
  parallel_for(0, num_blocks, options.threads, [&](std::size_t b_lo, std::size_t b_hi) {
    for (std::size_t b = b_lo; b < b_hi; ++b) {
      const std::size_t r_lo = b * block;
      const std::size_t r_hi = std::min(m, r_lo + block);
      for (std::size_t j_lo = 0; j_lo < m; j_lo += kColumnTile) {
        const std::size_t j_hi = std::min(m, j_lo + kColumnTile);
        for (std::size_t i = r_lo; i < r_hi; ++i) scan_row(i, j_lo, j_hi, rows[i]);
      }
      std::uint64_t added = 0;
      for (std::size_t i = r_lo; i < r_hi; ++i) added += rows[i].size();
      if (total_edges.fetch_add(added) + added > options.max_edges) {
        throw GuardError("edge count exceeds cap " +
                         std::to_string(options.max_edges) + "; raise tau");
      }
    }
  });
  return NeighborGraph(tau, std::move(rows));
}

void save_graph(const std::filesystem::path& path, const NeighborGraph& graph) {
  std::string out;
  out.append(kGraphMagic, 4);
  append_le<std::uint32_t>(out, kGraphVersion);
  append_le<std::uint64_t>(out, graph.size());
  append_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(graph.tau()));
  for (std::size_t i = 0; i < graph.size(); ++i) {
    const auto nbrs = graph.neighbors(i);
    append_le<std::uint32_t>(out, static_cast<std::uint32_t>(nbrs.size()));
    for (const Neighbor& n : nbrs) {
      append_le<std::uint32_t>(out, n.index);
      append_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(n.weight));
    }
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError("cannot write graph cache: " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

NeighborGraph load_graph(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open graph cache: " + path.string());
  std::ostringstream buffer;
  buffer << f.rdbuf();
  const std::string bytes = std::move(buffer).str();
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kGraphMagic, 4) != 0) {
    throw FormatError(path.string() + ": bad magic, expected NBGR");
  }
  std::size_t pos = 4;
  if (read_le<std::uint32_t>(bytes, pos) != kGraphVersion) {
    throw FormatError(path.string() + ": unsupported graph cache version");
  }
  const auto m = read_le<std::uint64_t>(bytes, pos);
  const double tau = std::bit_cast<double>(read_le<std::uint64_t>(bytes, pos));
  if (m > bytes.size()) throw FormatError(path.string() + ": bad row count");
  std::vector<std::vector<Neighbor>> rows(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto count = read_le<std::uint32_t>(bytes, pos);
    if (count > m) throw FormatError(path.string() + ": bad neighbor count");
    rows[i].reserve(count);
    for (std::uint32_t k = 0; k < count; ++k) {
      const auto idx = read_le<std::uint32_t>(bytes, pos);
      const float w = std::bit_cast<float>(read_le<std::uint32_t>(bytes, pos));
      if (idx >= m || !std::isfinite(w)) {
        throw FormatError(path.string() + ": bad edge in row " + std::to_string(i));
      }
      rows[i].push_back({idx, w});
    }
  }
  if (pos != bytes.size()) throw FormatError(path.string() + ": trailing bytes");
  return NeighborGraph(tau, std::move(rows));
}

}  // namespace nbprune
