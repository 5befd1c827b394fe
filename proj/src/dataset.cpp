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

#include "nbprune/dataset.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace nbprune {
namespace {

constexpr std::array<char, 4> kMatrixMagic = {'N', 'B', 'P', 'R'};
constexpr std::uint32_t kMatrixVersion = 1;
constexpr std::size_t kMatrixHeaderBytes = 4 + 4 + 8 + 4;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return std::move(buffer).str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write file: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("short write: " + path.string());
}

template <class T>
T read_le(const char* p) {
  T value = 0;
  for (std::size_t b = 0; b < sizeof(T); ++b) {
    value |= static_cast<T>(static_cast<unsigned char>(p[b])) << (8 * b);
  }
  return value;
}

template <class T>
void append_le(std::string& out, T value) {
  for (std::size_t b = 0; b < sizeof(T); ++b) {
    out.push_back(static_cast<char>((value >> (8 * b)) & 0xff));
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

// Splits text into lines, dropping trailing blank lines only.
std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

template <class T>
T parse_real(std::string_view token, std::size_t line_no) {
  token = trim(token);
  T value{};
  const auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || token.empty()) {
    throw FormatError("line " + std::to_string(line_no) +
                      ": not a number: '" + std::string(token) + "'");
  }
  if (!std::isfinite(value)) {
    throw FormatError("line " + std::to_string(line_no) +
                      ": non-finite value");
  }
  return value;
}

}  // namespace

void Dataset::validate() const {
  const std::size_t m = size();
  if (m == 0) throw ArgumentError("dataset is empty");
  if (num_classes == 0) throw ArgumentError("num_classes must be positive");
  if (noisy_labels.size() != m) {
    throw ArgumentError("label count " + std::to_string(noisy_labels.size()) +
                        " does not match embedding rows " + std::to_string(m));
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (noisy_labels[i] >= num_classes) {
      throw ArgumentError("label " + std::to_string(noisy_labels[i]) +
                          " at row " + std::to_string(i) + " >= num_classes");
    }
    double norm2 = 0.0;
    for (float v : embeddings.row(i)) norm2 += double{v} * v;
    if (!(norm2 > 0.0)) {
      throw ArgumentError("embedding row " + std::to_string(i) +
                          " has zero norm");
    }
  }
  if (ground_truth_labels) {
    if (ground_truth_labels->size() != m) {
      throw ArgumentError("ground-truth label count does not match rows");
    }
    for (Label y : *ground_truth_labels) {
      if (y >= num_classes) throw ArgumentError("ground-truth label out of range");
    }
  }
  if (probabilities) {
    if (probabilities->rows() != m || probabilities->cols() != num_classes) {
      throw ArgumentError("probability matrix must be m x num_classes");
    }
    validate_probabilities(*probabilities);
  }
}

std::string_view to_string(ConfidenceMetric metric) {
  switch (metric) {
    case ConfidenceMetric::kMaxProb: return "max_prob";
    case ConfidenceMetric::kDiffProb: return "diff_prob";
    case ConfidenceMetric::kExternal: return "external";
  }
  return "?";
}

ConfidenceMetric parse_confidence_metric(std::string_view name) {
  if (name == "max_prob") return ConfidenceMetric::kMaxProb;
  if (name == "diff_prob") return ConfidenceMetric::kDiffProb;
  if (name == "external") return ConfidenceMetric::kExternal;
  throw ArgumentError("unknown confidence metric: " + std::string(name));
}

std::string_view to_string(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::kLoss: return "loss";
    case ScoreKind::kForgettingEvents: return "forgetting_events";
    case ScoreKind::kGradNorm: return "grad_norm";
    case ScoreKind::kSspPrototypicality: return "ssp_prototypicality";
  }
  return "?";
}

MatrixFormat format_for_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".csv" ? MatrixFormat::kCsv : MatrixFormat::kBinary;
}

Matrix parse_csv_matrix(std::string_view text) {
  const auto lines = split_lines(text);
  std::size_t cols = 0;
  std::vector<float> values;
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::string_view line = trim(lines[li]);
    if (line.empty()) {
      throw FormatError("line " + std::to_string(li + 1) + ": empty row");
    }
    std::size_t count = 0;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::string_view token = line.substr(
          start, comma == std::string_view::npos ? std::string_view::npos
                                                 : comma - start);
      values.push_back(parse_real<float>(token, li + 1));
      ++count;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (li == 0) {
      cols = count;
    } else if (count != cols) {
      throw FormatError("line " + std::to_string(li + 1) + ": row length " +
                        std::to_string(count) + " does not match " +
                        std::to_string(cols));
    }
  }
  return Matrix(lines.size(), cols, std::move(values));
}

std::string to_csv(const Matrix& matrix) {
  std::string out;
  char buf[32];
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    for (std::size_t j = 0; j < matrix.cols(); ++j) {
      if (j > 0) out.push_back(',');
      const auto res = std::to_chars(buf, buf + sizeof(buf), matrix(i, j));
      out.append(buf, res.ptr);
    }
    out.push_back('\n');
  }
  return out;
}

Matrix load_matrix(const std::filesystem::path& path, MatrixFormat format) {
  const std::string bytes = read_file(path);
  if (format == MatrixFormat::kCsv) {
    try {
      return parse_csv_matrix(bytes);
    } catch (const FormatError& e) {
      throw FormatError(path.string() + ": " + e.what());
    }
  }
  if (bytes.size() < kMatrixHeaderBytes ||
      std::memcmp(bytes.data(), kMatrixMagic.data(), 4) != 0) {
    throw FormatError(path.string() + ": bad magic, expected NBPR");
  }
  const auto version = read_le<std::uint32_t>(bytes.data() + 4);
  if (version != kMatrixVersion) {
    throw FormatError(path.string() + ": unsupported version " +
                      std::to_string(version));
  }
  const auto rows = read_le<std::uint64_t>(bytes.data() + 8);
  const auto cols = read_le<std::uint32_t>(bytes.data() + 16);
  const std::size_t payload = bytes.size() - kMatrixHeaderBytes;
  if (cols == 0 || rows > payload / 4 / cols ||
      payload != rows * cols * 4) {
    throw FormatError(path.string() + ": payload size does not match header");
  }
  std::vector<float> values(rows * cols);
  const char* p = bytes.data() + kMatrixHeaderBytes;
  for (std::size_t k = 0; k < values.size(); ++k, p += 4) {
    const float v = std::bit_cast<float>(read_le<std::uint32_t>(p));
    if (!std::isfinite(v)) {
      throw FormatError(path.string() + ": non-finite value at row " +
                        std::to_string(k / cols));
    }
    values[k] = v;
  }
  return Matrix(rows, cols, std::move(values));
}

void save_matrix(const std::filesystem::path& path, const Matrix& matrix,
                 MatrixFormat format) {
  if (format == MatrixFormat::kCsv) {
    write_file(path, to_csv(matrix));
    return;
  }
  std::string out;
  out.reserve(kMatrixHeaderBytes + matrix.values().size() * 4);
  out.append(kMatrixMagic.data(), 4);
  append_le<std::uint32_t>(out, kMatrixVersion);
  append_le<std::uint64_t>(out, matrix.rows());
  append_le<std::uint32_t>(out, static_cast<std::uint32_t>(matrix.cols()));
  for (float v : matrix.values()) {
    append_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  }
  write_file(path, out);
}

Matrix load_embeddings(const std::filesystem::path& path, MatrixFormat format) {
  Matrix m = load_matrix(path, format);
  if (m.rows() == 0 || m.cols() == 0) {
    throw FormatError(path.string() + ": empty embedding matrix");
  }
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto row = m.row(i);
    if (std::all_of(row.begin(), row.end(), [](float v) { return v == 0.0f; })) {
      throw FormatError(path.string() + ": embedding row " + std::to_string(i) +
                        " has zero norm");
    }
  }
  return m;
}

std::vector<Label> load_labels(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::vector<Label> labels;
  const auto lines = split_lines(text);
  labels.reserve(lines.size());
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::string_view token = trim(lines[li]);
    Label value{};
    const auto [ptr, ec] =
        std::from_chars(token.data(), token.data() + token.size(), value);
    if (token.empty() || ec != std::errc() ||
        ptr != token.data() + token.size()) {
      throw FormatError(path.string() + ": line " + std::to_string(li + 1) +
                        ": not a non-negative integer");
    }
    labels.push_back(value);
  }
  return labels;
}

void save_labels(const std::filesystem::path& path,
                 std::span<const Label> labels) {
  std::string out;
  for (Label y : labels) {
    out += std::to_string(y);
    out.push_back('\n');
  }
  write_file(path, out);
}

std::vector<double> load_reals(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::vector<double> values;
  const auto lines = split_lines(text);
  values.reserve(lines.size());
  for (std::size_t li = 0; li < lines.size(); ++li) {
    try {
      values.push_back(parse_real<double>(lines[li], li + 1));
    } catch (const FormatError& e) {
      throw FormatError(path.string() + ": " + e.what());
    }
  }
  return values;
}

void save_reals(const std::filesystem::path& path,
                std::span<const double> values) {
  std::string out;
  char buf[32];
  for (double v : values) {
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
    out.push_back('\n');
  }
  write_file(path, out);
}

void validate_probabilities(const Matrix& probabilities) {
  for (std::size_t i = 0; i < probabilities.rows(); ++i) {
    double sum = 0.0;
    for (float p : probabilities.row(i)) {
      if (!(p >= 0.0f && p <= 1.0f)) {
        throw FormatError("probability row " + std::to_string(i) +
                          " has an entry outside [0, 1]");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > kProbabilityRowTolerance) {
      throw FormatError("probability row " + std::to_string(i) +
                        " sums to " + std::to_string(sum));
    }
  }
}

ConfidenceVector compute_confidence(const Matrix& probabilities,
                                    ConfidenceMetric metric) {
  if (metric == ConfidenceMetric::kExternal) {
    throw ArgumentError("external confidence cannot be derived from probabilities");
  }
  if (metric == ConfidenceMetric::kDiffProb && probabilities.cols() < 2) {
    throw ArgumentError("diff_prob needs at least two classes");
  }
  validate_probabilities(probabilities);
  ConfidenceVector out;
  out.metric = metric;
  out.values.resize(probabilities.rows());
  for (std::size_t i = 0; i < probabilities.rows(); ++i) {
    double top1 = -1.0;
    double top2 = -1.0;
    for (float p : probabilities.row(i)) {
      if (p > top1) {
        top2 = top1;
        top1 = p;
      } else if (p > top2) {
        top2 = p;
      }
    }
    out.values[i] = metric == ConfidenceMetric::kMaxProb ? top1 : top1 - top2;
  }
  return out;
}

ConfidenceVector external_confidence(std::vector<double> values,
                                     std::size_t expected_size) {
  if (values.size() != expected_size) {
    throw FormatError("confidence count " + std::to_string(values.size()) +
                      " does not match " + std::to_string(expected_size));
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= 0.0 && values[i] <= 1.0)) {
      throw FormatError("confidence at row " + std::to_string(i) +
                        " outside [0, 1]");
    }
  }
  return {std::move(values), ConfidenceMetric::kExternal};
}

AuxScores compute_small_loss_scores(const Matrix& probabilities,
                                    std::span<const Label> noisy_labels) {
  validate_probabilities(probabilities);
  if (noisy_labels.size() != probabilities.rows()) {
    throw ArgumentError("label count does not match probability rows");
  }
  AuxScores out;
  out.kind = ScoreKind::kLoss;
  out.values.resize(noisy_labels.size());
  for (std::size_t i = 0; i < noisy_labels.size(); ++i) {
    if (noisy_labels[i] >= probabilities.cols()) {
      throw ArgumentError("label " + std::to_string(noisy_labels[i]) +
                          " at row " + std::to_string(i) + " out of range");
    }
    const double p = std::max<double>(probabilities(i, noisy_labels[i]),
                                      kProbabilityFloor);
    out.values[i] = -std::log(p);
  }
  return out;
}

}  // namespace nbprune
