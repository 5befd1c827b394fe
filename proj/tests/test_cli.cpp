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
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "doctest.h"
#include "json.hpp"
#include "nbprune/dataset.hpp"
#include "nbprune/pipeline.hpp"
#include "support.hpp"

using namespace nbprune;
using nlohmann::json;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::size_t line_count(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

// One shared synthetic dataset for the whole file.
const test::TempDir& data_dir() {
  static test::TempDir dir("cli_data");
  static bool made = false;
  if (!made) {
    const auto r = run_cli({"synth", "--classes", "10", "--per-class", "100", "--noise", "0.2",
                            "--out", dir.path().string()});
    REQUIRE(r.code == 0);
    made = true;
  }
  return dir;
}

std::string data(const std::string& name) { return (data_dir() / name).string(); }

}  // namespace

TEST_CASE("synth writes 1000 examples with 200 flips") {
  const auto labels = load_labels(data("noisy_labels.txt"));
  const auto truth = load_labels(data("true_labels.txt"));
  REQUIRE(labels.size() == 1000);
  std::size_t flips = 0;
  for (std::size_t i = 0; i < 1000; ++i) flips += labels[i] != truth[i];
  CHECK(flips == 200);
  const auto manifest = json::parse(test::read_file(data("manifest.json")));
  CHECK(manifest["command"] == "synth");
  CHECK(manifest["flipped"] == 200);
  CHECK(manifest["tool_version"] == cli::kToolVersion);
  CHECK(load_matrix(data("embeddings.bin"), MatrixFormat::kBinary).rows() == 1000);
}

TEST_CASE("prune writes indices, report and manifest") {
  test::TempDir out("cli_prune");
  const auto r = run_cli({"prune", "--embeddings", data("embeddings.bin"), "--probs",
                          data("probs.bin"), "--labels", data("noisy_labels.txt"),
                          "--true-labels", data("true_labels.txt"), "--method", "prune4rel",
                          "--ratio", "0.2", "--tau", "0.975", "--seed", "7", "--out",
                          out.path().string()});
  REQUIRE(r.code == 0);
  CHECK(line_count(test::read_file(out / "selected.txt")) == 200);
  const auto report = json::parse(test::read_file(out / "report.json"));
  for (const char* key : {"selected_count", "objective_value", "per_class_counts",
                          "noise_ratio", "timings", "config"}) {
    CHECK(report.contains(key));
  }
  CHECK(report["selected_count"] == 200);
  CHECK(report["per_class_counts"].size() == 10);
  CHECK(report["timings"].contains("graph_build_s"));
  CHECK(report["timings"].contains("selection_s"));
  CHECK(report["config"]["tau"] == 0.975);
  const auto manifest = json::parse(test::read_file(out / "manifest.json"));
  CHECK(manifest["command"] == "prune");
  CHECK(manifest["inputs"].size() == 4);
  CHECK(manifest["inputs"][0]["fnv1a64"].get<std::string>().size() == 16);
  CHECK(manifest["outputs"].size() == 3);
}

TEST_CASE("prune with a preset and graph cache") {
  test::TempDir out("cli_cache");
  const std::vector<std::string> base{"prune", "--embeddings", data("embeddings.bin"),
                                      "--probs", data("probs.bin"), "--method",
                                      "prune4rel", "--size", "50", "--preset", "cifar10n",
                                      "--graph-cache", (out / "g.nbgr").string(), "--out"};
  auto args = base;
  args.push_back((out / "a").string());
  REQUIRE(run_cli(args).code == 0);
  CHECK(std::filesystem::exists(out / "g.nbgr"));
  args = base;
  args.push_back((out / "b").string());
  REQUIRE(run_cli(args).code == 0);
  CHECK(test::read_file(out / "a/selected.txt") == test::read_file(out / "b/selected.txt"));
}

TEST_CASE("uniform at ratio 1 selects everything") {
  test::TempDir out("cli_uniform");
  const auto r = run_cli({"prune", "--embeddings", data("embeddings.bin"), "--method",
                          "uniform", "--ratio", "1.0", "--out", out.path().string()});
  REQUIRE(r.code == 0);
  auto sel = load_indices(out / "selected.txt");
  std::sort(sel.begin(), sel.end());
  REQUIRE(sel.size() == 1000);
  CHECK(sel.front() == 0);
  CHECK(sel.back() == 999);
}

TEST_CASE("argument errors exit 2") {
  const auto missing_tau = run_cli({"prune", "--embeddings", data("embeddings.bin"), "--probs",
                                    data("probs.bin"), "--method", "prune4rel", "--ratio", "0.2"});
  CHECK(missing_tau.code == cli::kExitArgument);
  CHECK(missing_tau.err.rfind("E_ARG", 0) == 0);
  CHECK(missing_tau.err.find("--tau") != std::string::npos);
  CHECK(line_count(missing_tau.err) == 1);

  const auto both = run_cli({"prune", "--embeddings", data("embeddings.bin"), "--method",
                             "uniform", "--ratio", "0.2", "--size", "3"});
  CHECK(both.code == 2);
  const auto neither =
      run_cli({"prune", "--embeddings", data("embeddings.bin"), "--method", "uniform"});
  CHECK(neither.code == 2);
  CHECK(neither.err.find("--size") != std::string::npos);
  const auto bad_method = run_cli({"prune", "--embeddings", data("embeddings.bin"), "--method",
                                   "glister", "--size", "3"});
  CHECK(bad_method.code == 2);
  const auto no_labels = run_cli({"prune", "--embeddings", data("embeddings.bin"), "--method",
                                  "moderate", "--size", "3"});
  CHECK(no_labels.code == 2);
  CHECK(no_labels.err.find("--labels") != std::string::npos);
  CHECK(run_cli({"frobnicate"}).code == 2);
  CHECK(run_cli({}).code == 2);
}

TEST_CASE("format errors exit 3") {
  test::TempDir tmp("cli_fmt");
  test::write_file(tmp / "junk.bin", "not a matrix");
  const auto r = run_cli({"prune", "--embeddings", (tmp / "junk.bin").string(), "--method",
                          "uniform", "--size", "3"});
  CHECK(r.code == cli::kExitFormat);
  CHECK(r.err.rfind("E_FORMAT", 0) == 0);
  CHECK(r.err.find("junk.bin") != std::string::npos);
  const auto missing = run_cli({"prune", "--embeddings", (tmp / "nope.bin").string(),
                                "--method", "uniform", "--size", "3"});
  CHECK(missing.code == 3);
}

TEST_CASE("guard errors exit 4") {
  const auto r = run_cli({"prune", "--embeddings", data("embeddings.bin"), "--probs",
                          data("probs.bin"), "--method", "prune4rel", "--size", "10", "--tau",
                          "-0.5", "--max-edges", "1000"});
  CHECK(r.code == cli::kExitGuard);
  CHECK(r.err.rfind("E_GUARD", 0) == 0);
}

TEST_CASE("eval") {
  test::TempDir tmp("cli_eval");
  const auto truth = load_labels(data("true_labels.txt"));
  const auto noisy = load_labels(data("noisy_labels.txt"));
  IndexList clean, all;
  for (std::uint32_t i = 0; i < 1000; ++i) {
    all.push_back(i);
    if (truth[i] == noisy[i] && clean.size() < 50) clean.push_back(i);
  }
  {
    std::ofstream f(tmp / "clean.txt");
    for (auto i : clean) f << i << "\n";
    std::ofstream g(tmp / "all.txt");
    for (auto i : all) g << i << "\n";
  }
  auto r = run_cli({"eval", "--selected", (tmp / "clean.txt").string(), "--noisy-labels",
                    data("noisy_labels.txt"), "--true-labels", data("true_labels.txt")});
  REQUIRE(r.code == 0);
  auto j = json::parse(r.out);
  CHECK(j["noise_ratio"] == 0.0);
  CHECK(j["selected_count"] == 50);
  r = run_cli({"eval", "--selected", (tmp / "all.txt").string(), "--noisy-labels",
               data("noisy_labels.txt"), "--true-labels", data("true_labels.txt"), "--out",
               (tmp / "e.json").string()});
  REQUIRE(r.code == 0);
  j = json::parse(test::read_file(tmp / "e.json"));
  CHECK(j["noise_ratio"].get<double>() == doctest::Approx(0.2));
  CHECK(j["per_class_counts"].size() == 10);
  r = run_cli({"eval", "--selected", (tmp / "all.txt").string(), "--noisy-labels",
               data("noisy_labels.txt")});
  CHECK(json::parse(r.out)["noise_ratio"].is_null());
  test::write_file(tmp / "bad.txt", "0\n1000\n");
  r = run_cli({"eval", "--selected", (tmp / "bad.txt").string(), "--noisy-labels",
               data("noisy_labels.txt")});
  CHECK(r.code == 3);
}

TEST_CASE("bench emits one row per size and method") {
  test::TempDir tmp("cli_bench");
  const auto r = run_cli({"bench", "--m-list", "1000,2000,4000", "--out",
                          (tmp / "b.csv").string()});
  REQUIRE(r.code == 0);
  const std::string csv = test::read_file(tmp / "b.csv");
  CHECK(csv.rfind("m,method,seconds\n", 0) == 0);
  CHECK(line_count(csv) == 1 + 9);
  CHECK(run_cli({"bench", "--m-list", "10,x"}).code == 2);
}

TEST_CASE("verify quick preset passes") {
  test::TempDir tmp("cli_verify");
  const auto r = run_cli({"verify", "--preset", "quick", "--out", tmp.path().string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("FAIL") == std::string::npos);
  CHECK(std::filesystem::exists(tmp / "verify.json"));
  CHECK(run_cli({"verify", "--preset", "everything"}).code == 2);
}

TEST_CASE("help and version") {
  CHECK(run_cli({"--help"}).code == 0);
  const auto v = run_cli({"--version"});
  CHECK(v.code == 0);
  CHECK(v.out.find(cli::kToolVersion) != std::string::npos);
}
