// Copyright 2026 The Factor Atlas Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <filesystem>
#include <random>
#include <sstream>

#include "doctest.h"
#include "factor_atlas/pipeline.hpp"
#include "factor_atlas/synth_bench.hpp"

namespace fa = factor_atlas;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("factor_atlas_pipeline_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string block_corpus(const fs::path& dir) {
  fa::BlockSpec spec;
  spec.seed = 42;
  const auto corpus = fa::generate_block_model(spec);
  const auto path = (dir / "edges.tsv").string();
  std::ostringstream out;
  fa::write_edge_list(out, corpus.matrix);
  fa::write_text_file(path, out.str());
  return path;
}

std::vector<std::pair<std::string, std::string>> hashes(const fa::Json& manifest) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& stage : manifest["stages"]) {
    for (const auto& a : stage["artifacts"]) out.emplace_back(a["path"], a["sha256"]);
  }
  return out;
}

}  // namespace

TEST_CASE("config text round-trips losslessly") {
  fa::RunConfig c;
  std::istringstream defaults(fa::to_text(c));
  CHECK(fa::parse_run_config(defaults) == c);

  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    fa::RunConfig r;
    r.input = "data dir/\"edges\" #" + std::to_string(trial) + ".tsv";
    r.labels = trial % 2 ? "labels.tsv" : "";
    r.variance_threshold = u(rng) * 20;
    r.k = 1 + rng() % 40;
    r.route = static_cast<fa::EigenRoute>(rng() % 3);
    r.seed = rng() >> 1;
    r.rotate = rng() % 2;
    r.varimax_tolerance = u(rng) * 1e-5;
    r.isolate_cos = u(rng) * 0.5;
    r.edge_cos = 0.5 + u(rng) * 0.5;
    r.compare_factors = {1 + rng() % 5, 2 + rng() % 5};
    r.orientation = rng() % 2 ? fa::Orientation::kCitedRows : fa::Orientation::kCitingColumns;
    r.scatter_axis = rng() % 2 ? fa::AxisRule::kBoth : fa::AxisRule::kEither;
    r.scatter_min_abs = u(rng) * 30;
    r.threads = 1 + static_cast<int>(rng() % 8);
    std::istringstream in(fa::to_text(r));
    CHECK(fa::parse_run_config(in) == r);
  }
}

TEST_CASE("config parsing: comments, overrides and errors") {
  std::istringstream in("# run\ninput = edges.tsv\nk = 6\n\nrotate = false\n");
  auto c = fa::parse_run_config(in);
  CHECK(c.input == "edges.tsv");
  CHECK(c.k == 6);
  CHECK_FALSE(c.rotate);
  fa::set_option(c, "k", "8");
  CHECK(c.k == 8);
  CHECK_THROWS_AS(fa::set_option(c, "bogus", "1"), fa::Error);
  CHECK_THROWS_AS(fa::set_option(c, "k", "many"), fa::Error);
  CHECK_THROWS_AS(fa::set_option(c, "rotate", "maybe"), fa::Error);
  std::istringstream bad("input edges.tsv\n");
  CHECK_THROWS_AS(fa::parse_run_config(bad), fa::Error);
  CHECK(fa::option_keys().size() == 27);

  c.isolate_cos = 0.6;
  CHECK_THROWS_AS(fa::validate(c), fa::Error);
}

TEST_CASE("pipeline on a block corpus: eight stages, reproducible hashes") {
  const auto dir = scratch("block");
  fa::RunConfig c;
  c.input = block_corpus(dir);
  c.output_dir = (dir / "run1").string();
  const auto first = fa::run_pipeline(c);
  CHECK(first["status"] == "ok");
  REQUIRE(first["stages"].size() == 8);
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(first["stages"][i]["name"] == fa::default_stages()[i]);
    CHECK(first["stages"][i]["status"] == "ok");
  }
  CHECK(fs::exists(dir / "run1" / "manifest.json"));
  CHECK(fs::exists(dir / "run1" / "map.net"));
  for (const auto& [path, sha] : hashes(first)) {
    CHECK(fa::sha256_file((dir / "run1" / path).string()) == sha);
  }

  c.output_dir = (dir / "run2").string();
  const auto second = fa::run_pipeline(c);
  CHECK(hashes(first) == hashes(second));
  CHECK(!hashes(first).empty());
}

TEST_CASE("optional drill and compare stages") {
  const auto dir = scratch("optional");
  fa::RunConfig c;
  c.input = block_corpus(dir);
  c.output_dir = (dir / "out").string();
  c.drill = true;
  c.drill_k = 3;
  c.compare = true;
  const auto m = fa::run_pipeline(c);
  REQUIRE(m["stages"].size() == 10);
  CHECK(m["stages"][7]["name"] == "drill");
  CHECK(m["stages"][9]["name"] == "compare");
  CHECK(fs::exists(dir / "out" / "drill" / "model.json"));
  CHECK(fs::exists(dir / "out" / "compare.json"));
}

TEST_CASE("missing input aborts at ingest with a partial manifest") {
  const auto dir = scratch("missing");
  fa::RunConfig c;
  c.input = (dir / "nope.tsv").string();
  c.output_dir = (dir / "out").string();
  try {
    fa::run_pipeline(c);
    FAIL("expected an error");
  } catch (const fa::StageError& e) {
    CHECK(e.stage() == "ingest");
    CHECK(e.kind() == fa::ErrorKind::kIo);
  }
  const auto manifest = fa::load_json((dir / "out" / "manifest.json").string());
  CHECK(manifest["status"] == "failed");
  CHECK(manifest["failed_stage"] == "ingest");
}

TEST_CASE("k = 1 with rotation aborts at rotate") {
  const auto dir = scratch("k1");
  fa::RunConfig c;
  c.input = block_corpus(dir);
  c.output_dir = (dir / "out").string();
  c.k = 1;
  try {
    fa::run_pipeline(c);
    FAIL("expected an error");
  } catch (const fa::StageError& e) {
    CHECK(e.stage() == "rotate");
    CHECK(e.kind() == fa::ErrorKind::kDomain);
  }
  const auto manifest = fa::load_json((dir / "out" / "manifest.json").string());
  CHECK(manifest["failed_stage"] == "rotate");
  CHECK(manifest["stages"].size() == 4);
  CHECK(manifest["stages"][2]["status"] == "ok");
}
