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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "factor_atlas/error.hpp"
#include "factor_atlas/mapping.hpp"
#include "test_support.hpp"

namespace fa = factor_atlas;
using fa::testing::from_edges;

namespace {

fa::SimilarityMatrix sim_of(const Eigen::MatrixXd& values) {
  fa::SimilarityMatrix s;
  s.values = values;
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    s.ids.push_back(100 + i);
    s.labels.push_back("J" + std::to_string(i));
  }
  return s;
}

Eigen::MatrixXd random_similarity(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) s(i, j) = s(j, i) = u(rng) * u(rng);
  }
  return s;
}

std::string pajek_text(const fa::CosineGraph& g) {
  std::ostringstream out;
  fa::write_pajek(out, g);
  return out.str();
}

fa::ScoreMatrix scores_of(const Eigen::MatrixXd& v) {
  fa::ScoreMatrix s;
  s.values = v;
  for (Eigen::Index i = 0; i < v.rows(); ++i) s.case_ids.push_back(i + 1);
  return s;
}

}  // namespace

TEST_CASE("cosine closed forms") {
  // Rows: u = (1,1,0), v = (1,0,0), w = 2u, z disjoint from v.
  const auto m = from_edges("1\t10\t1\n1\t11\t1\n2\t10\t1\n3\t10\t2\n3\t11\t2\n4\t12\t5\n");
  const auto s = fa::cosine_similarity(m);
  REQUIRE(s.ids == std::vector<fa::JournalId>{1, 2, 3, 4});
  CHECK(s.values(0, 1) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(s.values(0, 2) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.values(1, 3) == 0.0);
  for (Eigen::Index i = 0; i < 4; ++i) CHECK(s.values(i, i) == 1.0);
  CHECK((s.values - s.values.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("cosine matches a pairwise oracle in both orientations") {
  std::mt19937_64 rng(17);
  const auto m = from_edges(fa::testing::random_edges(rng, 25, 20, 0.25));
  const Eigen::MatrixXd d = fa::testing::dense_by_probe(m);
  for (auto orientation : {fa::Orientation::kCitedRows, fa::Orientation::kCitingColumns}) {
    const bool rows = orientation == fa::Orientation::kCitedRows;
    const Eigen::MatrixXd x = rows ? d : Eigen::MatrixXd(d.transpose());
    const auto s = fa::cosine_similarity(m, orientation);
    std::vector<Eigen::Index> nonzero;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      if (x.row(i).norm() > 0) nonzero.push_back(i);
    }
    REQUIRE(s.ids.size() == nonzero.size());
    CHECK(s.ids.size() + s.excluded_zero.size() == static_cast<std::size_t>(x.rows()));
    for (std::size_t a = 0; a < nonzero.size(); ++a) {
      for (std::size_t b = 0; b < nonzero.size(); ++b) {
        double dot = 0, na = 0, nb = 0;
        for (Eigen::Index c = 0; c < x.cols(); ++c) {
          dot += x(nonzero[a], c) * x(nonzero[b], c);
          na += x(nonzero[a], c) * x(nonzero[a], c);
          nb += x(nonzero[b], c) * x(nonzero[b], c);
        }
        CHECK(std::abs(s.values(Eigen::Index(a), Eigen::Index(b)) - dot / std::sqrt(na * nb)) < 1e-12);
      }
    }
  }
}

TEST_CASE("zero profiles are excluded and reported") {
  // Journal 9 is cited by nobody: it appears only as a citing column.
  const auto m = from_edges("1\t1\t3\n1\t9\t2\n2\t1\t1\n");
  const auto s = fa::cosine_similarity(m, fa::Orientation::kCitingColumns);
  CHECK(s.excluded_zero.empty());
  const auto rows = fa::cosine_similarity(m, fa::Orientation::kCitedRows);
  CHECK(rows.ids.size() == 2);
}

TEST_CASE("cosine is scale invariant") {
  const auto m1 = from_edges("1\t1\t1\n1\t2\t3\n2\t1\t4\n2\t2\t1\n");
  const auto m2 = from_edges("1\t1\t7\n1\t2\t21\n2\t1\t4\n2\t2\t1\n");
  const auto s1 = fa::cosine_similarity(m1);
  const auto s2 = fa::cosine_similarity(m2);
  CHECK(std::abs(s1.values(0, 1) - s2.values(0, 1)) < 1e-12);
}

TEST_CASE("graph construction: saturation, isolates, threshold checks") {
  Eigen::MatrixXd full = Eigen::MatrixXd::Constant(4, 4, 0.9);
  full.diagonal().setOnes();
  const auto g = fa::build_graph(sim_of(full));
  CHECK(g.nodes.size() == 4);
  CHECK(g.edges.size() == 6);
  CHECK(g.removed.empty());

  Eigen::MatrixXd iso = full;
  iso.row(2).setZero();
  iso.col(2).setZero();
  iso(2, 2) = 1.0;
  const auto gi = fa::build_graph(sim_of(iso), 0.2, 0.5);
  CHECK(gi.removed == std::vector<fa::JournalId>{102});
  CHECK(gi.nodes.size() == 3);
  CHECK(gi.edges.size() == 3);

  CHECK_THROWS_AS(fa::build_graph(sim_of(full), 0.6, 0.5), fa::Error);
  CHECK_THROWS_AS(fa::build_graph(sim_of(full), -0.1, 0.5), fa::Error);
  CHECK_THROWS_AS(fa::build_graph(sim_of(full), 0.2, 1.1), fa::Error);
  CHECK_THROWS_AS(fa::build_graph(sim_of(Eigen::MatrixXd::Identity(3, 3)), 0.2, 0.5), fa::Error);
}

TEST_CASE("graph edges equal a brute-force pair enumeration") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const auto values = random_similarity(rng, 20);
    const auto sim = sim_of(values);
    const auto g = fa::build_graph(sim, 0.2, 0.5);
    std::vector<Eigen::Index> kept;
    for (Eigen::Index i = 0; i < 20; ++i) {
      double best = 0;
      for (Eigen::Index j = 0; j < 20; ++j) {
        if (i != j) best = std::max(best, values(i, j));
      }
      if (best >= 0.2) kept.push_back(i);
    }
    REQUIRE(g.nodes.size() == kept.size());
    std::vector<std::tuple<fa::JournalId, fa::JournalId, double>> expect, got;
    for (std::size_t a = 0; a < kept.size(); ++a) {
      for (std::size_t b = a + 1; b < kept.size(); ++b) {
        if (values(kept[a], kept[b]) >= 0.5) {
          expect.emplace_back(100 + kept[a], 100 + kept[b], values(kept[a], kept[b]));
        }
      }
    }
    for (const auto& e : g.edges) {
      CHECK(e.i < e.j);
      CHECK(e.weight >= 0.5);
      got.emplace_back(g.nodes[e.i].id, g.nodes[e.j].id, e.weight);
    }
    CHECK(got == expect);
  }
}

TEST_CASE("edge count is monotone in the edge threshold") {
  std::mt19937_64 rng(29);
  const auto sim = sim_of(random_similarity(rng, 30));
  std::size_t previous = SIZE_MAX;
  for (double t = 0.2; t <= 1.0; t += 0.05) {
    const auto g = fa::build_graph(sim, 0.2, t);
    CHECK(g.edges.size() <= previous);
    previous = g.edges.size();
  }
}

TEST_CASE("smallest pajek file has exact bytes") {
  fa::CosineGraph g;
  g.nodes = {{7, "Alpha"}, {9, "Beta"}};
  g.edges = {{0, 1, 0.73456}};
  CHECK(pajek_text(g) == "*Vertices 2\n1 \"Alpha\"\n2 \"Beta\"\n*Edges\n1 2 0.7346\n");
}

TEST_CASE("pajek escapes quotes and backslashes and round-trips") {
  fa::CosineGraph g;
  g.nodes = {{1, "J \"Quoted\" Chem"}, {2, "Back\\slash"}, {3, "plain"}};
  g.edges = {{0, 2, 0.5}, {1, 2, 1.0}};
  const std::string first = pajek_text(g);
  CHECK(first.find("\"J \\\"Quoted\\\" Chem\"") != std::string::npos);
  std::istringstream in(first);
  const auto back = fa::parse_pajek(in);
  REQUIRE(back.nodes.size() == 3);
  CHECK(back.nodes[0].label == g.nodes[0].label);
  CHECK(back.nodes[1].label == g.nodes[1].label);
  CHECK(pajek_text(back) == first);
}

TEST_CASE("pajek round-trip on random graphs is byte-identical") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 25; ++trial) {
    const auto g = fa::build_graph(sim_of(random_similarity(rng, 15)), 0.1, 0.3);
    const std::string first = pajek_text(g);
    std::istringstream in(first);
    const auto back = fa::parse_pajek(in);
    REQUIRE(back.nodes.size() == g.nodes.size());
    REQUIRE(back.edges.size() == g.edges.size());
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      CHECK(back.edges[e].i == g.edges[e].i);
      CHECK(back.edges[e].j == g.edges[e].j);
      CHECK(std::abs(back.edges[e].weight - g.edges[e].weight) <= 0.00005 + 1e-12);
    }
    CHECK(pajek_text(back) == first);
  }
}

TEST_CASE("pajek file errors") {
  fa::CosineGraph g;
  g.nodes = {{1, "a"}, {2, "b"}};
  CHECK_THROWS_AS(fa::export_pajek(g, "/nonexistent-dir/x.net"), fa::Error);
  try {
    fa::export_pajek(g, "/nonexistent-dir/x.net");
  } catch (const fa::Error& e) {
    CHECK(e.kind() == fa::ErrorKind::kIo);
  }
  std::istringstream bad("*Vertices 2\n1 \"a\"\n*Edges\n");
  CHECK_THROWS_AS(fa::parse_pajek(bad), fa::Error);
  std::istringstream range("*Vertices 1\n1 \"a\"\n*Edges\n1 3 0.5\n");
  CHECK_THROWS_AS(fa::parse_pajek(range), fa::Error);

  const auto path = std::filesystem::temp_directory_path() / "factor_atlas_test.net";
  g.edges = {{0, 1, 0.5}};
  fa::export_pajek(g, path.string());
  CHECK(pajek_text(fa::import_pajek(path.string())) == pajek_text(g));
  std::filesystem::remove(path);
}

TEST_CASE("scatter with a zero threshold emits every case") {
  Eigen::MatrixXd v(4, 3);
  v << 1, 2, 3,
       0, 0, 0,
      -5, 4, 1,
      20, -30, 2;
  const auto s = fa::scatter_scores(scores_of(v), 1, 2, {0.0, fa::AxisRule::kBoth, fa::ScatterScale::kLinear});
  REQUIRE(s.points.size() == 4);
  CHECK(s.points[3].x == 20);
  CHECK(s.points[3].y == -30);
  CHECK(s.below_threshold == 0);
}

TEST_CASE("scatter signed log") {
  Eigen::MatrixXd v(3, 2);
  v << 100, -100,
       0.5, 50,
       0, 10;
  fa::ScatterOptions opts{0.0, fa::AxisRule::kEither, fa::ScatterScale::kLog};
  const auto s = fa::scatter_scores(scores_of(v), 1, 2, opts);
  REQUIRE(s.points.size() == 2);
  CHECK(s.points[0].x == doctest::Approx(2.0));
  CHECK(s.points[0].y == doctest::Approx(-2.0));
  CHECK(s.points[1].x == 0.0);
  CHECK(s.points[1].y == doctest::Approx(1.0));
  CHECK(s.excluded_log == 1);
  for (double x : {1.5, 10.0, 123.4, 1e6}) CHECK(fa::signed_log10(-x) == -fa::signed_log10(x));
}

TEST_CASE("scatter filters agree with a brute-force oracle") {
  std::mt19937_64 rng(37);
  std::normal_distribution<double> g(0.0, 12.0);
  Eigen::MatrixXd v(200, 3);
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = g(rng);
  for (auto rule : {fa::AxisRule::kBoth, fa::AxisRule::kEither}) {
    for (double t : {0.0, 5.0, 10.0, 20.0}) {
      const auto s = fa::scatter_scores(scores_of(v), 1, 3, {t, rule, fa::ScatterScale::kLinear});
      std::vector<fa::JournalId> expect;
      for (Eigen::Index i = 0; i < 200; ++i) {
        const bool a = std::abs(v(i, 0)) >= t, b = std::abs(v(i, 2)) >= t;
        if (rule == fa::AxisRule::kBoth ? (a && b) : (a || b)) expect.push_back(i + 1);
      }
      std::vector<fa::JournalId> got;
      for (const auto& p : s.points) got.push_back(p.id);
      CHECK(got == expect);
      CHECK(s.below_threshold + s.points.size() == 200);
    }
  }
}

TEST_CASE("scatter domain errors") {
  const auto s = scores_of(Eigen::MatrixXd::Ones(3, 2));
  CHECK_THROWS_AS(fa::scatter_scores(s, 1, 1), fa::Error);
  CHECK_THROWS_AS(fa::scatter_scores(s, 0, 1), fa::Error);
  CHECK_THROWS_AS(fa::scatter_scores(s, 1, 3), fa::Error);
}
