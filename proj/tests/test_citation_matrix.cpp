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

#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "factor_atlas/citation_matrix.hpp"
#include "factor_atlas/error.hpp"
#include "test_support.hpp"

using namespace factor_atlas;
using factor_atlas::testing::from_edges;

namespace {

ErrorKind kind_of(const std::string& tsv) {
  try {
    from_edges(tsv);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::kIo;
}

}  // namespace

TEST_CASE("ingest builds the three-edge example") {
  const auto m = from_edges("1\t2\t5\n2\t1\t2\n1\t1\t7\n");
  CHECK(m.n_cases() == 2);
  CHECK(m.n_vars() == 2);
  CHECK(m.count(1, 2) == 5);
  CHECK(m.count(2, 1) == 2);
  CHECK(m.count(1, 1) == 7);  // diagonal kept
  CHECK(m.count(2, 2) == 0);
  const auto s = compute_stats(m);
  CHECK(s.n_links == 3);
  CHECK(s.total_citations == 14);
  CHECK(s.mean_per_link == doctest::Approx(14.0 / 3.0));
  CHECK(s.density == doctest::Approx(0.75));
}

TEST_CASE("ingest accepts single citations, comments and whitespace separators") {
  const auto m = from_edges("# cited citing count\n\n3  4  1\n4 3 9\n");
  CHECK(m.count(3, 4) == 1);
  CHECK(m.cases() == std::vector<JournalId>{3, 4});
}

TEST_CASE("ingest error paths") {
  CHECK(kind_of("1\t2\t0\n") == ErrorKind::kDomain);
  CHECK(kind_of("1\t2\t-3\n") == ErrorKind::kDomain);
  CHECK(kind_of("1\t2\t5\n1\t2\t6\n") == ErrorKind::kDuplicateEdge);
  CHECK(kind_of("") == ErrorKind::kEmptyCorpus);
  CHECK(kind_of("# only a header\n") == ErrorKind::kEmptyCorpus);
  CHECK(kind_of("1\t2\n") == ErrorKind::kParse);
  CHECK(kind_of("1\t2\t2.5\n") == ErrorKind::kParse);
  CHECK(kind_of("A\tB\t3\n") == ErrorKind::kParse);

  try {
    from_edges("1\t2\t5\n2\t1\tx\n");
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("ingest attaches labels and can drop the diagonal") {
  std::istringstream labels_in("1\tJ BIOL CHEM\n2\tNATURE\n9\tUNUSED\n");
  const LabelMap labels = read_label_map(labels_in);
  std::istringstream edges("1\t2\t5\n1\t1\t7\n");
  const auto m = ingest_edge_list(edges, &labels);
  CHECK(m.label(1) == "J BIOL CHEM");
  CHECK(m.label(2) == "NATURE");
  CHECK(m.labels().count(9) == 0);

  std::istringstream again("1\t2\t5\n1\t1\t7\n");
  const auto dropped = ingest_edge_list(again, nullptr, {.drop_diagonal = true});
  CHECK(dropped.count(1, 1) == 0);
  CHECK(compute_stats(dropped).total_citations == 5);
}

TEST_CASE("journal records carry cited/citing roles") {
  const auto m = from_edges("1\t2\t5\n3\t2\t1\n");
  const auto journals = m.journals();
  REQUIRE(journals.size() == 3);
  CHECK(journals[0].is_cited);
  CHECK_FALSE(journals[0].is_citing);
  CHECK(journals[1].is_citing);
  CHECK_FALSE(journals[1].is_cited);
}

TEST_CASE("stats on the published corpus shape") {
  const auto s = derive_stats(5907, 5714, 971502, 17604594);
  CHECK(round_significant(s.density * 100.0, 3) == doctest::Approx(2.88));
  CHECK(s.mean_per_link == doctest::Approx(18.12).epsilon(0.0003));
  CHECK(round_significant(s.density, 4) == doctest::Approx(0.02878));
  CHECK(derive_stats(3, 3, 0, 0).empty_links);
  CHECK(derive_stats(3, 3, 0, 0).mean_per_link == 0.0);
}

TEST_CASE("stats match a brute-force recount over every cell") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = from_edges(testing::random_edges(rng, 15, 12, 0.2));
    const auto dense = testing::dense_by_probe(m);
    std::size_t links = 0;
    double total = 0.0;
    for (Eigen::Index i = 0; i < dense.rows(); ++i)
      for (Eigen::Index j = 0; j < dense.cols(); ++j)
        if (dense(i, j) != 0.0) {
          ++links;
          total += dense(i, j);
        }
    const auto s = compute_stats(m);
    CHECK(s.n_links == links);
    CHECK(s.total_citations == total);
    CHECK(s.density >= 0.0);
    CHECK(s.density <= 1.0);
    CHECK(s.mean_per_link >= 1.0);
  }
}

TEST_CASE("ingest is insensitive to line order") {
  std::mt19937_64 rng(11);
  const std::string edges = testing::random_edges(rng, 10, 10, 0.3);
  std::vector<std::string> lines;
  std::istringstream in(edges);
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  std::shuffle(lines.begin(), lines.end(), rng);
  std::string shuffled;
  for (const auto& l : lines) shuffled += l + "\n";
  std::ostringstream a, b;
  write_matrix(a, from_edges(edges));
  write_matrix(b, from_edges(shuffled));
  CHECK(a.str() == b.str());
}

TEST_CASE("column variance uses the population formula over all cases") {
  // Cases 1..3; citing journal 9 only cites case 3 four times.
  const auto m = from_edges("1\t8\t2\n2\t8\t2\n3\t8\t2\n3\t9\t4\n");
  CHECK(column_variance(m, 9) == doctest::Approx(32.0 / 9.0).epsilon(1e-14));
  CHECK(column_variance(m, 8) == 0.0);  // constant column
  CHECK_THROWS_AS(column_variance(m, 77), Error);

  const auto all_zero = restrict_to(from_edges("1\t2\t3\n5\t6\t1\n"), {1, 6});
  CHECK(column_variance(all_zero, 6) == 0.0);
}

TEST_CASE("filter_by_variance keeps exactly the columns at or above the threshold") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const auto m = from_edges(testing::random_edges(rng, 20, 15, 0.25, 20));
    const auto dense = testing::dense_by_probe(m);
    const double threshold = 8.0;
    std::vector<JournalId> expected;
    for (Eigen::Index j = 0; j < dense.cols(); ++j) {
      if (testing::population_variance(dense.col(j)) >= threshold) {
        expected.push_back(m.variables()[static_cast<std::size_t>(j)]);
      }
    }
    if (expected.empty()) {
      CHECK_THROWS_AS(filter_by_variance(m, threshold), Error);
      continue;
    }
    const auto f = filter_by_variance(m, threshold);
    CHECK(f.matrix.variables() == expected);
    CHECK(f.matrix.cases() == m.cases());
    CHECK(f.dropped.size() + expected.size() == m.n_vars());
    // Idempotent at the same threshold.
    const auto again = filter_by_variance(f.matrix, threshold);
    CHECK(again.matrix.variables() == f.matrix.variables());
    CHECK(again.dropped.empty());
  }
}

TEST_CASE("filter_by_variance edge cases") {
  const auto m = from_edges("1\t2\t5\n2\t1\t2\n1\t1\t7\n");
  const auto same = filter_by_variance(m, 0.0);
  CHECK(same.matrix.variables() == m.variables());
  CHECK(same.dropped.empty());
  CHECK_THROWS_AS(filter_by_variance(m, 1e9), Error);
  CHECK_THROWS_AS(filter_by_variance(m, -1.0), Error);
}

TEST_CASE("subset restricts variables to selected journals that cite") {
  // Journal 4 is cited but never cites.
  const auto m = from_edges("1\t2\t5\n2\t1\t2\n1\t1\t7\n4\t1\t3\n4\t2\t1\n2\t3\t6\n");
  const auto all = subset(m, {1, 2, 4});
  CHECK(all.matrix.cases() == std::vector<JournalId>{1, 2, 4});
  CHECK(all.matrix.variables() == std::vector<JournalId>{1, 2});
  CHECK(all.not_citing == std::vector<JournalId>{4});
  CHECK(compute_stats(all.matrix).total_citations <= compute_stats(m).total_citations);

  CHECK_THROWS_AS(subset(m, {}), Error);
  CHECK_THROWS_AS(subset(m, {99}), Error);
  try {
    subset(m, {4});  // no citing column survives
    FAIL("expected degenerate subset");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kDegenerate);
  }
}

TEST_CASE("subset reports columns that become constant") {
  // Over cases {1, 2, 3}, column 3 is all zero.
  const auto m = from_edges("1\t1\t4\n2\t2\t4\n3\t1\t1\n5\t3\t2\n1\t2\t1\n");
  const auto s = subset(m, {1, 2, 3});
  CHECK(std::find(s.zero_variance.begin(), s.zero_variance.end(), 3) != s.zero_variance.end());
  CHECK(!s.matrix.variable_index(3).has_value());
}

TEST_CASE("subset composes: subset(subset(m, S), T) == subset(m, T)") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 25; ++trial) {
    const auto m = from_edges(testing::random_edges(rng, 25, 25, 0.3));
    std::set<JournalId> s_ids, t_ids;
    std::bernoulli_distribution coin(0.7);
    for (JournalId id : m.cases())
      if (coin(rng)) s_ids.insert(id);
    for (JournalId id : s_ids)
      if (coin(rng)) t_ids.insert(id);
    if (t_ids.size() < 3) continue;
    try {
      const auto outer = subset(m, s_ids);
      const auto nested = subset(outer.matrix, t_ids);
      const auto direct = subset(m, t_ids);
      std::ostringstream a, b;
      write_matrix(a, nested.matrix);
      write_matrix(b, direct.matrix);
      CHECK(a.str() == b.str());
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kDegenerate);
    }
  }
}

TEST_CASE("matrix file round trip") {
  std::mt19937_64 rng(9);
  LabelMap labels{{0, "J A"}, {3, "PHYS REV B"}};
  std::istringstream in(testing::random_edges(rng, 8, 8, 0.4));
  const auto m = ingest_edge_list(in, &labels);
  std::ostringstream first;
  write_matrix(first, m);
  std::istringstream back(first.str());
  std::ostringstream second;
  write_matrix(second, read_matrix(back));
  CHECK(first.str() == second.str());

  std::istringstream junk("not a matrix\n");
  CHECK_THROWS_AS(read_matrix(junk), Error);
}
