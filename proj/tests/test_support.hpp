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

// Shared fixtures and brute-force oracles for the unit tests. Nothing here
// calls into the code paths it is used to check.

#ifndef FACTOR_ATLAS_TESTS_TEST_SUPPORT_HPP_
#define FACTOR_ATLAS_TESTS_TEST_SUPPORT_HPP_

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "factor_atlas/citation_matrix.hpp"

namespace factor_atlas::testing {

inline CitationMatrix from_edges(const std::string& tsv) {
  std::istringstream in(tsv);
  return ingest_edge_list(in);
}

// Random edge list over ids [0, n) with the given fill probability.
inline std::string random_edges(std::mt19937_64& rng, int n_cited, int n_citing, double fill,
                                int max_count = 40) {
  std::bernoulli_distribution present(fill);
  std::uniform_int_distribution<int> count(1, max_count);
  std::ostringstream out;
  bool any = false;
  for (int i = 0; i < n_cited; ++i) {
    for (int j = 0; j < n_citing; ++j) {
      if (present(rng)) {
        out << i << '\t' << j << '\t' << count(rng) << '\n';
        any = true;
      }
    }
  }
  if (!any) out << "0\t0\t1\n";
  return out.str();
}

// Dense copy built by probing every cell through the public accessor.
inline Eigen::MatrixXd dense_by_probe(const CitationMatrix& m) {
  Eigen::MatrixXd d(static_cast<Eigen::Index>(m.n_cases()), static_cast<Eigen::Index>(m.n_vars()));
  for (std::size_t i = 0; i < m.n_cases(); ++i) {
    for (std::size_t j = 0; j < m.n_vars(); ++j) {
      d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          m.count(m.cases()[i], m.variables()[j]);
    }
  }
  return d;
}

inline double population_variance(const Eigen::VectorXd& x) {
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) mean += x(i);
  mean /= n;
  double ss = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) ss += (x(i) - mean) * (x(i) - mean);
  return ss / n;
}

// Pearson correlation of two columns computed pair by pair.
inline double pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const double n = static_cast<double>(x.size());
  const double mx = x.sum() / n;
  const double my = y.sum() / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    sxy += (x(i) - mx) * (y(i) - my);
    sxx += (x(i) - mx) * (x(i) - mx);
    syy += (y(i) - my) * (y(i) - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

// Random correlation matrix of size p from n Gaussian samples with a few
// planted common factors so the spectrum is not flat.
inline Eigen::MatrixXd random_correlation(std::mt19937_64& rng, int p, int n, int factors = 3) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd mix(factors, p);
  for (int f = 0; f < factors; ++f)
    for (int j = 0; j < p; ++j) mix(f, j) = normal(rng);
  Eigen::MatrixXd data(n, p);
  for (int i = 0; i < n; ++i) {
    Eigen::RowVectorXd common(factors);
    for (int f = 0; f < factors; ++f) common(f) = normal(rng);
    for (int j = 0; j < p; ++j) data(i, j) = common * mix.col(j) + normal(rng);
  }
  Eigen::MatrixXd r(p, p);
  for (int a = 0; a < p; ++a) {
    r(a, a) = 1.0;
    for (int b = 0; b < a; ++b) r(a, b) = r(b, a) = pearson(data.col(a), data.col(b));
  }
  return r;
}

inline Eigen::MatrixXd factor_data(std::mt19937_64& rng, int n, int p, int factors = 2) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd mix(factors, p);
  for (int f = 0; f < factors; ++f)
    for (int j = 0; j < p; ++j) mix(f, j) = 2.0 * normal(rng);
  Eigen::MatrixXd data(n, p);
  for (int i = 0; i < n; ++i) {
    Eigen::RowVectorXd common(factors);
    for (int f = 0; f < factors; ++f) common(f) = normal(rng);
    for (int j = 0; j < p; ++j) data(i, j) = common * mix.col(j) + normal(rng) + 3.0;
  }
  return data;
}

// Independent varimax criterion on Kaiser-normalized rows.
inline double oracle_criterion(const Eigen::MatrixXd& l, bool normalize) {
  double total = 0.0;
  const double p = static_cast<double>(l.rows());
  for (Eigen::Index j = 0; j < l.cols(); ++j) {
    double s2 = 0.0, s4 = 0.0;
    for (Eigen::Index i = 0; i < l.rows(); ++i) {
      double h = 1.0;
      if (normalize) {
        h = 0.0;
        for (Eigen::Index c = 0; c < l.cols(); ++c) h += l(i, c) * l(i, c);
        h = std::sqrt(h);
      }
      const double b = l(i, j) / h;
      s2 += b * b;
      s4 += b * b * b * b;
    }
    total += s4 / p - (s2 / p) * (s2 / p);
  }
  return total;
}

// Maximum of the criterion over planar rotations on a 1e-4 angle grid.
inline double grid_max_criterion(const Eigen::MatrixXd& l, bool normalize) {
  double best = -1.0;
  for (double theta = 0.0; theta < std::numbers::pi / 2; theta += 1e-4) {
    Eigen::Matrix2d r;
    r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    best = std::max(best, oracle_criterion(l * r, normalize));
  }
  return best;
}

inline Eigen::MatrixXd random_loadings(std::mt19937_64& rng, int p, int k) {
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  Eigen::MatrixXd l(p, k);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < k; ++j) l(i, j) = u(rng);
    if (l.row(i).norm() > 0.99) l.row(i) *= 0.99 / l.row(i).norm();
  }
  return l;
}

}  // namespace factor_atlas::testing

#endif  // FACTOR_ATLAS_TESTS_TEST_SUPPORT_HPP_
