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

#include "factor_atlas/factor_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <utility>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "factor_atlas/error.hpp"
#include "factor_atlas/text.hpp"

namespace factor_atlas {
namespace {

constexpr double kEigenFloor = 1e-9;
constexpr double kResidualLimit = 1e-8;

std::vector<JournalId> default_ids(Eigen::Index n) {
  std::vector<JournalId> ids(static_cast<std::size_t>(n));
  std::iota(ids.begin(), ids.end(), JournalId{0});
  return ids;
}

std::string id_list(const std::vector<JournalId>& ids, std::size_t limit = 20) {
  std::string out;
  for (std::size_t i = 0; i < ids.size() && i < limit; ++i) {
    if (i) out += ", ";
    out += std::to_string(ids[i]);
  }
  if (ids.size() > limit) out += ", ... (" + std::to_string(ids.size()) + " total)";
  return out;
}

Eigen::Index first_nonzero(const Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::fabs(v(i)) > 1e-12) return i;
  }
  return v.size();
}

// Sorts eigenpairs descending, breaks ties among (numerically) equal
// eigenvalues by the position of the first nonzero eigenvector entry, then
// flips each vector so its largest-magnitude entry is positive.
void order_and_orient(Eigen::VectorXd& values, Eigen::MatrixXd& vectors) {
  const Eigen::Index m = values.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return values(a) > values(b); });
  auto tied = [&](Eigen::Index a, Eigen::Index b) {
    return std::fabs(values(a) - values(b)) <= 1e-10 * std::max(1.0, std::fabs(values(a)));
  };
  for (std::size_t start = 0; start < order.size();) {
    std::size_t end = start + 1;
    while (end < order.size() && tied(order[start], order[end])) ++end;
    if (end - start > 1) {
      std::stable_sort(order.begin() + static_cast<std::ptrdiff_t>(start),
                       order.begin() + static_cast<std::ptrdiff_t>(end),
                       [&](Eigen::Index a, Eigen::Index b) {
                         return first_nonzero(vectors.col(a)) < first_nonzero(vectors.col(b));
                       });
    }
    start = end;
  }

  Eigen::VectorXd sorted_values(m);
  Eigen::MatrixXd sorted_vectors(vectors.rows(), m);
  for (Eigen::Index j = 0; j < m; ++j) {
    sorted_values(j) = values(order[static_cast<std::size_t>(j)]);
    sorted_vectors.col(j) = vectors.col(order[static_cast<std::size_t>(j)]);
    Eigen::Index argmax = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < sorted_vectors.rows(); ++i) {
      const double a = std::fabs(sorted_vectors(i, j));
      if (a > best) {
        best = a;
        argmax = i;
      }
    }
    if (sorted_vectors.rows() > 0 && sorted_vectors(argmax, j) < 0) {
      sorted_vectors.col(j) = -sorted_vectors.col(j);
    }
  }
  values = std::move(sorted_values);
  vectors = std::move(sorted_vectors);
}

void clamp_eigenvalues(Eigen::VectorXd& values) {
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values(i) < 0.0) {
      if (values(i) > -kEigenFloor) {
        values(i) = 0.0;
      } else {
        throw Error(ErrorKind::kDomain, "eigenvalue " + text::format_exact(values(i)) +
                                            " is negative: input is not a correlation matrix");
      }
    }
  }
}

Extraction assemble(Eigen::VectorXd values, Eigen::MatrixXd vectors, std::size_t n_vars,
                    std::size_t k, bool complete, std::vector<JournalId> ids) {
  order_and_orient(values, vectors);
  Extraction ex;
  ex.spectrum.eigenvalues = values;
  ex.spectrum.explained = values / static_cast<double>(n_vars);
  ex.spectrum.n_vars = n_vars;
  ex.spectrum.complete = complete;
  const auto kk = static_cast<Eigen::Index>(k);
  ex.loadings.values = vectors.leftCols(kk) * values.head(kk).cwiseSqrt().asDiagonal();
  ex.loadings.variable_ids = std::move(ids);
  ex.loadings.rotated = false;
  return ex;
}

Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& a) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  return qr.householderQ() * Eigen::MatrixXd::Identity(a.rows(), a.cols());
}

}  // namespace

StandardizedMatrix::StandardizedMatrix(SparseCounts raw, std::vector<JournalId> ids)
    : raw_(std::move(raw)), variable_ids_(std::move(ids)) {
  const Eigen::Index n = raw_.rows();
  const Eigen::Index p = raw_.cols();
  if (n == 0 || p == 0) throw Error(ErrorKind::kDegenerate, "cannot standardize an empty matrix");
  means_.resize(p);
  sds_.resize(p);
  std::vector<JournalId> degenerate;
  for (Eigen::Index j = 0; j < p; ++j) {
    double sum = 0.0;
    Eigen::Index nnz = 0;
    for (SparseCounts::InnerIterator it(raw_, j); it; ++it) {
      sum += it.value();
      ++nnz;
    }
    const double mean = sum / static_cast<double>(n);
    double ss = static_cast<double>(n - nnz) * mean * mean;
    for (SparseCounts::InnerIterator it(raw_, j); it; ++it) {
      const double d = it.value() - mean;
      ss += d * d;
    }
    means_(j) = mean;
    sds_(j) = std::sqrt(ss / static_cast<double>(n));
    if (!(sds_(j) > 0.0)) degenerate.push_back(variable_ids_[static_cast<std::size_t>(j)]);
  }
  if (!degenerate.empty()) {
    throw Error(ErrorKind::kDegenerate,
                "zero-variance variables cannot be standardized: " + id_list(degenerate));
  }
}

StandardizedMatrix StandardizedMatrix::from_counts(const CitationMatrix& m) {
  return StandardizedMatrix(m.cells(), m.variables());
}

StandardizedMatrix StandardizedMatrix::from_dense(const Eigen::MatrixXd& data,
                                                  std::vector<JournalId> variable_ids) {
  if (variable_ids.empty()) variable_ids = default_ids(data.cols());
  if (static_cast<Eigen::Index>(variable_ids.size()) != data.cols()) {
    throw Error(ErrorKind::kDomain, "variable id count does not match column count");
  }
  SparseCounts raw = data.sparseView();
  return StandardizedMatrix(std::move(raw), std::move(variable_ids));
}

Eigen::MatrixXd StandardizedMatrix::multiply(const Eigen::MatrixXd& w) const {
  const Eigen::MatrixXd scaled = sds_.cwiseInverse().asDiagonal() * w;
  Eigen::MatrixXd out = raw_ * scaled;
  const Eigen::RowVectorXd shift = means_.transpose() * scaled;
  out.rowwise() -= shift;
  return out;
}

Eigen::MatrixXd StandardizedMatrix::transpose_multiply(const Eigen::MatrixXd& u) const {
  Eigen::MatrixXd out = raw_.transpose() * u;
  const Eigen::RowVectorXd col_sums = u.colwise().sum();
  out -= means_ * col_sums;
  return sds_.cwiseInverse().asDiagonal() * out;
}

Eigen::MatrixXd StandardizedMatrix::dense() const {
  Eigen::MatrixXd z = Eigen::MatrixXd(raw_);
  z.rowwise() -= means_.transpose();
  return z * sds_.cwiseInverse().asDiagonal();
}

Eigen::MatrixXd StandardizedMatrix::correlation() const {
  const double n = static_cast<double>(raw_.rows());
  const Eigen::Index p = raw_.cols();
  const SparseCounts gram_sparse = (raw_.transpose() * raw_).pruned();
  const Eigen::MatrixXd gram = Eigen::MatrixXd(gram_sparse);
  const Eigen::VectorXd sums = means_ * n;
  Eigen::MatrixXd r(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    r(j, j) = 1.0;
    for (Eigen::Index i = 0; i < j; ++i) {
      const double cov = (gram(i, j) - sums(i) * sums(j) / n) / n;
      const double v = std::clamp(cov / (sds_(i) * sds_(j)), -1.0, 1.0);
      r(i, j) = v;
      r(j, i) = v;
    }
  }
  return r;
}

Eigen::MatrixXd correlation(const CitationMatrix& m) {
  return StandardizedMatrix::from_counts(m).correlation();
}

Extraction eigendecompose(const Eigen::MatrixXd& corr, std::size_t k,
                          std::vector<JournalId> variable_ids) {
  const Eigen::Index p = corr.rows();
  if (p == 0 || corr.cols() != p) throw Error(ErrorKind::kDomain, "correlation matrix must be square and non-empty");
  if (k == kAllFactors) k = static_cast<std::size_t>(p);
  if (k > static_cast<std::size_t>(p)) {
    throw Error(ErrorKind::kDomain, "requested " + std::to_string(k) + " factors from " +
                                        std::to_string(p) + " variables");
  }
  const double asym = (corr - corr.transpose()).cwiseAbs().maxCoeff();
  if (!(asym <= 1e-12)) {
    throw Error(ErrorKind::kDomain, "correlation matrix is not symmetric (max |R - R^T| = " +
                                        text::format_exact(asym) + ")");
  }
  if (!((corr.diagonal().array() - 1.0).abs().maxCoeff() <= 1e-9)) {
    throw Error(ErrorKind::kDomain, "correlation matrix must have a unit diagonal");
  }
  if (variable_ids.empty()) variable_ids = default_ids(p);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(corr);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::kNumerical, "symmetric eigensolver did not converge");
  }
  Eigen::VectorXd values = solver.eigenvalues();
  Eigen::MatrixXd vectors = solver.eigenvectors();
  const double residual =
      (corr * vectors - vectors * values.asDiagonal()).cwiseAbs().maxCoeff();
  if (!(residual <= kResidualLimit * std::max(1.0, static_cast<double>(p) / 100.0))) {
    throw Error(ErrorKind::kNumerical,
                "eigen decomposition residual " + text::format_exact(residual) + " too large");
  }
  clamp_eigenvalues(values);
  return assemble(std::move(values), std::move(vectors), static_cast<std::size_t>(p), k, true,
                  std::move(variable_ids));
}

Extraction eigendecompose_implicit(const StandardizedMatrix& z, std::size_t k,
                                   ImplicitOptions options) {
  const Eigen::Index p = z.cols();
  const double n = static_cast<double>(z.rows());
  if (k == kAllFactors) k = static_cast<std::size_t>(p);
  if (k > static_cast<std::size_t>(p)) {
    throw Error(ErrorKind::kDomain, "requested " + std::to_string(k) + " factors from " +
                                        std::to_string(p) + " variables");
  }
  const auto kk = static_cast<Eigen::Index>(k);
  const Eigen::Index block = std::min<Eigen::Index>(p, std::max<Eigen::Index>(2 * kk, kk + 8));

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd start(p, block);
  for (Eigen::Index j = 0; j < block; ++j) {
    for (Eigen::Index i = 0; i < p; ++i) start(i, j) = normal(rng);
  }
  Eigen::MatrixXd q = orthonormal_basis(start);
  auto apply = [&](const Eigen::MatrixXd& v) -> Eigen::MatrixXd {
    return z.transpose_multiply(z.multiply(v)) / n;
  };

  double worst = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    const Eigen::MatrixXd aq = apply(q);
    Eigen::MatrixXd h = q.transpose() * aq;
    h = 0.5 * (h + h.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(h);
    // Ritz pairs, descending.
    const Eigen::VectorXd theta = small.eigenvalues().reverse();
    const Eigen::MatrixXd w = small.eigenvectors().rowwise().reverse();
    const Eigen::MatrixXd u = q * w;
    const Eigen::MatrixXd au = aq * w;
    worst = 0.0;
    for (Eigen::Index j = 0; j < kk; ++j) {
      worst = std::max(worst, (au.col(j) - theta(j) * u.col(j)).norm());
    }
    if (worst <= options.tolerance) {
      Eigen::VectorXd values = theta.head(kk);
      Eigen::MatrixXd vectors = u.leftCols(kk);
      clamp_eigenvalues(values);
      return assemble(std::move(values), std::move(vectors), static_cast<std::size_t>(p), k,
                      kk == p, z.variable_ids());
    }
    q = orthonormal_basis(au);
  }
  throw Error(ErrorKind::kNumerical, "subspace iteration did not converge after " +
                                         std::to_string(options.max_iterations) +
                                         " iterations (residual " + text::format_exact(worst) + ")");
}

std::size_t kaiser_count(const EigenSpectrum& s) {
  // Strictly greater than one; the slack absorbs round-off on exact ties.
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) {
    if (s.eigenvalues(i) > 1.0 + 1e-12) ++count;
  }
  return count;
}

std::size_t count_above_share(const EigenSpectrum& s, double share) {
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < s.explained.size(); ++i) {
    if (s.explained(i) > share) ++count;
  }
  return count;
}

std::vector<ScreeRow> scree(const EigenSpectrum& s, std::size_t n) {
  if (n > static_cast<std::size_t>(s.eigenvalues.size())) {
    throw Error(ErrorKind::kDomain, "scree length " + std::to_string(n) + " exceeds spectrum size " +
                                        std::to_string(s.eigenvalues.size()));
  }
  std::vector<ScreeRow> rows(n);
  double cumulative = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    cumulative += s.explained(ii);
    rows[i] = {i + 1, s.eigenvalues(ii), s.explained(ii), cumulative};
  }
  return rows;
}

double varimax_criterion(const Eigen::MatrixXd& b) {
  if (b.rows() == 0) return 0.0;
  const double p = static_cast<double>(b.rows());
  double total = 0.0;
  for (Eigen::Index j = 0; j < b.cols(); ++j) {
    const Eigen::ArrayXd sq = b.col(j).array().square();
    const double mean_sq = sq.sum() / p;
    total += sq.square().sum() / p - mean_sq * mean_sq;
  }
  return total;
}

Eigen::MatrixXd kaiser_normalized(const Eigen::MatrixXd& loadings) {
  Eigen::MatrixXd out = loadings;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double h = out.row(i).norm();
    if (h > 1e-12) out.row(i) /= h;
  }
  return out;
}

VarimaxResult varimax_rotate(const Eigen::MatrixXd& loadings, VarimaxOptions options) {
  const Eigen::Index k = loadings.cols();
  if (k < 2) {
    throw Error(ErrorKind::kDomain, "varimax needs at least 2 factors, got " + std::to_string(k));
  }
  if (options.max_sweeps < 1) throw Error(ErrorKind::kDomain, "max_sweeps must be >= 1");

  // Zero-communality rows carry no information for the criterion and
  // rotate to zero anyway.
  std::vector<Eigen::Index> active;
  for (Eigen::Index i = 0; i < loadings.rows(); ++i) {
    if (loadings.row(i).norm() > 1e-12) active.push_back(i);
  }
  Eigen::MatrixXd b(static_cast<Eigen::Index>(active.size()), k);
  for (std::size_t r = 0; r < active.size(); ++r) {
    b.row(static_cast<Eigen::Index>(r)) = loadings.row(active[r]);
  }
  if (options.kaiser_normalize) b = kaiser_normalized(b);

  const double p = std::max<double>(1.0, static_cast<double>(b.rows()));
  Eigen::MatrixXd t = Eigen::MatrixXd::Identity(k, k);
  VarimaxResult result;
  double criterion = varimax_criterion(b);
  result.criterion_trace.push_back(criterion);

  for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    for (Eigen::Index a = 0; a + 1 < k; ++a) {
      for (Eigen::Index c = a + 1; c < k; ++c) {
        const Eigen::ArrayXd x = b.col(a).array();
        const Eigen::ArrayXd y = b.col(c).array();
        const Eigen::ArrayXd u = x.square() - y.square();
        const Eigen::ArrayXd v = 2.0 * x * y;
        const double su = u.sum();
        const double sv = v.sum();
        const double num = 2.0 * (u * v).sum() - 2.0 * su * sv / p;
        const double den = (u.square() - v.square()).sum() - (su * su - sv * sv) / p;
        const double phi = 0.25 * std::atan2(num, den);
        if (phi == 0.0) continue;
        const double cs = std::cos(phi);
        const double sn = std::sin(phi);
        const Eigen::VectorXd ba = b.col(a);
        b.col(a) = cs * ba + sn * b.col(c);
        b.col(c) = -sn * ba + cs * b.col(c);
        const Eigen::VectorXd ta = t.col(a);
        t.col(a) = cs * ta + sn * t.col(c);
        t.col(c) = -sn * ta + cs * t.col(c);
      }
    }
    const double next = varimax_criterion(b);
    result.criterion_trace.push_back(next);
    result.sweeps = sweep;
    const double gain = next - criterion;
    criterion = next;
    if (gain < options.tolerance) {
      result.converged = true;
      break;
    }
  }
  result.criterion = criterion;
  result.transform = t;
  result.loadings = loadings * t;
  return result;
}

FactorModel make_model(Extraction extraction) {
  FactorModel model;
  model.variable_ids = extraction.loadings.variable_ids;
  model.spectrum = std::move(extraction.spectrum);
  model.unrotated = extraction.loadings.values;
  model.loadings = std::move(extraction.loadings);
  return model;
}

void rotate_varimax(FactorModel& model, VarimaxOptions options) {
  VarimaxResult vr = varimax_rotate(model.unrotated, options);
  for (Eigen::Index j = 0; j < vr.loadings.cols(); ++j) {
    if (vr.loadings.col(j).array().cube().sum() < 0.0) {
      vr.loadings.col(j) = -vr.loadings.col(j);
      vr.transform.col(j) = -vr.transform.col(j);
    }
  }
  if (!vr.converged) {
    model.warnings.push_back("varimax did not converge within " +
                             std::to_string(options.max_sweeps) + " sweeps");
  }
  model.loadings.values = std::move(vr.loadings);
  model.loadings.rotated = true;
  model.rotation = RotationInfo{std::move(vr.transform), vr.sweeps,     vr.converged,
                                options.kaiser_normalize, vr.criterion, std::move(vr.criterion_trace)};
  model.score_coefficients.resize(0, 0);
}

ScoreMatrix factor_scores(FactorModel& model, const StandardizedMatrix& z,
                          const Eigen::MatrixXd& corr, std::vector<JournalId> case_ids,
                          ScoreOptions options) {
  const Eigen::Index p = static_cast<Eigen::Index>(model.variable_ids.size());
  if (z.cols() != p || model.unrotated.rows() != p) {
    throw Error(ErrorKind::kDomain, "model and standardized matrix do not share the variable set");
  }
  if (case_ids.empty()) case_ids = default_ids(z.rows());
  const Eigen::Index k = model.unrotated.cols();

  Eigen::MatrixXd coefficients(p, k);
  if (!model.rotated()) {
    for (Eigen::Index j = 0; j < k; ++j) {
      const double lambda = model.spectrum.eigenvalues(j);
      if (!(lambda > 1e-12)) {
        throw Error(ErrorKind::kIllConditioned,
                    "factor " + std::to_string(j + 1) +
                        " has a zero eigenvalue; extract fewer factors");
      }
      coefficients.col(j) = model.unrotated.col(j) / lambda;
    }
  } else {
    if (corr.rows() != p || corr.cols() != p) {
      throw Error(ErrorKind::kDomain, "correlation matrix does not match the model");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(corr);
    if (solver.info() != Eigen::Success) {
      throw Error(ErrorKind::kNumerical, "eigensolver failed while inverting the correlation matrix");
    }
    Eigen::VectorXd values = solver.eigenvalues();
    const double top = values.maxCoeff();
    const double bottom = values.minCoeff();
    const double condition = bottom > 0.0 ? top / bottom : std::numeric_limits<double>::infinity();
    double shift = 0.0;
    if (condition > options.max_condition) {
      if (!(options.ridge > 0.0)) {
        throw Error(ErrorKind::kIllConditioned,
                    "correlation matrix condition number " + text::format_exact(condition) +
                        " exceeds " + text::format_exact(options.max_condition) +
                        "; extract fewer factors or allow a ridge");
      }
      shift = options.ridge;
      model.ridge_applied = true;
      model.warnings.push_back("correlation matrix is ill-conditioned (condition " +
                               text::format_exact(condition) + "); ridge " +
                               text::format_exact(shift) + " applied to the score coefficients");
    }
    for (Eigen::Index i = 0; i < values.size(); ++i) {
      const double v = std::max(values(i), 0.0) + shift;
      if (!(v > 0.0)) {
        throw Error(ErrorKind::kIllConditioned, "singular correlation matrix; extract fewer factors");
      }
      values(i) = 1.0 / v;
    }
    const Eigen::MatrixXd& vectors = solver.eigenvectors();
    coefficients = vectors * (values.asDiagonal() * (vectors.transpose() * model.loadings.values));
  }
  model.score_coefficients = coefficients;

  ScoreMatrix scores;
  scores.case_ids = std::move(case_ids);
  scores.values = z.multiply(coefficients);
  scores.rotated = model.rotated();
  return scores;
}

FittedModel fit_factor_model(const CitationMatrix& m, const FitOptions& options) {
  const StandardizedMatrix z = StandardizedMatrix::from_counts(m);
  const std::size_t p = m.n_vars();
  const std::size_t k = options.k == kAllFactors ? p : options.k;
  if (k > p) {
    throw Error(ErrorKind::kDomain, "requested " + std::to_string(k) + " factors from " +
                                        std::to_string(p) + " variables");
  }
  const bool implicit =
      options.route == EigenRoute::kImplicit ||
      (options.route == EigenRoute::kAuto && p > options.implicit_above && k * 4 <= p);

  Eigen::MatrixXd corr;
  if (!implicit || options.rotate) corr = z.correlation();
  Extraction ex = implicit ? eigendecompose_implicit(z, k) : eigendecompose(corr, k, m.variables());

  FittedModel fitted;
  fitted.model = make_model(std::move(ex));
  if (options.rotate) rotate_varimax(fitted.model, options.varimax);
  fitted.scores = factor_scores(fitted.model, z, corr, m.cases());
  return fitted;
}

}  // namespace factor_atlas
