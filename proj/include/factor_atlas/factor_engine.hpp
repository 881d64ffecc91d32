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

#ifndef FACTOR_ATLAS_FACTOR_ENGINE_HPP_
#define FACTOR_ATLAS_FACTOR_ENGINE_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "factor_atlas/citation_matrix.hpp"

namespace factor_atlas {

// Column z-scores of a case x variable matrix, kept implicit:
// Z = (X - 1 mean^T) diag(sd)^-1 with X sparse. Sparse zeros become the
// column constant -mean/sd without ever being stored. Population sd.
class StandardizedMatrix {
 public:
  static StandardizedMatrix from_counts(const CitationMatrix& m);
  // Variable ids default to 0..p-1.
  static StandardizedMatrix from_dense(const Eigen::MatrixXd& data,
                                       std::vector<JournalId> variable_ids = {});

  Eigen::Index rows() const { return raw_.rows(); }
  Eigen::Index cols() const { return raw_.cols(); }
  const Eigen::VectorXd& means() const { return means_; }
  const Eigen::VectorXd& sds() const { return sds_; }
  const std::vector<JournalId>& variable_ids() const { return variable_ids_; }

  Eigen::MatrixXd multiply(const Eigen::MatrixXd& w) const;            // Z w
  Eigen::MatrixXd transpose_multiply(const Eigen::MatrixXd& u) const;  // Z^T u
  Eigen::MatrixXd dense() const;

  // (1/n) Z^T Z with an exact unit diagonal.
  Eigen::MatrixXd correlation() const;

 private:
  StandardizedMatrix(SparseCounts raw, std::vector<JournalId> ids);

  SparseCounts raw_;
  Eigen::VectorXd means_;
  Eigen::VectorXd sds_;
  std::vector<JournalId> variable_ids_;
};

Eigen::MatrixXd correlation(const CitationMatrix& m);

struct EigenSpectrum {
  Eigen::VectorXd eigenvalues;  // descending
  Eigen::VectorXd explained;    // eigenvalue / n_vars
  std::size_t n_vars = 0;
  // False when only the leading eigenpairs were computed.
  bool complete = true;
};

struct LoadingsMatrix {
  Eigen::MatrixXd values;  // variables x k
  std::vector<JournalId> variable_ids;
  bool rotated = false;

  std::size_t k() const { return static_cast<std::size_t>(values.cols()); }
  Eigen::VectorXd communalities() const { return values.rowwise().squaredNorm(); }
};

struct Extraction {
  EigenSpectrum spectrum;
  LoadingsMatrix loadings;  // unrotated
};

constexpr std::size_t kAllFactors = 0;

// Eigenpairs of a correlation matrix in descending order. Loading column j
// is eigenvector j scaled by sqrt(eigenvalue j), oriented so that its
// largest-magnitude entry is positive. k == kAllFactors keeps every column.
Extraction eigendecompose(const Eigen::MatrixXd& corr, std::size_t k,
                          std::vector<JournalId> variable_ids = {});

struct ImplicitOptions {
  double tolerance = 1e-10;
  int max_iterations = 20000;
  unsigned seed = 20040101u;
};

// Leading k eigenpairs of (1/n) Z^T Z by block subspace iteration on the
// implicit standardized matrix; never forms the p x p correlation matrix.
Extraction eigendecompose_implicit(const StandardizedMatrix& z, std::size_t k,
                                   ImplicitOptions options = {});

std::size_t kaiser_count(const EigenSpectrum& s);

struct ScreeRow {
  std::size_t rank = 0;  // 1-based
  double eigenvalue = 0.0;
  double explained = 0.0;
  double cumulative = 0.0;
};

std::vector<ScreeRow> scree(const EigenSpectrum& s, std::size_t n);

// Number of factors explaining more than `share` of the total variance.
std::size_t count_above_share(const EigenSpectrum& s, double share);

struct VarimaxOptions {
  bool kaiser_normalize = true;
  double tolerance = 1e-6;
  int max_sweeps = 100;
};

struct VarimaxResult {
  Eigen::MatrixXd loadings;   // unrotated * transform
  Eigen::MatrixXd transform;  // k x k orthogonal
  int sweeps = 0;
  bool converged = false;
  double criterion = 0.0;
  // Criterion before the first sweep and after each sweep.
  std::vector<double> criterion_trace;
};

// Raw varimax criterion sum_j [ mean_i b_ij^4 - (mean_i b_ij^2)^2 ].
double varimax_criterion(const Eigen::MatrixXd& b);

// Row-normalizes by sqrt(communality); zero rows stay zero.
Eigen::MatrixXd kaiser_normalized(const Eigen::MatrixXd& loadings);

VarimaxResult varimax_rotate(const Eigen::MatrixXd& loadings, VarimaxOptions options = {});

struct RotationInfo {
  Eigen::MatrixXd transform;
  int sweeps = 0;
  bool converged = false;
  bool kaiser_normalized = true;
  double criterion = 0.0;
  std::vector<double> criterion_trace;
};

struct FactorModel {
  std::vector<JournalId> variable_ids;
  EigenSpectrum spectrum;
  Eigen::MatrixXd unrotated;  // variables x k
  LoadingsMatrix loadings;    // rotated when `rotation` is set
  std::optional<RotationInfo> rotation;
  Eigen::MatrixXd score_coefficients;  // filled by factor_scores
  bool ridge_applied = false;
  std::vector<std::string> warnings;

  std::size_t k() const { return static_cast<std::size_t>(unrotated.cols()); }
  bool rotated() const { return rotation.has_value(); }
};

FactorModel make_model(Extraction extraction);

// Varimax-rotates the model's loadings. Each rotated column is reflected so
// the sum of its cubed loadings is non-negative (salient loadings point the
// positive way); the reflection is folded into the transform. k < 2 is a
// domain error.
void rotate_varimax(FactorModel& model, VarimaxOptions options = {});

struct ScoreMatrix {
  std::vector<JournalId> case_ids;
  Eigen::MatrixXd values;  // cases x k
  bool rotated = false;

  std::size_t k() const { return static_cast<std::size_t>(values.cols()); }
};

struct ScoreOptions {
  double max_condition = 1e12;
  double ridge = 1e-8;
};

// Unrotated: coefficients a_j / lambda_j. Rotated: regression method,
// coefficients corr^-1 * rotated loadings (ridge corr + eps I when the
// condition number exceeds max_condition). Fills model.score_coefficients.
ScoreMatrix factor_scores(FactorModel& model, const StandardizedMatrix& z,
                          const Eigen::MatrixXd& corr, std::vector<JournalId> case_ids = {},
                          ScoreOptions options = {});

enum class EigenRoute { kAuto, kDense, kImplicit };

struct FitOptions {
  std::size_t k = 12;
  bool rotate = true;
  VarimaxOptions varimax;
  EigenRoute route = EigenRoute::kAuto;
  // kAuto switches to the implicit route above this many variables.
  std::size_t implicit_above = 4000;
};

struct FittedModel {
  FactorModel model;
  ScoreMatrix scores;
};

// standardize -> correlate -> extract k -> (varimax) -> scores.
FittedModel fit_factor_model(const CitationMatrix& m, const FitOptions& options);

}  // namespace factor_atlas

#endif  // FACTOR_ATLAS_FACTOR_ENGINE_HPP_
