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

#ifndef FACTOR_ATLAS_CITATION_MATRIX_HPP_
#define FACTOR_ATLAS_CITATION_MATRIX_HPP_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Sparse>

namespace factor_atlas {

using JournalId = std::int64_t;
using SparseCounts = Eigen::SparseMatrix<double, Eigen::ColMajor, std::int64_t>;

struct JournalRecord {
  JournalId id = 0;
  std::string label;
  bool is_citing = false;
  bool is_cited = false;
};

using LabelMap = std::map<JournalId, std::string>;

// Aggregated journal-journal citation counts. Rows ("cases") are cited
// journals, columns ("variables") are citing journals. Cell (i, j) counts
// citations from journal j to journal i. Absent cells are zero; the
// diagonal holds within-journal citations and is kept.
//
// Immutable once built; both id lists are sorted ascending.
class CitationMatrix {
 public:
  CitationMatrix() = default;
  CitationMatrix(std::vector<JournalId> cases, std::vector<JournalId> variables,
                 SparseCounts cells, LabelMap labels);

  const std::vector<JournalId>& cases() const { return cases_; }
  const std::vector<JournalId>& variables() const { return variables_; }
  const SparseCounts& cells() const { return cells_; }
  const LabelMap& labels() const { return labels_; }

  std::size_t n_cases() const { return cases_.size(); }
  std::size_t n_vars() const { return variables_.size(); }

  std::optional<std::size_t> case_index(JournalId id) const;
  std::optional<std::size_t> variable_index(JournalId id) const;

  // Citations from `citing` to `cited`; 0 when either is absent.
  double count(JournalId cited, JournalId citing) const;

  // Falls back to the decimal id when no label is known.
  std::string label(JournalId id) const;

  // Union of case and variable ids with their roles.
  std::vector<JournalRecord> journals() const;

 private:
  std::vector<JournalId> cases_;
  std::vector<JournalId> variables_;
  SparseCounts cells_;
  LabelMap labels_;
};

struct MatrixStats {
  std::size_t n_cases = 0;
  std::size_t n_vars = 0;
  std::size_t n_links = 0;
  double total_citations = 0.0;
  double density = 0.0;
  double mean_per_link = 0.0;
  // Set when n_links == 0 and mean_per_link was defaulted to 0.
  bool empty_links = false;
};

struct IngestOptions {
  bool drop_diagonal = false;
};

// Parses `cited <TAB> citing <TAB> count` records. Blank lines and lines
// starting with '#' are skipped. Ids are non-negative integers.
CitationMatrix ingest_edge_list(std::istream& source, const LabelMap* labels = nullptr,
                                IngestOptions options = {});

// `id <TAB> label` lines; '#' comments allowed.
LabelMap read_label_map(std::istream& source);

MatrixStats derive_stats(std::size_t n_cases, std::size_t n_vars, std::size_t n_links,
                         double total_citations);
MatrixStats compute_stats(const CitationMatrix& m);

// Rounds to `digits` significant digits.
double round_significant(double value, int digits);

// Population variance of a citing column over all cases.
double column_variance(const CitationMatrix& m, JournalId variable);
std::vector<double> column_variances(const CitationMatrix& m);

struct FilterResult {
  CitationMatrix matrix;
  std::vector<JournalId> dropped;
};

FilterResult filter_by_variance(const CitationMatrix& m, double threshold);

struct SubsetResult {
  CitationMatrix matrix;
  // Selected journals that have no citing column in the parent.
  std::vector<JournalId> not_citing;
  // Columns that became constant over the selected cases.
  std::vector<JournalId> zero_variance;
};

// Restricts cases to `keep_cases` and variables to the selected journals
// that also cite. Columns constant over the new cases are dropped.
SubsetResult subset(const CitationMatrix& m, const std::set<JournalId>& keep_cases);

// Plain restriction of both dimensions to `journals`, without variance drops.
CitationMatrix restrict_to(const CitationMatrix& m, const std::set<JournalId>& journals);

// Native on-disk format (see README).
void write_matrix(std::ostream& out, const CitationMatrix& m);
CitationMatrix read_matrix(std::istream& in);
void save_matrix(const std::string& path, const CitationMatrix& m);
CitationMatrix load_matrix(const std::string& path);

// `cited <TAB> citing <TAB> count`, sorted by (cited, citing).
void write_edge_list(std::ostream& out, const CitationMatrix& m);

// Accepts the native format or an edge list, told apart by the first line.
// Labels and options apply to edge lists only.
CitationMatrix read_any(std::istream& in, const LabelMap* labels = nullptr,
                        IngestOptions options = {});
CitationMatrix load_any(const std::string& path, const LabelMap* labels = nullptr,
                        IngestOptions options = {});

}  // namespace factor_atlas

#endif  // FACTOR_ATLAS_CITATION_MATRIX_HPP_
