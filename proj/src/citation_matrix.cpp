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

#include "factor_atlas/citation_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <tuple>
#include <utility>

#include "factor_atlas/error.hpp"
#include "factor_atlas/text.hpp"

namespace factor_atlas {
namespace {

using Triplet = Eigen::Triplet<double, std::int64_t>;

std::optional<std::size_t> find_sorted(const std::vector<JournalId>& ids, JournalId id) {
  const auto it = std::lower_bound(ids.begin(), ids.end(), id);
  if (it == ids.end() || *it != id) return std::nullopt;
  return static_cast<std::size_t>(it - ids.begin());
}

Error parse_error(std::size_t line_no, const std::string& what) {
  return Error(ErrorKind::kParse, "line " + std::to_string(line_no) + ": " + what);
}

double column_variance_at(const SparseCounts& cells, std::size_t n_cases, Eigen::Index col) {
  if (n_cases == 0) return 0.0;
  const double n = static_cast<double>(n_cases);
  double sum = 0.0;
  Eigen::Index nnz = 0;
  for (SparseCounts::InnerIterator it(cells, col); it; ++it) {
    sum += it.value();
    ++nnz;
  }
  const double mean = sum / n;
  double ss = static_cast<double>(static_cast<Eigen::Index>(n_cases) - nnz) * mean * mean;
  for (SparseCounts::InnerIterator it(cells, col); it; ++it) {
    const double d = it.value() - mean;
    ss += d * d;
  }
  return ss / n;
}

LabelMap labels_for(const LabelMap& labels, const std::vector<JournalId>& a,
                    const std::vector<JournalId>& b) {
  LabelMap out;
  for (const auto* ids : {&a, &b}) {
    for (JournalId id : *ids) {
      if (auto it = labels.find(id); it != labels.end()) out.emplace(id, it->second);
    }
  }
  return out;
}

}  // namespace

CitationMatrix::CitationMatrix(std::vector<JournalId> cases, std::vector<JournalId> variables,
                               SparseCounts cells, LabelMap labels)
    : cases_(std::move(cases)),
      variables_(std::move(variables)),
      cells_(std::move(cells)),
      labels_(std::move(labels)) {
  if (!std::is_sorted(cases_.begin(), cases_.end()) ||
      !std::is_sorted(variables_.begin(), variables_.end())) {
    throw Error(ErrorKind::kDomain, "matrix ids must be sorted ascending");
  }
  if (cells_.rows() != static_cast<Eigen::Index>(cases_.size()) ||
      cells_.cols() != static_cast<Eigen::Index>(variables_.size())) {
    throw Error(ErrorKind::kDomain, "cell matrix shape does not match id lists");
  }
  cells_.makeCompressed();
}

std::optional<std::size_t> CitationMatrix::case_index(JournalId id) const {
  return find_sorted(cases_, id);
}

std::optional<std::size_t> CitationMatrix::variable_index(JournalId id) const {
  return find_sorted(variables_, id);
}

double CitationMatrix::count(JournalId cited, JournalId citing) const {
  const auto row = case_index(cited);
  const auto col = variable_index(citing);
  if (!row || !col) return 0.0;
  return cells_.coeff(static_cast<Eigen::Index>(*row), static_cast<Eigen::Index>(*col));
}

std::string CitationMatrix::label(JournalId id) const {
  if (auto it = labels_.find(id); it != labels_.end()) return it->second;
  return std::to_string(id);
}

std::vector<JournalRecord> CitationMatrix::journals() const {
  std::map<JournalId, JournalRecord> records;
  for (JournalId id : cases_) {
    auto& r = records[id];
    r.id = id;
    r.is_cited = true;
  }
  for (JournalId id : variables_) {
    auto& r = records[id];
    r.id = id;
    r.is_citing = true;
  }
  std::vector<JournalRecord> out;
  out.reserve(records.size());
  for (auto& [id, r] : records) {
    r.label = label(id);
    out.push_back(std::move(r));
  }
  return out;
}

CitationMatrix ingest_edge_list(std::istream& source, const LabelMap* labels,
                                IngestOptions options) {
  struct Edge {
    JournalId cited;
    JournalId citing;
    double count;
    std::size_t line;
  };
  std::vector<Edge> edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    const auto body = text::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto fields = text::split_whitespace(body);
    if (fields.size() != 3) {
      throw parse_error(line_no, "expected 3 fields (cited, citing, count), got " +
                                     std::to_string(fields.size()));
    }
    const auto cited = text::parse_int(fields[0]);
    const auto citing = text::parse_int(fields[1]);
    if (!cited || !citing || *cited < 0 || *citing < 0) {
      throw parse_error(line_no, "journal ids must be non-negative integers");
    }
    const auto count = text::parse_int(fields[2]);
    if (!count) throw parse_error(line_no, "count is not an integer: '" + std::string(fields[2]) + "'");
    if (*count < 1) {
      throw Error(ErrorKind::kDomain,
                  "line " + std::to_string(line_no) + ": citation count must be >= 1, got " +
                      std::to_string(*count));
    }
    edges.push_back({*cited, *citing, static_cast<double>(*count), line_no});
  }
  if (edges.empty()) throw Error(ErrorKind::kEmptyCorpus, "edge list contains no records");

  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.cited, a.citing, a.line) < std::tie(b.cited, b.citing, b.line);
  });
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (edges[i].cited == edges[i - 1].cited && edges[i].citing == edges[i - 1].citing) {
      throw Error(ErrorKind::kDuplicateEdge,
                  "duplicate pair (" + std::to_string(edges[i].cited) + ", " +
                      std::to_string(edges[i].citing) + ") on lines " +
                      std::to_string(edges[i - 1].line) + " and " + std::to_string(edges[i].line));
    }
  }

  std::vector<JournalId> cases;
  std::vector<JournalId> variables;
  for (const auto& e : edges) {
    cases.push_back(e.cited);
    variables.push_back(e.citing);
  }
  for (auto* ids : {&cases, &variables}) {
    std::sort(ids->begin(), ids->end());
    ids->erase(std::unique(ids->begin(), ids->end()), ids->end());
  }

  std::vector<Triplet> triplets;
  triplets.reserve(edges.size());
  for (const auto& e : edges) {
    if (options.drop_diagonal && e.cited == e.citing) continue;
    triplets.emplace_back(static_cast<std::int64_t>(*find_sorted(cases, e.cited)),
                          static_cast<std::int64_t>(*find_sorted(variables, e.citing)), e.count);
  }
  SparseCounts cells(static_cast<Eigen::Index>(cases.size()),
                     static_cast<Eigen::Index>(variables.size()));
  cells.setFromTriplets(triplets.begin(), triplets.end());

  LabelMap kept = labels ? labels_for(*labels, cases, variables) : LabelMap{};
  return CitationMatrix(std::move(cases), std::move(variables), std::move(cells), std::move(kept));
}

LabelMap read_label_map(std::istream& source) {
  LabelMap labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty() || text::trim(line).front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw parse_error(line_no, "expected 'id<TAB>label'");
    const auto id = text::parse_int(std::string_view(line).substr(0, tab));
    const auto label = text::trim(std::string_view(line).substr(tab + 1));
    if (!id || *id < 0) throw parse_error(line_no, "journal id must be a non-negative integer");
    if (label.empty()) throw parse_error(line_no, "empty label");
    labels[*id] = std::string(label);
  }
  return labels;
}

MatrixStats derive_stats(std::size_t n_cases, std::size_t n_vars, std::size_t n_links,
                         double total_citations) {
  MatrixStats s;
  s.n_cases = n_cases;
  s.n_vars = n_vars;
  s.n_links = n_links;
  s.total_citations = total_citations;
  const double cells = static_cast<double>(n_cases) * static_cast<double>(n_vars);
  s.density = cells > 0 ? static_cast<double>(n_links) / cells : 0.0;
  s.empty_links = n_links == 0;
  s.mean_per_link = n_links > 0 ? total_citations / static_cast<double>(n_links) : 0.0;
  return s;
}

MatrixStats compute_stats(const CitationMatrix& m) {
  const auto& cells = m.cells();
  // Stored zeros cannot occur through the public constructors but are
  // skipped anyway so the count always means "nonzero cells".
  std::size_t links = 0;
  double total = 0.0;
  for (Eigen::Index c = 0; c < cells.outerSize(); ++c) {
    for (SparseCounts::InnerIterator it(cells, c); it; ++it) {
      if (it.value() != 0.0) {
        ++links;
        total += it.value();
      }
    }
  }
  return derive_stats(m.n_cases(), m.n_vars(), links, total);
}

double round_significant(double value, int digits) {
  if (value == 0.0 || !std::isfinite(value)) return value;
  const int magnitude = static_cast<int>(std::floor(std::log10(std::fabs(value))));
  const double scale = std::pow(10.0, digits - 1 - magnitude);
  return std::round(value * scale) / scale;
}

double column_variance(const CitationMatrix& m, JournalId variable) {
  const auto col = m.variable_index(variable);
  if (!col) {
    throw Error(ErrorKind::kNotFound, "unknown citing journal " + std::to_string(variable));
  }
  return column_variance_at(m.cells(), m.n_cases(), static_cast<Eigen::Index>(*col));
}

std::vector<double> column_variances(const CitationMatrix& m) {
  std::vector<double> out(m.n_vars());
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = column_variance_at(m.cells(), m.n_cases(), static_cast<Eigen::Index>(j));
  }
  return out;
}

namespace {

// Keeps the listed columns (ascending positions) and the listed rows.
CitationMatrix select(const CitationMatrix& m, const std::vector<std::size_t>& rows,
                      const std::vector<std::size_t>& cols) {
  std::vector<std::int64_t> row_map(m.n_cases(), -1);
  std::vector<JournalId> cases;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    row_map[rows[r]] = static_cast<std::int64_t>(r);
    cases.push_back(m.cases()[rows[r]]);
  }
  std::vector<JournalId> variables;
  std::vector<Triplet> triplets;
  for (std::size_t c = 0; c < cols.size(); ++c) {
    variables.push_back(m.variables()[cols[c]]);
    for (SparseCounts::InnerIterator it(m.cells(), static_cast<Eigen::Index>(cols[c])); it; ++it) {
      const auto r = row_map[static_cast<std::size_t>(it.row())];
      if (r >= 0) triplets.emplace_back(r, static_cast<std::int64_t>(c), it.value());
    }
  }
  SparseCounts cells(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  cells.setFromTriplets(triplets.begin(), triplets.end());
  LabelMap labels = labels_for(m.labels(), cases, variables);
  return CitationMatrix(std::move(cases), std::move(variables), std::move(cells), std::move(labels));
}

std::vector<std::size_t> all_positions(std::size_t n) {
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = i;
  return out;
}

}  // namespace

FilterResult filter_by_variance(const CitationMatrix& m, double threshold) {
  if (!(threshold >= 0.0)) throw Error(ErrorKind::kDomain, "variance threshold must be >= 0");
  const auto variances = column_variances(m);
  std::vector<std::size_t> keep;
  FilterResult result;
  for (std::size_t j = 0; j < variances.size(); ++j) {
    if (variances[j] < threshold) {
      result.dropped.push_back(m.variables()[j]);
    } else {
      keep.push_back(j);
    }
  }
  if (keep.empty()) {
    throw Error(ErrorKind::kEmptySelection,
                "no citing journal reaches variance threshold " + text::format_exact(threshold));
  }
  result.matrix = select(m, all_positions(m.n_cases()), keep);
  return result;
}

SubsetResult subset(const CitationMatrix& m, const std::set<JournalId>& keep_cases) {
  if (keep_cases.empty()) throw Error(ErrorKind::kDomain, "subset requires at least one case");
  std::vector<std::size_t> rows;
  rows.reserve(keep_cases.size());
  for (JournalId id : keep_cases) {
    const auto r = m.case_index(id);
    if (!r) throw Error(ErrorKind::kNotFound, "journal " + std::to_string(id) + " is not a case");
    rows.push_back(*r);
  }
  SubsetResult result;
  std::vector<std::size_t> cols;
  for (JournalId id : keep_cases) {
    if (auto c = m.variable_index(id)) {
      cols.push_back(*c);
    } else {
      result.not_citing.push_back(id);
    }
  }
  CitationMatrix restricted = select(m, rows, cols);
  const auto variances = column_variances(restricted);
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < variances.size(); ++j) {
    if (variances[j] > 0.0) {
      keep.push_back(j);
    } else {
      result.zero_variance.push_back(restricted.variables()[j]);
    }
  }
  if (keep.empty()) {
    throw Error(ErrorKind::kDegenerate,
                "subset of " + std::to_string(keep_cases.size()) +
                    " journals has no citing column with positive variance");
  }
  result.matrix = keep.size() == restricted.n_vars()
                      ? std::move(restricted)
                      : select(restricted, all_positions(restricted.n_cases()), keep);
  return result;
}

CitationMatrix restrict_to(const CitationMatrix& m, const std::set<JournalId>& journals) {
  std::vector<std::size_t> rows;
  std::vector<std::size_t> cols;
  for (JournalId id : journals) {
    if (auto r = m.case_index(id)) rows.push_back(*r);
    if (auto c = m.variable_index(id)) cols.push_back(*c);
  }
  return select(m, rows, cols);
}

// Format:
//   factor-atlas-matrix 1
//   cases <n>        followed by n ids
//   variables <p>    followed by p ids
//   labels <l>       followed by l "id<TAB>label" lines
//   cells <nnz>      followed by nnz "case<TAB>variable<TAB>count" lines
void write_matrix(std::ostream& out, const CitationMatrix& m) {
  out << "factor-atlas-matrix 1\n";
  out << "cases " << m.n_cases() << '\n';
  for (JournalId id : m.cases()) out << id << '\n';
  out << "variables " << m.n_vars() << '\n';
  for (JournalId id : m.variables()) out << id << '\n';
  out << "labels " << m.labels().size() << '\n';
  for (const auto& [id, label] : m.labels()) out << id << '\t' << label << '\n';
  const auto& cells = m.cells();
  out << "cells " << cells.nonZeros() << '\n';
  for (Eigen::Index c = 0; c < cells.outerSize(); ++c) {
    for (SparseCounts::InnerIterator it(cells, c); it; ++it) {
      out << m.cases()[static_cast<std::size_t>(it.row())] << '\t'
          << m.variables()[static_cast<std::size_t>(c)] << '\t' << text::format_exact(it.value())
          << '\n';
    }
  }
}

CitationMatrix read_matrix(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next = [&]() -> std::string_view {
    if (!std::getline(in, line)) throw parse_error(line_no + 1, "unexpected end of matrix file");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  };
  auto section = [&](std::string_view name) -> std::size_t {
    const auto fields = text::split_whitespace(next());
    const auto n = fields.size() == 2 ? text::parse_int(fields[1]) : std::nullopt;
    if (fields.size() != 2 || fields[0] != name || !n || *n < 0) {
      throw parse_error(line_no, "expected '" + std::string(name) + " <count>'");
    }
    return static_cast<std::size_t>(*n);
  };
  auto ids = [&](std::size_t n) {
    std::vector<JournalId> out(n);
    for (auto& id : out) {
      const auto v = text::parse_int(next());
      if (!v) throw parse_error(line_no, "bad journal id");
      id = *v;
    }
    return out;
  };

  if (text::trim(next()) != "factor-atlas-matrix 1") {
    throw parse_error(line_no, "not a factor-atlas matrix file");
  }
  auto cases = ids(section("cases"));
  auto variables = ids(section("variables"));
  LabelMap labels;
  const std::size_t n_labels = section("labels");
  for (std::size_t i = 0; i < n_labels; ++i) {
    const auto l = next();
    const auto tab = l.find('\t');
    const auto id = tab == std::string_view::npos ? std::nullopt : text::parse_int(l.substr(0, tab));
    if (!id) throw parse_error(line_no, "bad label line");
    labels[*id] = std::string(l.substr(tab + 1));
  }
  const std::size_t nnz = section("cells");
  std::vector<Triplet> triplets;
  triplets.reserve(nnz);
  for (std::size_t i = 0; i < nnz; ++i) {
    const auto fields = text::split_whitespace(next());
    if (fields.size() != 3) throw parse_error(line_no, "bad cell line");
    const auto r = text::parse_int(fields[0]);
    const auto c = text::parse_int(fields[1]);
    const auto v = text::parse_double(fields[2]);
    if (!r || !c || !v) throw parse_error(line_no, "bad cell line");
    const auto ri = find_sorted(cases, *r);
    const auto ci = find_sorted(variables, *c);
    if (!ri || !ci) throw parse_error(line_no, "cell refers to an undeclared journal");
    triplets.emplace_back(static_cast<std::int64_t>(*ri), static_cast<std::int64_t>(*ci), *v);
  }
  SparseCounts cells(static_cast<Eigen::Index>(cases.size()),
                     static_cast<Eigen::Index>(variables.size()));
  cells.setFromTriplets(triplets.begin(), triplets.end());
  return CitationMatrix(std::move(cases), std::move(variables), std::move(cells), std::move(labels));
}

void save_matrix(const std::string& path, const CitationMatrix& m) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  write_matrix(out, m);
  if (!out) throw Error(ErrorKind::kIo, "write failed: " + path);
}

CitationMatrix load_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path);
  return read_matrix(in);
}

void write_edge_list(std::ostream& out, const CitationMatrix& m) {
  std::vector<std::tuple<JournalId, JournalId, double>> rows;
  const auto& cells = m.cells();
  rows.reserve(static_cast<std::size_t>(cells.nonZeros()));
  for (Eigen::Index c = 0; c < cells.outerSize(); ++c) {
    for (SparseCounts::InnerIterator it(cells, c); it; ++it) {
      rows.emplace_back(m.cases()[static_cast<std::size_t>(it.row())],
                        m.variables()[static_cast<std::size_t>(c)], it.value());
    }
  }
  std::sort(rows.begin(), rows.end());
  out << "# cited\tciting\tcount\n";
  for (const auto& [cited, citing, count] : rows) {
    out << cited << '\t' << citing << '\t' << text::format_exact(count) << '\n';
  }
}

CitationMatrix read_any(std::istream& in, const LabelMap* labels, IngestOptions options) {
  std::string first;
  const auto start = in.tellg();
  std::getline(in, first);
  in.clear();
  in.seekg(start);
  if (text::trim(first).rfind("factor-atlas-matrix", 0) == 0) return read_matrix(in);
  return ingest_edge_list(in, labels, options);
}

CitationMatrix load_any(const std::string& path, const LabelMap* labels, IngestOptions options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path);
  return read_any(in, labels, options);
}

}  // namespace factor_atlas
