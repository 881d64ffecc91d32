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

// On-disk forms of the intermediate results. Machine-readable files use
// shortest round-trip decimals; human tables use fixed decimals.

#ifndef FACTOR_ATLAS_ARTIFACTS_HPP_
#define FACTOR_ATLAS_ARTIFACTS_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "factor_atlas/citation_matrix.hpp"
#include "factor_atlas/decomposition.hpp"
#include "factor_atlas/factor_engine.hpp"
#include "factor_atlas/mapping.hpp"

namespace factor_atlas {

using Json = nlohmann::ordered_json;

// Density is rounded to four significant digits.
Json stats_json(const MatrixStats& s);

// `journal_id <TAB> label <TAB> reason`.
void write_dropped_tsv(std::ostream& out, const std::vector<JournalId>& ids,
                       const LabelMap& labels, const std::string& reason, bool header = true);

// `rank <TAB> eigenvalue <TAB> pct <TAB> cum_pct`, percentages of p.
void write_eigenvalues_tsv(std::ostream& out, const EigenSpectrum& s);

// variables x factors, every entry.
void write_loadings_tsv(std::ostream& out, const LoadingsMatrix& l, const LabelMap& labels);
// Fixed three decimals; entries with |value| < suppress_below are blank.
void write_loadings_table(std::ostream& out, const LoadingsMatrix& l, const LabelMap& labels,
                          double suppress_below = 0.10);

// `# rotated=<bool>` header, then `case_id <TAB> F1 ... Fk`.
void write_scores_tsv(std::ostream& out, const ScoreMatrix& s);
ScoreMatrix read_scores_tsv(std::istream& in);
void save_scores(const std::string& path, const ScoreMatrix& s);
ScoreMatrix load_scores(const std::string& path);

// `scores_ref` names the scores file, relative to the model file.
Json model_json(const FactorModel& model, const std::string& scores_ref);
FactorModel model_from_json(const Json& j);
std::string scores_ref_of(const Json& model);

// Table-like columns: factor, label, top loading journal, top score
// journal, count of positive scores.
void write_designations_tsv(std::ostream& out, const std::vector<FactorDesignation>& d,
                            const LabelMap& labels, std::size_t n_variables,
                            std::size_t n_cases);
// `factor <TAB> label` lines.
FactorLabels read_factor_labels(std::istream& in);

// First line `# {provenance json}`, then one id per line.
void write_set(std::ostream& out, const ClassificationSet& set);
ClassificationSet read_set(std::istream& in);
void save_set(const std::string& path, const ClassificationSet& set);
ClassificationSet load_set(const std::string& path);

Json comparison_json(const ComparisonReport& r);
void write_comparison_summary(std::ostream& out, const ComparisonReport& r,
                              const LabelMap& labels = {});

// `id <TAB> label <TAB> x <TAB> y`.
void write_scatter_tsv(std::ostream& out, const ScatterSeries& s);
Json scatter_json(const ScatterSeries& s);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);
Json load_json(const std::string& path);
void save_json(const std::string& path, const Json& j);

}  // namespace factor_atlas

#endif  // FACTOR_ATLAS_ARTIFACTS_HPP_
