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

#include "factor_atlas/artifacts.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "factor_atlas/error.hpp"
#include "factor_atlas/text.hpp"

namespace factor_atlas {
namespace {

std::string label_of(const LabelMap& labels, JournalId id) {
  const auto it = labels.find(id);
  return it != labels.end() ? it->second : std::to_string(id);
}

Json matrix_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from(const Json& rows) {
  if (!rows.is_array()) throw Error(ErrorKind::kParse, "expected a matrix array");
  const auto n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index k = n ? static_cast<Eigen::Index>(rows[0].size()) : 0;
  Eigen::MatrixXd m(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(row.size()) != k) throw Error(ErrorKind::kParse, "ragged matrix");
    for (Eigen::Index j = 0; j < k; ++j) m(i, j) = row[static_cast<std::size_t>(j)].get<double>();
  }
  return m;
}

Json vector_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Eigen::VectorXd vector_from(const Json& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
  return v;
}

const char* source_name(ClassificationSet::Source s) {
  return s == ClassificationSet::Source::kFactor ? "factor" : "external";
}

}  // namespace

Json stats_json(const MatrixStats& s) {
  Json j;
  j["n_cases"] = s.n_cases;
  j["n_vars"] = s.n_vars;
  j["n_links"] = s.n_links;
  j["total_citations"] = s.total_citations;
  j["density"] = round_significant(s.density, 4);
  j["mean_per_link"] = s.mean_per_link;
  if (s.empty_links) j["warnings"] = Json::array({"no links; mean_per_link defaulted to 0"});
  return j;
}

void write_dropped_tsv(std::ostream& out, const std::vector<JournalId>& ids,
                       const LabelMap& labels, const std::string& reason, bool header) {
  if (header) out << "journal_id\tlabel\treason\n";
  for (JournalId id : ids) out << id << '\t' << label_of(labels, id) << '\t' << reason << '\n';
}

void write_eigenvalues_tsv(std::ostream& out, const EigenSpectrum& s) {
  out << "rank\teigenvalue\tpct\tcum_pct\n";
  for (const auto& row : scree(s, static_cast<std::size_t>(s.eigenvalues.size()))) {
    out << row.rank << '\t' << text::format_exact(row.eigenvalue) << '\t'
        << text::format_exact(100.0 * row.explained) << '\t'
        << text::format_exact(100.0 * row.cumulative) << '\n';
  }
}

void write_loadings_tsv(std::ostream& out, const LoadingsMatrix& l, const LabelMap& labels) {
  out << "journal_id\tlabel";
  for (std::size_t j = 1; j <= l.k(); ++j) out << "\tF" << j;
  out << '\n';
  for (std::size_t i = 0; i < l.variable_ids.size(); ++i) {
    out << l.variable_ids[i] << '\t' << label_of(labels, l.variable_ids[i]);
    for (Eigen::Index j = 0; j < l.values.cols(); ++j) {
      out << '\t' << text::format_exact(l.values(static_cast<Eigen::Index>(i), j));
    }
    out << '\n';
  }
}

void write_loadings_table(std::ostream& out, const LoadingsMatrix& l, const LabelMap& labels,
                          double suppress_below) {
  std::size_t width = 7;
  for (JournalId id : l.variable_ids) width = std::max(width, label_of(labels, id).size());
  char cell[32];
  out << std::string(width, ' ');
  for (std::size_t j = 1; j <= l.k(); ++j) {
    std::snprintf(cell, sizeof cell, "%8s", ("F" + std::to_string(j)).c_str());
    out << cell;
  }
  out << '\n';
  for (std::size_t i = 0; i < l.variable_ids.size(); ++i) {
    const std::string name = label_of(labels, l.variable_ids[i]);
    out << name << std::string(width - name.size(), ' ');
    for (Eigen::Index j = 0; j < l.values.cols(); ++j) {
      const double v = l.values(static_cast<Eigen::Index>(i), j);
      if (std::abs(v) < suppress_below) {
        out << std::string(8, ' ');
      } else {
        std::snprintf(cell, sizeof cell, "%8s", text::fixed(v, 3).c_str());
        out << cell;
      }
    }
    out << '\n';
  }
}

void write_scores_tsv(std::ostream& out, const ScoreMatrix& s) {
  out << "# rotated=" << (s.rotated ? "true" : "false") << '\n';
  out << "journal_id";
  for (std::size_t j = 1; j <= s.k(); ++j) out << "\tF" << j;
  out << '\n';
  for (std::size_t i = 0; i < s.case_ids.size(); ++i) {
    out << s.case_ids[i];
    for (Eigen::Index j = 0; j < s.values.cols(); ++j) {
      out << '\t' << text::format_exact(s.values(static_cast<Eigen::Index>(i), j));
    }
    out << '\n';
  }
}

ScoreMatrix read_scores_tsv(std::istream& in) {
  ScoreMatrix s;
  std::string line;
  std::size_t line_no = 0;
  std::size_t k = 0;
  bool header = false;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view t = text::trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      if (t.find("rotated=true") != std::string_view::npos) s.rotated = true;
      continue;
    }
    const auto fields = text::split(t, '\t');
    if (!header) {
      if (fields.empty() || fields[0] != "journal_id") {
        throw Error(ErrorKind::kParse, "scores line " + std::to_string(line_no) +
                                           ": expected a journal_id header");
      }
      k = fields.size() - 1;
      header = true;
      continue;
    }
    if (fields.size() != k + 1) {
      throw Error(ErrorKind::kParse, "scores line " + std::to_string(line_no) + ": expected " +
                                         std::to_string(k + 1) + " fields");
    }
    const auto id = text::parse_int(fields[0]);
    if (!id) throw Error(ErrorKind::kParse, "scores line " + std::to_string(line_no) + ": bad id");
    s.case_ids.push_back(*id);
    std::vector<double> row;
    for (std::size_t j = 1; j <= k; ++j) {
      const auto v = text::parse_double(fields[j]);
      if (!v) throw Error(ErrorKind::kParse, "scores line " + std::to_string(line_no) + ": bad value");
      row.push_back(*v);
    }
    rows.push_back(std::move(row));
  }
  if (!header) throw Error(ErrorKind::kParse, "scores file is empty");
  s.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      s.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return s;
}

void save_scores(const std::string& path, const ScoreMatrix& s) {
  std::ostringstream out;
  write_scores_tsv(out, s);
  write_text_file(path, out.str());
}

ScoreMatrix load_scores(const std::string& path) {
  std::istringstream in(read_text_file(path));
  return read_scores_tsv(in);
}

Json model_json(const FactorModel& model, const std::string& scores_ref) {
  Json j;
  j["format"] = "factor-atlas-model";
  j["version"] = 1;
  j["k"] = model.k();
  j["variable_ids"] = model.variable_ids;
  j["spectrum"] = {{"n_vars", model.spectrum.n_vars},
                   {"complete", model.spectrum.complete},
                   {"eigenvalues", vector_json(model.spectrum.eigenvalues)},
                   {"explained", vector_json(model.spectrum.explained)}};
  j["unrotated"] = matrix_json(model.unrotated);
  j["loadings"] = matrix_json(model.loadings.values);
  j["rotated"] = model.rotated();
  if (model.rotation) {
    const auto& r = *model.rotation;
    j["rotation"] = {{"method", "varimax"},
                     {"kaiser_normalized", r.kaiser_normalized},
                     {"sweeps", r.sweeps},
                     {"converged", r.converged},
                     {"criterion", r.criterion},
                     {"criterion_trace", r.criterion_trace},
                     {"transform", matrix_json(r.transform)}};
  }
  j["score_coefficients"] = matrix_json(model.score_coefficients);
  j["ridge_applied"] = model.ridge_applied;
  j["warnings"] = model.warnings;
  j["scores"] = scores_ref;
  return j;
}

FactorModel model_from_json(const Json& j) {
  try {
    if (j.at("format") != "factor-atlas-model") throw Error(ErrorKind::kParse, "not a model file");
    FactorModel m;
    m.variable_ids = j.at("variable_ids").get<std::vector<JournalId>>();
    const auto& s = j.at("spectrum");
    m.spectrum.n_vars = s.at("n_vars").get<std::size_t>();
    m.spectrum.complete = s.at("complete").get<bool>();
    m.spectrum.eigenvalues = vector_from(s.at("eigenvalues"));
    m.spectrum.explained = vector_from(s.at("explained"));
    m.unrotated = matrix_from(j.at("unrotated"));
    m.loadings.values = matrix_from(j.at("loadings"));
    m.loadings.variable_ids = m.variable_ids;
    m.loadings.rotated = j.at("rotated").get<bool>();
    if (j.contains("rotation")) {
      const auto& r = j.at("rotation");
      RotationInfo info;
      info.kaiser_normalized = r.at("kaiser_normalized").get<bool>();
      info.sweeps = r.at("sweeps").get<int>();
      info.converged = r.at("converged").get<bool>();
      info.criterion = r.at("criterion").get<double>();
      info.criterion_trace = r.at("criterion_trace").get<std::vector<double>>();
      info.transform = matrix_from(r.at("transform"));
      m.rotation = std::move(info);
    }
    m.score_coefficients = matrix_from(j.at("score_coefficients"));
    m.ridge_applied = j.at("ridge_applied").get<bool>();
    m.warnings = j.at("warnings").get<std::vector<std::string>>();
    if (static_cast<std::size_t>(m.loadings.values.rows()) != m.variable_ids.size()) {
      throw Error(ErrorKind::kParse, "model loadings do not match its variable ids");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("malformed model: ") + e.what());
  }
}

std::string scores_ref_of(const Json& model) {
  return model.contains("scores") ? model.at("scores").get<std::string>() : std::string();
}

void write_designations_tsv(std::ostream& out, const std::vector<FactorDesignation>& d,
                            const LabelMap& labels, std::size_t n_variables,
                            std::size_t n_cases) {
  out << "# highest loading among n=" << n_variables << " citing journals; highest score among n="
      << n_cases << " cited journals\n";
  out << "factor\tlabel\ttop_loading_id\ttop_loading_journal\ttop_loading\ttop_loading_tie"
         "\ttop_score_id\ttop_score_journal\ttop_score\ttop_score_tie\tn_positive\tn_zero\n";
  for (const auto& row : d) {
    out << row.factor_index << '\t' << row.label << '\t' << row.top_loading.id << '\t'
        << label_of(labels, row.top_loading.id) << '\t'
        << text::format_exact(row.top_loading.value) << '\t' << (row.top_loading.tie ? 1 : 0)
        << '\t' << row.top_score.id << '\t' << label_of(labels, row.top_score.id) << '\t'
        << text::format_exact(row.top_score.value) << '\t' << (row.top_score.tie ? 1 : 0) << '\t'
        << row.n_positive_scores << '\t' << row.n_zero_scores << '\n';
  }
}

FactorLabels read_factor_labels(std::istream& in) {
  FactorLabels out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto tab = t.find('\t');
    const auto index = text::parse_int(t.substr(0, tab));
    if (tab == std::string_view::npos || !index || *index < 1) {
      throw Error(ErrorKind::kParse, "factor labels line " + std::to_string(line_no) +
                                         ": expected factor <TAB> label");
    }
    out[static_cast<std::size_t>(*index)] = std::string(text::trim(t.substr(tab + 1)));
  }
  return out;
}

void write_set(std::ostream& out, const ClassificationSet& set) {
  Json head;
  head["label"] = set.label;
  head["source"] = source_name(set.source);
  if (set.source == ClassificationSet::Source::kFactor) head["factor"] = set.factor_index;
  if (!set.model_ref.empty()) head["model"] = set.model_ref;
  head["count"] = set.members.size();
  out << "# " << head.dump() << '\n';
  for (JournalId id : set.members) out << id << '\n';
}

ClassificationSet read_set(std::istream& in) {
  ClassificationSet set;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view t = text::trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      const auto body = text::trim(t.substr(1));
      if (line_no == 1 && !body.empty() && body.front() == '{') {
        try {
          const Json head = Json::parse(body);
          set.label = head.value("label", "");
          set.source = head.value("source", "external") == "factor"
                           ? ClassificationSet::Source::kFactor
                           : ClassificationSet::Source::kExternal;
          set.factor_index = head.value("factor", std::size_t{0});
          set.model_ref = head.value("model", "");
        } catch (const nlohmann::json::exception& e) {
          throw Error(ErrorKind::kParse, std::string("set header: ") + e.what());
        }
      }
      continue;
    }
    const auto id = text::parse_int(t);
    if (!id) throw Error(ErrorKind::kParse, "set line " + std::to_string(line_no) + ": bad id");
    set.members.insert(*id);
  }
  return set;
}

void save_set(const std::string& path, const ClassificationSet& set) {
  std::ostringstream out;
  write_set(out, set);
  write_text_file(path, out.str());
}

ClassificationSet load_set(const std::string& path) {
  std::istringstream in(read_text_file(path));
  ClassificationSet set = read_set(in);
  if (set.label.empty()) set.label = path;
  return set;
}

Json comparison_json(const ComparisonReport& r) {
  Json j;
  j["labels"] = r.labels;
  j["sizes"] = r.sizes;
  j["union_size"] = r.union_size;
  Json regions = Json::array();
  for (const auto& region : r.regions) {
    Json in = Json::array();
    for (std::size_t s = 0; s < region.in_set.size(); ++s) {
      if (region.in_set[s]) in.push_back(r.labels[s]);
    }
    regions.push_back({{"in", in}, {"count", region.members.size()}, {"members", region.members}});
  }
  j["regions"] = regions;
  Json pairs = Json::array();
  for (const auto& p : r.jaccard) {
    pairs.push_back({{"a", r.labels[p.a]}, {"b", r.labels[p.b]}, {"jaccard", p.jaccard}});
  }
  j["jaccard"] = pairs;
  return j;
}

void write_comparison_summary(std::ostream& out, const ComparisonReport& r,
                              const LabelMap& labels) {
  out << "sets:";
  for (std::size_t s = 0; s < r.labels.size(); ++s) {
    out << (s ? ", " : " ") << r.labels[s] << " (" << r.sizes[s] << ")";
  }
  out << "\nunion: " << r.union_size << " journals\n\nregions:\n";
  for (const auto& region : r.regions) {
    std::string name;
    for (std::size_t s = 0; s < region.in_set.size(); ++s) {
      if (region.in_set[s]) name += (name.empty() ? "" : " & ") + r.labels[s];
    }
    bool all = std::all_of(region.in_set.begin(), region.in_set.end(), [](bool b) { return b; });
    out << "  " << (all ? name : "only " + name) << ": " << region.members.size();
    if (region.members.size() <= 10) {
      out << " [";
      for (std::size_t i = 0; i < region.members.size(); ++i) {
        out << (i ? ", " : "") << label_of(labels, region.members[i]);
      }
      out << "]";
    }
    out << '\n';
  }
  out << "\njaccard:\n";
  for (const auto& p : r.jaccard) {
    out << "  " << r.labels[p.a] << " ~ " << r.labels[p.b] << ": " << text::fixed(p.jaccard, 4)
        << '\n';
  }
}

void write_scatter_tsv(std::ostream& out, const ScatterSeries& s) {
  out << "id\tlabel\tx\ty\n";
  for (const auto& p : s.points) {
    out << p.id << '\t' << p.label << '\t' << text::format_exact(p.x) << '\t'
        << text::format_exact(p.y) << '\n';
  }
}

Json scatter_json(const ScatterSeries& s) {
  Json j;
  j["x_factor"] = s.factor_x;
  j["y_factor"] = s.factor_y;
  j["rotated"] = s.rotated;
  j["min_abs"] = s.options.min_abs;
  j["axis_rule"] = s.options.axis_rule == AxisRule::kBoth ? "both" : "either";
  j["scale"] = s.options.scale == ScatterScale::kLog ? "signed-log10" : "linear";
  j["points"] = s.points.size();
  j["below_threshold"] = s.below_threshold;
  j["excluded_log"] = s.excluded_log;
  return j;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::kIo, "sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string sha256_file(const std::string& path) { return sha256_hex(read_text_file(path)); }

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  out << content;
  if (!out) throw Error(ErrorKind::kIo, "write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Json load_json(const std::string& path) {
  try {
    return Json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, path + ": " + e.what());
  }
}

void save_json(const std::string& path, const Json& j) { write_text_file(path, j.dump(2) + "\n"); }

}  // namespace factor_atlas
