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

#include "factor_atlas/mapping.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <tuple>

#include "factor_atlas/error.hpp"
#include "factor_atlas/text.hpp"

namespace factor_atlas {
namespace {

std::string quote(const std::string& label) {
  std::string out = "\"";
  for (char c : label) {
    if (c == '"' || c == '\\') {
      out += '\\';
      out += c;
    } else if (c == '\n') {
      out += "\\n";
    } else {
      out += c;
    }
  }
  return out + '"';
}

Error pajek_error(std::size_t line_no, const std::string& what) {
  return Error(ErrorKind::kParse, "pajek line " + std::to_string(line_no) + ": " + what);
}

// Reads `"..."` with backslash escapes, or a bare token.
std::string read_label(const std::string& rest, std::size_t line_no) {
  const std::string s(text::trim(rest));
  if (s.empty()) return {};
  if (s.front() != '"') return s;
  std::string out;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      ++i;
      out += s[i] == 'n' ? '\n' : s[i];
    } else if (s[i] == '"') {
      return out;
    } else {
      out += s[i];
    }
  }
  throw pajek_error(line_no, "unterminated label");
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

SimilarityMatrix cosine_similarity(const CitationMatrix& m, Orientation orientation) {
  const bool rows = orientation == Orientation::kCitedRows;
  const SparseCounts& x = m.cells();
  const std::vector<JournalId>& all_ids = rows ? m.cases() : m.variables();

  SparseCounts gram = rows ? SparseCounts(x * x.transpose()) : SparseCounts(x.transpose() * x);
  const Eigen::MatrixXd g = Eigen::MatrixXd(gram);

  SimilarityMatrix sim;
  std::vector<Eigen::Index> keep;
  for (std::size_t i = 0; i < all_ids.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    if (g(ii, ii) > 0.0) {
      keep.push_back(ii);
      sim.ids.push_back(all_ids[i]);
      sim.labels.push_back(m.label(all_ids[i]));
    } else {
      sim.excluded_zero.push_back(all_ids[i]);
    }
  }
  const auto n = static_cast<Eigen::Index>(keep.size());
  sim.values.resize(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    sim.values(a, a) = 1.0;
    for (Eigen::Index b = a + 1; b < n; ++b) {
      const double c = g(keep[a], keep[b]) / std::sqrt(g(keep[a], keep[a]) * g(keep[b], keep[b]));
      sim.values(a, b) = sim.values(b, a) = std::clamp(c, 0.0, 1.0);
    }
  }
  return sim;
}

CosineGraph build_graph(const SimilarityMatrix& sim, double isolate_threshold,
                        double edge_threshold) {
  if (!(0.0 <= isolate_threshold && isolate_threshold <= edge_threshold && edge_threshold <= 1.0)) {
    throw Error(ErrorKind::kDomain, "thresholds must satisfy 0 <= isolate <= edge <= 1");
  }
  CosineGraph g;
  g.isolate_threshold = isolate_threshold;
  g.edge_threshold = edge_threshold;
  const Eigen::Index n = sim.values.rows();
  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = -1.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) best = std::max(best, sim.values(i, j));
    }
    if (best >= isolate_threshold) {
      kept.push_back(i);
      const auto si = static_cast<std::size_t>(i);
      g.nodes.push_back({sim.ids[si], si < sim.labels.size() ? sim.labels[si] : std::to_string(sim.ids[si])});
    } else {
      g.removed.push_back(sim.ids[static_cast<std::size_t>(i)]);
    }
  }
  if (g.nodes.empty()) {
    throw Error(ErrorKind::kDegenerate, "empty graph: every journal is an isolate at cosine " +
                                            text::format_exact(isolate_threshold));
  }
  for (std::size_t a = 0; a < kept.size(); ++a) {
    for (std::size_t b = a + 1; b < kept.size(); ++b) {
      const double w = sim.values(kept[a], kept[b]);
      if (w >= edge_threshold) g.edges.push_back({a, b, w});
    }
  }
  return g;
}

void write_pajek(std::ostream& out, const CosineGraph& g) {
  if (g.nodes.empty()) throw Error(ErrorKind::kDomain, "cannot export an empty graph");
  out << "*Vertices " << g.nodes.size() << '\n';
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    out << i + 1 << ' ' << quote(g.nodes[i].label) << '\n';
  }
  out << "*Edges\n";
  char w[64];
  for (const auto& e : g.edges) {
    std::snprintf(w, sizeof w, "%.4f", e.weight);
    out << e.i + 1 << ' ' << e.j + 1 << ' ' << w << '\n';
  }
}

void export_pajek(const CosineGraph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  write_pajek(out, g);
  if (!out) throw Error(ErrorKind::kIo, "write failed: " + path);
}

CosineGraph parse_pajek(std::istream& in) {
  CosineGraph g;
  std::string line;
  std::size_t line_no = 0;
  enum { kStart, kVertices, kEdges } section = kStart;
  std::size_t declared = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t(text::trim(line));
    if (t.empty() || t.front() == '%') continue;
    if (t.front() == '*') {
      const auto words = text::split_whitespace(t);
      const std::string head = lower(std::string(words[0]));
      if (head == "*vertices") {
        if (words.size() < 2) throw pajek_error(line_no, "missing vertex count");
        const auto count = text::parse_int(words[1]);
        if (!count || *count < 0) throw pajek_error(line_no, "bad vertex count");
        declared = static_cast<std::size_t>(*count);
        section = kVertices;
      } else if (head == "*edges") {
        if (g.nodes.size() != declared) throw pajek_error(line_no, "vertex count mismatch");
        section = kEdges;
      } else {
        throw pajek_error(line_no, "unsupported section " + std::string(words[0]));
      }
      continue;
    }
    if (section == kVertices) {
      std::istringstream row(t);
      std::string num;
      row >> num;
      const auto id = text::parse_int(num);
      if (!id || static_cast<std::size_t>(*id) != g.nodes.size() + 1) {
        throw pajek_error(line_no, "vertices must be numbered 1..n in order");
      }
      std::string rest;
      std::getline(row, rest);
      g.nodes.push_back({*id, read_label(rest, line_no)});
    } else if (section == kEdges) {
      const auto words = text::split_whitespace(t);
      if (words.size() < 2) throw pajek_error(line_no, "edge needs two vertices");
      const auto a = text::parse_int(words[0]);
      const auto b = text::parse_int(words[1]);
      if (!a || !b || *a < 1 || *b < 1 || static_cast<std::size_t>(*a) > g.nodes.size() ||
          static_cast<std::size_t>(*b) > g.nodes.size()) {
        throw pajek_error(line_no, "edge endpoint out of range");
      }
      double w = 1.0;
      if (words.size() >= 3) {
        const auto parsed = text::parse_double(words[2]);
        if (!parsed) throw pajek_error(line_no, "bad weight");
        w = *parsed;
      }
      auto i = static_cast<std::size_t>(*a - 1);
      auto j = static_cast<std::size_t>(*b - 1);
      if (i == j) throw pajek_error(line_no, "self-edge");
      if (i > j) std::swap(i, j);
      g.edges.push_back({i, j, w});
    } else {
      throw pajek_error(line_no, "data before *Vertices");
    }
  }
  if (section == kStart || g.nodes.size() != declared) {
    throw Error(ErrorKind::kParse, "pajek file has no complete *Vertices section");
  }
  std::sort(g.edges.begin(), g.edges.end(), [](const GraphEdge& x, const GraphEdge& y) {
    return std::tie(x.i, x.j) < std::tie(y.i, y.j);
  });
  return g;
}

CosineGraph import_pajek(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path);
  return parse_pajek(in);
}

double signed_log10(double x) {
  if (x == 0.0) return 0.0;
  return x > 0.0 ? std::log10(x) : -std::log10(-x);
}

ScatterSeries scatter_scores(const ScoreMatrix& scores, std::size_t factor_x,
                             std::size_t factor_y, const ScatterOptions& options,
                             const LabelMap* labels) {
  const std::size_t k = scores.k();
  if (factor_x < 1 || factor_x > k || factor_y < 1 || factor_y > k) {
    throw Error(ErrorKind::kDomain, "scatter factors must lie in 1.." + std::to_string(k));
  }
  if (factor_x == factor_y) throw Error(ErrorKind::kDomain, "scatter needs two distinct factors");
  if (!(options.min_abs >= 0.0)) throw Error(ErrorKind::kDomain, "min_abs must be >= 0");

  ScatterSeries series;
  series.factor_x = factor_x;
  series.factor_y = factor_y;
  series.rotated = scores.rotated;
  series.options = options;
  const auto cx = static_cast<Eigen::Index>(factor_x - 1);
  const auto cy = static_cast<Eigen::Index>(factor_y - 1);
  for (Eigen::Index r = 0; r < scores.values.rows(); ++r) {
    const double x = scores.values(r, cx);
    const double y = scores.values(r, cy);
    const bool px = std::abs(x) >= options.min_abs;
    const bool py = std::abs(y) >= options.min_abs;
    if (!(options.axis_rule == AxisRule::kBoth ? (px && py) : (px || py))) {
      ++series.below_threshold;
      continue;
    }
    ScatterPoint p;
    p.id = scores.case_ids[static_cast<std::size_t>(r)];
    if (labels) {
      const auto it = labels->find(p.id);
      p.label = it != labels->end() ? it->second : std::to_string(p.id);
    } else {
      p.label = std::to_string(p.id);
    }
    if (options.scale == ScatterScale::kLog) {
      const auto small = [](double v) { return v != 0.0 && std::abs(v) <= 1.0; };
      if (small(x) || small(y)) {
        ++series.excluded_log;
        continue;
      }
      p.x = signed_log10(x);
      p.y = signed_log10(y);
    } else {
      p.x = x;
      p.y = y;
    }
    series.points.push_back(std::move(p));
  }
  return series;
}

}  // namespace factor_atlas
