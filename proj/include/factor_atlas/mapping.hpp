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

#ifndef FACTOR_ATLAS_MAPPING_HPP_
#define FACTOR_ATLAS_MAPPING_HPP_

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "factor_atlas/citation_matrix.hpp"
#include "factor_atlas/factor_engine.hpp"

namespace factor_atlas {

// kCitedRows compares cited journals by who cites them (matrix rows);
// kCitingColumns compares citing journals by what they cite.
enum class Orientation { kCitedRows, kCitingColumns };

struct SimilarityMatrix {
  std::vector<JournalId> ids;
  std::vector<std::string> labels;
  Eigen::MatrixXd values;
  // Journals with an all-zero profile; left out of `ids`.
  std::vector<JournalId> excluded_zero;
};

// Cosine on raw counts. Diagonal is exactly 1.
SimilarityMatrix cosine_similarity(const CitationMatrix& m,
                                   Orientation orientation = Orientation::kCitedRows);

struct GraphNode {
  JournalId id = 0;
  std::string label;
};

struct GraphEdge {
  std::size_t i = 0;  // node positions, i < j
  std::size_t j = 0;
  double weight = 0.0;
};

struct CosineGraph {
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;  // sorted by (i, j)
  double isolate_threshold = 0.0;
  double edge_threshold = 0.0;
  std::vector<JournalId> removed;  // isolates
};

CosineGraph build_graph(const SimilarityMatrix& sim, double isolate_threshold = 0.2,
                        double edge_threshold = 0.5);

// Pajek .net. Vertices are numbered 1..n in node order; weights carry four
// decimals. Parsed graphs take the vertex numbers as journal ids.
void write_pajek(std::ostream& out, const CosineGraph& g);
void export_pajek(const CosineGraph& g, const std::string& path);
CosineGraph parse_pajek(std::istream& in);
CosineGraph import_pajek(const std::string& path);

enum class AxisRule { kBoth, kEither };
enum class ScatterScale { kLinear, kLog };

struct ScatterOptions {
  double min_abs = 10.0;  // a coordinate passes when |score| >= min_abs
  AxisRule axis_rule = AxisRule::kBoth;
  ScatterScale scale = ScatterScale::kLinear;
};

struct ScatterPoint {
  JournalId id = 0;
  std::string label;
  double x = 0.0;  // plotted coordinates, after scaling
  double y = 0.0;
};

struct ScatterSeries {
  std::size_t factor_x = 0;  // 1-based
  std::size_t factor_y = 0;
  bool rotated = false;
  ScatterOptions options;
  std::vector<ScatterPoint> points;
  std::size_t below_threshold = 0;
  // Log scale only: points with a coordinate of magnitude in (0, 1].
  std::size_t excluded_log = 0;
};

// sign(x) * log10|x|; 0 maps to 0.
double signed_log10(double x);

ScatterSeries scatter_scores(const ScoreMatrix& scores, std::size_t factor_x,
                             std::size_t factor_y, const ScatterOptions& options = {},
                             const LabelMap* labels = nullptr);

}  // namespace factor_atlas

#endif  // FACTOR_ATLAS_MAPPING_HPP_
