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

#ifndef FACTOR_ATLAS_DECOMPOSITION_HPP_
#define FACTOR_ATLAS_DECOMPOSITION_HPP_

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "factor_atlas/citation_matrix.hpp"
#include "factor_atlas/factor_engine.hpp"

namespace factor_atlas {

struct TopJournal {
  JournalId id = 0;
  double value = 0.0;
  // Another journal shares the maximum; the smallest id wins.
  bool tie = false;
};

struct FactorDesignation {
  std::size_t factor_index = 0;  // 1-based
  TopJournal top_loading;        // among variables (citing journals)
  TopJournal top_score;          // among cases (cited journals)
  std::size_t n_positive_scores = 0;
  std::size_t n_zero_scores = 0;  // excluded from membership
  std::string label;              // human-assigned, optional
};

using FactorLabels = std::map<std::size_t, std::string>;

std::vector<FactorDesignation> designate(const FactorModel& model, const ScoreMatrix& scores,
                                         const FactorLabels& factor_labels = {});

struct ClassificationSet {
  enum class Source { kFactor, kExternal };

  std::string label;
  std::set<JournalId> members;
  Source source = Source::kExternal;
  std::size_t factor_index = 0;  // 1-based, when source == kFactor
  std::string model_ref;
};

// Cases with score strictly above zero on `factor` (1-based).
ClassificationSet select_positive(const ScoreMatrix& scores, std::size_t factor,
                                  const std::string& label, const std::string& model_ref = {});

struct DecompositionNode {
  std::size_t level = 0;
  std::optional<std::size_t> parent_factor;
  CitationMatrix matrix;
  std::optional<FactorModel> model;
  std::optional<ScoreMatrix> scores;
  std::vector<FactorDesignation> designations;
  std::vector<JournalId> dropped_not_citing;
  std::vector<JournalId> dropped_zero_variance;
  std::vector<DecompositionNode> children;
};

// Level-0 node with a fitted k-factor model.
DecompositionNode make_root(CitationMatrix matrix, const FitOptions& options);

// Refits a k-factor varimax model from the raw counts of the selected
// journals. The child is returned; attaching it to parent.children is left
// to the caller.
DecompositionNode drill_down(const DecompositionNode& parent, const ClassificationSet& set,
                             std::size_t k, const VarimaxOptions& varimax = {});

struct SizeStats {
  double mean = 0.0;
  double sd = 0.0;  // sample (n - 1)
};

SizeStats size_stats(const std::vector<std::size_t>& counts);
SizeStats size_stats(const std::vector<FactorDesignation>& designations);

enum class EnvironmentRule { kEither, kBoth };

struct Environment {
  CitationMatrix matrix;
  std::set<JournalId> members;  // includes the seed
  double total_cited = 0.0;     // citations the seed receives
  double total_citing = 0.0;    // citations the seed gives
};

// Journals whose traffic with `seed` exceeds `fraction` of the seed's
// total cited (they cite the seed) or total citing (the seed cites them).
Environment local_environment(const CitationMatrix& m, JournalId seed, double fraction = 0.005,
                              EnvironmentRule rule = EnvironmentRule::kEither);

struct VennRegion {
  std::vector<bool> in_set;  // membership pattern, one flag per input set
  std::vector<JournalId> members;
};

struct PairJaccard {
  std::size_t a = 0;
  std::size_t b = 0;
  double jaccard = 0.0;
};

struct ComparisonReport {
  std::vector<std::string> labels;
  std::vector<std::size_t> sizes;
  std::vector<VennRegion> regions;  // non-empty regions only
  std::vector<PairJaccard> jaccard;
  std::size_t union_size = 0;
};

ComparisonReport compare_sets(const std::vector<ClassificationSet>& sets);

}  // namespace factor_atlas

#endif  // FACTOR_ATLAS_DECOMPOSITION_HPP_
