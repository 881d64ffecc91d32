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

#include "factor_atlas/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "factor_atlas/error.hpp"
#include "factor_atlas/text.hpp"

namespace factor_atlas {
namespace {

// Ids are ascending in both models and score matrices, so the first
// maximum is the smallest id.
TopJournal top_of(const Eigen::VectorXd& column, const std::vector<JournalId>& ids) {
  TopJournal top;
  if (column.size() == 0) return top;
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < column.size(); ++i) {
    if (column(i) > column(best)) best = i;
  }
  top.id = ids[static_cast<std::size_t>(best)];
  top.value = column(best);
  for (Eigen::Index i = 0; i < column.size(); ++i) {
    if (i != best && column(i) == column(best)) top.tie = true;
  }
  return top;
}

}  // namespace

std::vector<FactorDesignation> designate(const FactorModel& model, const ScoreMatrix& scores,
                                         const FactorLabels& factor_labels) {
  if (scores.k() != model.k()) {
    throw Error(ErrorKind::kDomain, "scores and model disagree on the number of factors");
  }
  std::vector<FactorDesignation> out;
  for (std::size_t j = 0; j < model.k(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    FactorDesignation d;
    d.factor_index = j + 1;
    d.top_loading = top_of(model.loadings.values.col(jj), model.variable_ids);
    d.top_score = top_of(scores.values.col(jj), scores.case_ids);
    d.n_positive_scores = static_cast<std::size_t>((scores.values.col(jj).array() > 0.0).count());
    d.n_zero_scores = static_cast<std::size_t>((scores.values.col(jj).array() == 0.0).count());
    if (auto it = factor_labels.find(j + 1); it != factor_labels.end()) d.label = it->second;
    out.push_back(std::move(d));
  }
  return out;
}

ClassificationSet select_positive(const ScoreMatrix& scores, std::size_t factor,
                                  const std::string& label, const std::string& model_ref) {
  if (factor < 1 || factor > scores.k()) {
    throw Error(ErrorKind::kDomain, "factor " + std::to_string(factor) + " out of range 1.." +
                                        std::to_string(scores.k()));
  }
  ClassificationSet set;
  set.label = label;
  set.source = ClassificationSet::Source::kFactor;
  set.factor_index = factor;
  set.model_ref = model_ref;
  const auto col = scores.values.col(static_cast<Eigen::Index>(factor - 1));
  for (Eigen::Index i = 0; i < col.size(); ++i) {
    if (col(i) > 0.0) set.members.insert(scores.case_ids[static_cast<std::size_t>(i)]);
  }
  if (set.members.empty()) {
    throw Error(ErrorKind::kEmptySelection,
                "no journal has a positive score on factor " + std::to_string(factor));
  }
  return set;
}

DecompositionNode make_root(CitationMatrix matrix, const FitOptions& options) {
  DecompositionNode root;
  FittedModel fitted = fit_factor_model(matrix, options);
  root.designations = designate(fitted.model, fitted.scores);
  root.model = std::move(fitted.model);
  root.scores = std::move(fitted.scores);
  root.matrix = std::move(matrix);
  return root;
}

DecompositionNode drill_down(const DecompositionNode& parent, const ClassificationSet& set,
                             std::size_t k, const VarimaxOptions& varimax) {
  if (k < 2) throw Error(ErrorKind::kDomain, "drill-down needs k >= 2 for the varimax model");
  for (JournalId id : set.members) {
    if (!parent.matrix.case_index(id)) {
      throw Error(ErrorKind::kNotFound,
                  "set member " + std::to_string(id) + " is not a case of the parent matrix");
    }
  }
  SubsetResult sub = subset(parent.matrix, set.members);
  if (sub.matrix.n_cases() >= parent.matrix.n_cases()) {
    throw Error(ErrorKind::kDegenerate, "drill-down did not reduce the case set");
  }
  if (k > sub.matrix.n_vars()) {
    throw Error(ErrorKind::kDomain, "k = " + std::to_string(k) + " exceeds the " +
                                        std::to_string(sub.matrix.n_vars()) +
                                        " variables left in the subset");
  }
  if (sub.matrix.n_cases() < k + 1 || sub.matrix.n_vars() < 2) {
    throw Error(ErrorKind::kDegenerate,
                "subset too small for a " + std::to_string(k) + "-factor model (" +
                    std::to_string(sub.matrix.n_cases()) + " cases, " +
                    std::to_string(sub.matrix.n_vars()) + " variables)");
  }

  DecompositionNode child;
  child.level = parent.level + 1;
  if (set.source == ClassificationSet::Source::kFactor) child.parent_factor = set.factor_index;
  child.dropped_not_citing = std::move(sub.not_citing);
  child.dropped_zero_variance = std::move(sub.zero_variance);

  FitOptions options;
  options.k = k;
  options.rotate = true;
  options.varimax = varimax;
  FittedModel fitted = fit_factor_model(sub.matrix, options);
  child.designations = designate(fitted.model, fitted.scores);
  child.model = std::move(fitted.model);
  child.scores = std::move(fitted.scores);
  child.matrix = std::move(sub.matrix);
  return child;
}

SizeStats size_stats(const std::vector<std::size_t>& counts) {
  if (counts.size() < 2) throw Error(ErrorKind::kDomain, "size statistics need at least 2 factors");
  const double n = static_cast<double>(counts.size());
  double mean = 0.0;
  for (auto c : counts) mean += static_cast<double>(c);
  mean /= n;
  double ss = 0.0;
  for (auto c : counts) ss += (static_cast<double>(c) - mean) * (static_cast<double>(c) - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

SizeStats size_stats(const std::vector<FactorDesignation>& designations) {
  std::vector<std::size_t> counts;
  for (const auto& d : designations) counts.push_back(d.n_positive_scores);
  return size_stats(counts);
}

Environment local_environment(const CitationMatrix& m, JournalId seed, double fraction,
                              EnvironmentRule rule) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw Error(ErrorKind::kDomain, "environment threshold must be a fraction in [0, 1]");
  }
  const auto row = m.case_index(seed);
  const auto col = m.variable_index(seed);
  if (!row || !col) {
    throw Error(ErrorKind::kNotFound,
                "seed journal " + std::to_string(seed) + " must be both cited and citing");
  }
  const auto& cells = m.cells();
  Environment env;
  // Row of the seed: who cites it. Column of the seed: whom it cites.
  std::map<JournalId, double> cites_seed;
  std::map<JournalId, double> cited_by_seed;
  for (Eigen::Index c = 0; c < cells.outerSize(); ++c) {
    for (SparseCounts::InnerIterator it(cells, c); it; ++it) {
      if (static_cast<std::size_t>(it.row()) == *row) {
        env.total_cited += it.value();
        cites_seed[m.variables()[static_cast<std::size_t>(c)]] = it.value();
      }
      if (static_cast<std::size_t>(c) == *col) {
        env.total_citing += it.value();
        cited_by_seed[m.cases()[static_cast<std::size_t>(it.row())]] = it.value();
      }
    }
  }
  const double cited_cut = fraction * env.total_cited;
  const double citing_cut = fraction * env.total_citing;
  std::set<JournalId> candidates;
  for (const auto& [id, v] : cites_seed) candidates.insert(id);
  for (const auto& [id, v] : cited_by_seed) candidates.insert(id);

  env.members.insert(seed);
  for (JournalId id : candidates) {
    if (id == seed) continue;
    const auto a = cites_seed.find(id);
    const auto b = cited_by_seed.find(id);
    const bool by_cited = a != cites_seed.end() && a->second > cited_cut;
    const bool by_citing = b != cited_by_seed.end() && b->second > citing_cut;
    const bool keep = rule == EnvironmentRule::kEither ? (by_cited || by_citing) : (by_cited && by_citing);
    if (keep) env.members.insert(id);
  }
  if (env.members.size() < 2) {
    throw Error(ErrorKind::kDegenerate, "citation environment of " + std::to_string(seed) +
                                            " contains only the seed at threshold " +
                                            text::format_exact(fraction));
  }
  env.matrix = restrict_to(m, env.members);
  return env;
}

ComparisonReport compare_sets(const std::vector<ClassificationSet>& sets) {
  if (sets.size() < 2 || sets.size() > 5) {
    throw Error(ErrorKind::kDomain, "compare needs 2 to 5 sets, got " + std::to_string(sets.size()));
  }
  ComparisonReport report;
  std::map<JournalId, unsigned> mask_of;
  for (std::size_t s = 0; s < sets.size(); ++s) {
    report.labels.push_back(sets[s].label);
    report.sizes.push_back(sets[s].members.size());
    for (JournalId id : sets[s].members) mask_of[id] |= 1u << s;
  }
  report.union_size = mask_of.size();

  std::map<unsigned, std::vector<JournalId>> by_mask;
  for (const auto& [id, mask] : mask_of) by_mask[mask].push_back(id);
  for (auto& [mask, members] : by_mask) {
    VennRegion region;
    for (std::size_t s = 0; s < sets.size(); ++s) region.in_set.push_back((mask >> s) & 1u);
    region.members = std::move(members);
    report.regions.push_back(std::move(region));
  }

  for (std::size_t a = 0; a < sets.size(); ++a) {
    for (std::size_t b = a + 1; b < sets.size(); ++b) {
      std::size_t both = 0;
      for (JournalId id : sets[a].members) both += sets[b].members.count(id);
      const std::size_t either = sets[a].members.size() + sets[b].members.size() - both;
      report.jaccard.push_back({a, b, either ? static_cast<double>(both) / static_cast<double>(either) : 0.0});
    }
  }
  return report;
}

}  // namespace factor_atlas
