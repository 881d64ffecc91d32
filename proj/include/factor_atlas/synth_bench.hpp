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

#ifndef FACTOR_ATLAS_SYNTH_BENCH_HPP_
#define FACTOR_ATLAS_SYNTH_BENCH_HPP_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "factor_atlas/citation_matrix.hpp"
#include "factor_atlas/factor_engine.hpp"

namespace factor_atlas {

// Each top-level block splits into `sub_blocks` sub-blocks of
// journals_per_block journals. Within a sub-block cells use lambda_sub,
// across sub-blocks of one block lambda_in, across blocks lambda_out.
struct NestedSpec {
  std::size_t sub_blocks = 3;
  double lambda_sub = 20.0;
};

struct BlockSpec {
  std::size_t n_blocks = 6;
  std::size_t journals_per_block = 30;
  double lambda_in = 20.0;
  double lambda_out = 0.5;
  std::optional<NestedSpec> nested;
  std::uint64_t seed = 42;

  std::size_t n_journals() const;
};

// Throws kDomain describing the first violated constraint.
void validate(const BlockSpec& spec);

struct PlantedAssignment {
  std::map<JournalId, int> block;
  // Global sub-block index; empty unless the spec was nested.
  std::map<JournalId, int> sub_block;
};

struct SyntheticCorpus {
  CitationMatrix matrix;
  PlantedAssignment truth;
};

// Cell (i, j) ~ Poisson(intensity of the pair), zeros omitted. Ids are
// 0..N-1 in block order; every journal is both a case and a variable.
SyntheticCorpus generate_block_model(const BlockSpec& spec);

enum class AssignmentBasis { kLoading, kScore };

struct RecoveryReport {
  double accuracy = 0.0;
  // Rows follow `blocks`; columns are factors 1..k plus a final column of
  // journals the pipeline could not assign (e.g. dropped variables).
  Eigen::MatrixXi confusion;
  std::vector<int> blocks;
  // Matched factor (0-based) per block row, -1 when unmatched.
  std::vector<int> block_to_factor;
  bool greedy_matching = false;
  std::map<JournalId, int> assigned_factor;
};

// Best one-to-one block/factor pairing maximizing matched journals.
// Exhaustive when the factor count is at most 8, greedy otherwise.
std::vector<int> match_blocks(const Eigen::MatrixXi& weights, bool* greedy);

// Scores an arbitrary journal -> factor assignment against the truth.
RecoveryReport score_assignment(const std::map<JournalId, int>& truth,
                                const std::map<JournalId, int>& assigned, std::size_t k);

// Per-journal factor from a fitted model: argmax |rotated loading| for
// kLoading, argmax score for kScore; -1 when the journal is absent.
std::map<JournalId, int> assign_journals(const FittedModel& fitted, AssignmentBasis basis);

struct RecoveryOptions {
  AssignmentBasis basis = AssignmentBasis::kScore;
  VarimaxOptions varimax;
};

// standardize -> correlate -> extract k -> varimax (k >= 2) -> scores ->
// argmax assignment -> optimal matching.
RecoveryReport evaluate_recovery(const CitationMatrix& m, const std::map<JournalId, int>& truth,
                                 std::size_t k, RecoveryOptions options = {});

// `journal_id <TAB> block_index [<TAB> sub_block]` with a '#' header.
void write_truth(std::ostream& out, const PlantedAssignment& truth);
PlantedAssignment read_truth(std::istream& in);

}  // namespace factor_atlas

#endif  // FACTOR_ATLAS_SYNTH_BENCH_HPP_
