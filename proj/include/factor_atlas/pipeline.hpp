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

#ifndef FACTOR_ATLAS_PIPELINE_HPP_
#define FACTOR_ATLAS_PIPELINE_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "factor_atlas/artifacts.hpp"
#include "factor_atlas/error.hpp"
#include "factor_atlas/factor_engine.hpp"
#include "factor_atlas/mapping.hpp"

namespace factor_atlas {

struct RunConfig {
  std::string input;   // edge list
  std::string labels;  // optional id <TAB> label file
  std::string output_dir = "atlas-out";
  bool drop_diagonal = false;
  double variance_threshold = 8.0;

  std::size_t k = 12;
  EigenRoute route = EigenRoute::kAuto;
  std::uint64_t seed = 20040101u;  // implicit eigensolver start block
  bool rotate = true;
  bool kaiser_normalize = true;
  double varimax_tolerance = 1e-6;
  int max_sweeps = 100;
  double suppress_below = 0.10;

  std::size_t select_factor = 1;
  bool drill = false;
  std::size_t drill_k = 12;
  bool compare = false;
  std::vector<std::size_t> compare_factors = {1, 2, 3};

  Orientation orientation = Orientation::kCitedRows;
  double isolate_cos = 0.2;
  double edge_cos = 0.5;

  std::size_t scatter_x = 1;
  std::size_t scatter_y = 2;
  double scatter_min_abs = 10.0;
  AxisRule scatter_axis = AxisRule::kBoth;
  bool scatter_log = false;

  int threads = 1;

  bool operator==(const RunConfig&) const = default;
};

// Applies one `key = value` setting; unknown keys and bad values raise
// a domain error.
void set_option(RunConfig& config, const std::string& key, const std::string& value);
std::vector<std::string> option_keys();

// TOML-like text: `key = value` lines, '#' comments, strings in quotes.
RunConfig parse_run_config(std::istream& in);
RunConfig load_run_config(const std::string& path);
std::string to_text(const RunConfig& config);
Json config_json(const RunConfig& config);

void validate(const RunConfig& config);

// Default stages, in order; "drill" and "compare" are opt-in and run
// between "select" and "map" and after "map" respectively.
const std::vector<std::string>& default_stages();

class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause);
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

// Runs every stage, writing artifacts and `manifest.json` under
// config.output_dir. On failure the partial manifest is still written and
// a StageError naming the stage is thrown.
Json run_pipeline(const RunConfig& config);

}  // namespace factor_atlas

#endif  // FACTOR_ATLAS_PIPELINE_HPP_
