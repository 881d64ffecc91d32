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

#include "factor_atlas/pipeline.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <optional>
#include <sstream>

#include "factor_atlas/citation_matrix.hpp"
#include "factor_atlas/decomposition.hpp"
#include "factor_atlas/text.hpp"

namespace factor_atlas {
namespace fs = std::filesystem;
namespace {

Error bad_value(const std::string& key, const std::string& value) {
  return Error(ErrorKind::kDomain, "bad value for " + key + ": '" + value + "'");
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw bad_value(key, v);
}

double to_double(const std::string& key, const std::string& v) {
  const auto d = text::parse_double(v);
  if (!d) throw bad_value(key, v);
  return *d;
}

std::int64_t to_int(const std::string& key, const std::string& v) {
  const auto i = text::parse_int(v);
  if (!i) throw bad_value(key, v);
  return *i;
}

std::size_t to_count(const std::string& key, const std::string& v) {
  const auto i = to_int(key, v);
  if (i < 0) throw bad_value(key, v);
  return static_cast<std::size_t>(i);
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + '"';
}

std::string unquoted(std::string_view v, std::size_t line_no) {
  if (v.empty() || v.front() != '"') return std::string(v);
  std::string out;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] == '\\' && i + 1 < v.size()) {
      out += v[++i];
    } else if (v[i] == '"') {
      if (!text::trim(v.substr(i + 1)).empty()) break;
      return out;
    } else {
      out += v[i];
    }
  }
  throw Error(ErrorKind::kParse, "config line " + std::to_string(line_no) + ": bad string");
}

const char* route_name(EigenRoute r) {
  switch (r) {
    case EigenRoute::kDense: return "dense";
    case EigenRoute::kImplicit: return "implicit";
    default: return "auto";
  }
}

std::string join_counts(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

// Ordered (key, rendered value) pairs; strings come quoted.
std::vector<std::pair<std::string, std::string>> rendered(const RunConfig& c) {
  const auto b = [](bool x) { return std::string(x ? "true" : "false"); };
  const auto d = [](double x) { return text::format_exact(x); };
  return {
      {"input", quoted(c.input)},
      {"labels", quoted(c.labels)},
      {"output_dir", quoted(c.output_dir)},
      {"drop_diagonal", b(c.drop_diagonal)},
      {"variance_threshold", d(c.variance_threshold)},
      {"k", std::to_string(c.k)},
      {"route", route_name(c.route)},
      {"seed", std::to_string(c.seed)},
      {"rotate", b(c.rotate)},
      {"kaiser_normalize", b(c.kaiser_normalize)},
      {"varimax_tolerance", d(c.varimax_tolerance)},
      {"max_sweeps", std::to_string(c.max_sweeps)},
      {"suppress_below", d(c.suppress_below)},
      {"select_factor", std::to_string(c.select_factor)},
      {"drill", b(c.drill)},
      {"drill_k", std::to_string(c.drill_k)},
      {"compare", b(c.compare)},
      {"compare_factors", quoted(join_counts(c.compare_factors))},
      {"orientation", c.orientation == Orientation::kCitedRows ? "cited-rows" : "citing-columns"},
      {"isolate_cos", d(c.isolate_cos)},
      {"edge_cos", d(c.edge_cos)},
      {"scatter_x", std::to_string(c.scatter_x)},
      {"scatter_y", std::to_string(c.scatter_y)},
      {"scatter_min_abs", d(c.scatter_min_abs)},
      {"scatter_axis", c.scatter_axis == AxisRule::kBoth ? "both" : "either"},
      {"scatter_log", b(c.scatter_log)},
      {"threads", std::to_string(c.threads)},
  };
}

}  // namespace

void set_option(RunConfig& c, const std::string& key, const std::string& value) {
  const std::string& v = value;
  if (key == "input") c.input = v;
  else if (key == "labels") c.labels = v;
  else if (key == "output_dir") c.output_dir = v;
  else if (key == "drop_diagonal") c.drop_diagonal = to_bool(key, v);
  else if (key == "variance_threshold") c.variance_threshold = to_double(key, v);
  else if (key == "k") c.k = to_count(key, v);
  else if (key == "route") {
    if (v == "auto") c.route = EigenRoute::kAuto;
    else if (v == "dense") c.route = EigenRoute::kDense;
    else if (v == "implicit") c.route = EigenRoute::kImplicit;
    else throw bad_value(key, v);
  } else if (key == "seed") {
    const auto i = to_int(key, v);
    if (i < 0) throw bad_value(key, v);
    c.seed = static_cast<std::uint64_t>(i);
  } else if (key == "rotate") c.rotate = to_bool(key, v);
  else if (key == "kaiser_normalize") c.kaiser_normalize = to_bool(key, v);
  else if (key == "varimax_tolerance") c.varimax_tolerance = to_double(key, v);
  else if (key == "max_sweeps") c.max_sweeps = static_cast<int>(to_int(key, v));
  else if (key == "suppress_below") c.suppress_below = to_double(key, v);
  else if (key == "select_factor") c.select_factor = to_count(key, v);
  else if (key == "drill") c.drill = to_bool(key, v);
  else if (key == "drill_k") c.drill_k = to_count(key, v);
  else if (key == "compare") c.compare = to_bool(key, v);
  else if (key == "compare_factors") {
    c.compare_factors.clear();
    for (auto part : text::split(v, ',')) {
      if (!text::trim(part).empty()) c.compare_factors.push_back(to_count(key, std::string(text::trim(part))));
    }
  } else if (key == "orientation") {
    if (v == "cited-rows") c.orientation = Orientation::kCitedRows;
    else if (v == "citing-columns") c.orientation = Orientation::kCitingColumns;
    else throw bad_value(key, v);
  } else if (key == "isolate_cos") c.isolate_cos = to_double(key, v);
  else if (key == "edge_cos") c.edge_cos = to_double(key, v);
  else if (key == "scatter_x") c.scatter_x = to_count(key, v);
  else if (key == "scatter_y") c.scatter_y = to_count(key, v);
  else if (key == "scatter_min_abs") c.scatter_min_abs = to_double(key, v);
  else if (key == "scatter_axis") {
    if (v == "both") c.scatter_axis = AxisRule::kBoth;
    else if (v == "either") c.scatter_axis = AxisRule::kEither;
    else throw bad_value(key, v);
  } else if (key == "scatter_log") c.scatter_log = to_bool(key, v);
  else if (key == "threads") c.threads = static_cast<int>(to_int(key, v));
  else throw Error(ErrorKind::kDomain, "unknown config key: " + key);
}

std::vector<std::string> option_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, v] : rendered(RunConfig{})) keys.push_back(k);
  return keys;
}

RunConfig parse_run_config(std::istream& in) {
  RunConfig c;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorKind::kParse, "config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(text::trim(t.substr(0, eq)));
    set_option(c, key, unquoted(text::trim(t.substr(eq + 1)), line_no));
  }
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::istringstream in(read_text_file(path));
  return parse_run_config(in);
}

std::string to_text(const RunConfig& config) {
  std::string out;
  for (const auto& [k, v] : rendered(config)) out += k + " = " + v + "\n";
  return out;
}

Json config_json(const RunConfig& config) {
  Json j;
  for (const auto& [k, v] : rendered(config)) {
    j[k] = v.size() >= 2 && v.front() == '"' ? unquoted(v, 0) : v;
  }
  return j;
}

void validate(const RunConfig& c) {
  const auto fail = [](const std::string& what) { throw Error(ErrorKind::kDomain, what); };
  if (c.input.empty()) fail("config: input is required");
  if (c.output_dir.empty()) fail("config: output_dir is required");
  if (!(c.variance_threshold >= 0.0)) fail("config: variance_threshold must be >= 0");
  if (c.k < 1) fail("config: k must be >= 1");
  if (!(c.varimax_tolerance > 0.0)) fail("config: varimax_tolerance must be > 0");
  if (c.max_sweeps < 1) fail("config: max_sweeps must be >= 1");
  if (!(c.suppress_below >= 0.0)) fail("config: suppress_below must be >= 0");
  if (c.select_factor < 1) fail("config: select_factor must be >= 1");
  if (c.drill_k < 2) fail("config: drill_k must be >= 2");
  if (!(0.0 <= c.isolate_cos && c.isolate_cos <= c.edge_cos && c.edge_cos <= 1.0)) {
    fail("config: need 0 <= isolate_cos <= edge_cos <= 1");
  }
  if (c.scatter_x < 1 || c.scatter_y < 1 || c.scatter_x == c.scatter_y) {
    fail("config: scatter_x and scatter_y must be distinct factors");
  }
  if (!(c.scatter_min_abs >= 0.0)) fail("config: scatter_min_abs must be >= 0");
  if (c.threads < 1) fail("config: threads must be >= 1");
}

const std::vector<std::string>& default_stages() {
  static const std::vector<std::string> stages = {"ingest", "filter", "factor",    "rotate",
                                                  "score",  "designate", "select", "map"};
  return stages;
}

StageError::StageError(std::string stage, const Error& cause)
    : Error(cause.kind(), "stage " + stage + ": " + cause.what()), stage_(std::move(stage)) {}

namespace {

struct Run {
  const RunConfig& config;
  fs::path out;
  Json manifest;
  Json* stage = nullptr;

  void emit(const std::string& rel, const std::string& content) {
    const fs::path path = out / rel;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_text_file(path.string(), content);
    (*stage)["artifacts"].push_back({{"path", rel}, {"sha256", sha256_hex(content)}, {"bytes", content.size()}});
  }

  void warn(const std::string& message) {
    (*stage)["warnings"].push_back(message);
    manifest["warnings"].push_back((*stage)["name"].get<std::string>() + ": " + message);
  }

  void write_manifest() { save_json((out / "manifest.json").string(), manifest); }

  void run(const std::string& name, const std::function<void(Json& info)>& body) {
    manifest["stages"].push_back({{"name", name}, {"status", "running"}, {"artifacts", Json::array()},
                                  {"warnings", Json::array()}, {"info", Json::object()}});
    stage = &manifest["stages"].back();
    try {
      body((*stage)["info"]);
    } catch (const Error& e) {
      (*stage)["status"] = "failed";
      manifest["status"] = "failed";
      manifest["failed_stage"] = name;
      manifest["error"] = {{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}};
      write_manifest();
      throw StageError(name, e);
    } catch (const fs::filesystem_error& e) {
      const Error io(ErrorKind::kIo, e.what());
      (*stage)["status"] = "failed";
      manifest["status"] = "failed";
      manifest["failed_stage"] = name;
      manifest["error"] = {{"kind", "io"}, {"message", e.what()}};
      write_manifest();
      throw StageError(name, io);
    }
    (*stage)["status"] = "ok";
  }
};

template <typename F>
std::string render(F&& write) {
  std::ostringstream out;
  write(out);
  return out.str();
}

std::string set_name(std::size_t factor) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "sets/factor_%02zu.set", factor);
  return buf;
}

}  // namespace

Json run_pipeline(const RunConfig& config) {
  validate(config);
  Eigen::setNbThreads(config.threads);

  Run run{config, fs::path(config.output_dir), Json::object()};
  try {
    fs::create_directories(run.out);
  } catch (const fs::filesystem_error& e) {
    throw Error(ErrorKind::kIo, std::string("cannot create output directory: ") + e.what());
  }
  run.manifest["tool"] = "factor-atlas";
  run.manifest["manifest_version"] = 1;
  run.manifest["config"] = config_json(config);
  run.manifest["status"] = "running";
  run.manifest["inputs"] = Json::array();
  run.manifest["stages"] = Json::array();
  run.manifest["warnings"] = Json::array();

  CitationMatrix raw;
  CitationMatrix filtered;
  std::optional<StandardizedMatrix> z;
  Eigen::MatrixXd corr;
  FactorModel model;
  ScoreMatrix scores;
  std::vector<FactorDesignation> designations;
  std::map<std::size_t, ClassificationSet> sets;

  run.run("ingest", [&](Json& info) {
    const std::string edges = read_text_file(config.input);
    run.manifest["inputs"].push_back({{"role", "edges"}, {"sha256", sha256_hex(edges)}});
    LabelMap labels;
    if (!config.labels.empty()) {
      const std::string text = read_text_file(config.labels);
      run.manifest["inputs"].push_back({{"role", "labels"}, {"sha256", sha256_hex(text)}});
      std::istringstream in(text);
      labels = read_label_map(in);
    }
    std::istringstream in(edges);
    raw = read_any(in, config.labels.empty() ? nullptr : &labels, IngestOptions{config.drop_diagonal});
    run.emit("matrix.fam", render([&](std::ostream& o) { write_matrix(o, raw); }));
    const MatrixStats stats = compute_stats(raw);
    run.emit("stats.json", stats_json(stats).dump(2) + "\n");
    if (stats.empty_links) run.warn("no links; mean_per_link defaulted to 0");
    info = stats_json(stats);
  });

  run.run("filter", [&](Json& info) {
    FilterResult r = filter_by_variance(raw, config.variance_threshold);
    filtered = std::move(r.matrix);
    run.emit("filtered.fam", render([&](std::ostream& o) { write_matrix(o, filtered); }));
    run.emit("dropped.tsv", render([&](std::ostream& o) {
               write_dropped_tsv(o, r.dropped, raw.labels(), "variance below threshold");
             }));
    info = {{"kept_variables", filtered.n_vars()}, {"dropped_variables", r.dropped.size()}};
  });

  run.run("factor", [&](Json& info) {
    z = StandardizedMatrix::from_counts(filtered);
    const std::size_t p = filtered.n_vars();
    if (config.k > p) {
      throw Error(ErrorKind::kDomain, "requested " + std::to_string(config.k) + " factors from " +
                                          std::to_string(p) + " variables");
    }
    const FitOptions defaults;
    const bool implicit = config.route == EigenRoute::kImplicit ||
                          (config.route == EigenRoute::kAuto && p > defaults.implicit_above &&
                           config.k * 4 <= p);
    if (!implicit || config.rotate) corr = z->correlation();
    ImplicitOptions io;
    io.seed = static_cast<unsigned>(config.seed);
    Extraction ex = implicit ? eigendecompose_implicit(*z, config.k, io)
                             : eigendecompose(corr, config.k, filtered.variables());
    model = make_model(std::move(ex));
    run.emit("eigenvalues.tsv", render([&](std::ostream& o) { write_eigenvalues_tsv(o, model.spectrum); }));
    LoadingsMatrix unrotated{model.unrotated, model.variable_ids, false};
    run.emit("unrotated_loadings.tsv",
             render([&](std::ostream& o) { write_loadings_tsv(o, unrotated, filtered.labels()); }));
    info = {{"route", implicit ? "implicit" : "dense"}, {"k", config.k}};
    if (model.spectrum.complete) info["eigenvalues_above_one"] = kaiser_count(model.spectrum);
  });

  if (config.rotate) {
    run.run("rotate", [&](Json& info) {
      VarimaxOptions vo;
      vo.kaiser_normalize = config.kaiser_normalize;
      vo.tolerance = config.varimax_tolerance;
      vo.max_sweeps = config.max_sweeps;
      rotate_varimax(model, vo);
      for (const auto& w : model.warnings) run.warn(w);
      run.emit("loadings.tsv",
               render([&](std::ostream& o) { write_loadings_tsv(o, model.loadings, filtered.labels()); }));
      run.emit("loadings.txt", render([&](std::ostream& o) {
                 write_loadings_table(o, model.loadings, filtered.labels(), config.suppress_below);
               }));
      info = {{"sweeps", model.rotation->sweeps},
              {"converged", model.rotation->converged},
              {"criterion", model.rotation->criterion}};
    });
  } else {
    run.run("rotate", [&](Json& info) {
      info = {{"skipped", true}};
      run.emit("loadings.tsv",
               render([&](std::ostream& o) { write_loadings_tsv(o, model.loadings, filtered.labels()); }));
    });
  }

  run.run("score", [&](Json& info) {
    const std::size_t before = model.warnings.size();
    scores = factor_scores(model, *z, corr, filtered.cases());
    for (std::size_t i = before; i < model.warnings.size(); ++i) run.warn(model.warnings[i]);
    run.emit("scores.tsv", render([&](std::ostream& o) { write_scores_tsv(o, scores); }));
    run.emit("model.json", model_json(model, "scores.tsv").dump(2) + "\n");
    info = {{"cases", scores.case_ids.size()}, {"ridge_applied", model.ridge_applied}};
  });

  run.run("designate", [&](Json& info) {
    designations = designate(model, scores);
    run.emit("designations.tsv", render([&](std::ostream& o) {
               write_designations_tsv(o, designations, filtered.labels(), filtered.n_vars(),
                                      filtered.n_cases());
             }));
    std::vector<std::size_t> sizes;
    for (const auto& d : designations) sizes.push_back(d.n_positive_scores);
    info = {{"positive_counts", sizes}};
    if (sizes.size() >= 2) {
      const SizeStats s = size_stats(sizes);
      info["size_mean"] = s.mean;
      info["size_sd"] = s.sd;
    }
  });

  run.run("select", [&](Json& info) {
    if (config.select_factor > model.k()) {
      throw Error(ErrorKind::kDomain, "select_factor " + std::to_string(config.select_factor) +
                                          " exceeds k = " + std::to_string(model.k()));
    }
    for (std::size_t f = 1; f <= model.k(); ++f) {
      try {
        ClassificationSet s = select_positive(scores, f, "factor " + std::to_string(f), "model.json");
        run.emit(set_name(f), render([&](std::ostream& o) { write_set(o, s); }));
        sets.emplace(f, std::move(s));
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::kEmptySelection || f == config.select_factor) throw;
        run.warn(e.what());
      }
    }
    info = {{"focus_factor", config.select_factor},
            {"focus_size", sets.at(config.select_factor).members.size()}};
  });

  if (config.drill) {
    run.run("drill", [&](Json& info) {
      DecompositionNode root;
      root.matrix = raw;
      const DecompositionNode child = drill_down(root, sets.at(config.select_factor), config.drill_k);
      run.emit("drill/matrix.fam", render([&](std::ostream& o) { write_matrix(o, child.matrix); }));
      run.emit("drill/eigenvalues.tsv",
               render([&](std::ostream& o) { write_eigenvalues_tsv(o, child.model->spectrum); }));
      run.emit("drill/scores.tsv", render([&](std::ostream& o) { write_scores_tsv(o, *child.scores); }));
      run.emit("drill/model.json", model_json(*child.model, "scores.tsv").dump(2) + "\n");
      run.emit("drill/designations.tsv", render([&](std::ostream& o) {
                 write_designations_tsv(o, child.designations, raw.labels(), child.matrix.n_vars(),
                                        child.matrix.n_cases());
               }));
      run.emit("drill/dropped.tsv", render([&](std::ostream& o) {
                 write_dropped_tsv(o, child.dropped_not_citing, raw.labels(), "not citing");
                 write_dropped_tsv(o, child.dropped_zero_variance, raw.labels(), "zero variance",
                                   false);
               }));
      for (const auto& w : child.model->warnings) run.warn(w);
      std::vector<std::size_t> sizes;
      for (const auto& d : child.designations) sizes.push_back(d.n_positive_scores);
      info = {{"parent_factor", config.select_factor},
              {"cases", child.matrix.n_cases()},
              {"variables", child.matrix.n_vars()},
              {"positive_counts", sizes}};
      if (child.model->spectrum.complete) info["eigenvalues_above_one"] = kaiser_count(child.model->spectrum);
    });
  }

  run.run("map", [&](Json& info) {
    const CitationMatrix focus = restrict_to(raw, sets.at(config.select_factor).members);
    const SimilarityMatrix sim = cosine_similarity(focus, config.orientation);
    if (!sim.excluded_zero.empty()) {
      run.warn(std::to_string(sim.excluded_zero.size()) + " journals with an all-zero profile excluded");
    }
    const CosineGraph g = build_graph(sim, config.isolate_cos, config.edge_cos);
    run.emit("map.net", render([&](std::ostream& o) { write_pajek(o, g); }));
    info = {{"nodes", g.nodes.size()}, {"edges", g.edges.size()}, {"isolates_removed", g.removed.size()}};
    if (std::max(config.scatter_x, config.scatter_y) <= scores.k()) {
      ScatterOptions so{config.scatter_min_abs, config.scatter_axis,
                        config.scatter_log ? ScatterScale::kLog : ScatterScale::kLinear};
      const ScatterSeries s = scatter_scores(scores, config.scatter_x, config.scatter_y, so, &raw.labels());
      run.emit("scatter.tsv", render([&](std::ostream& o) { write_scatter_tsv(o, s); }));
      run.emit("scatter.json", scatter_json(s).dump(2) + "\n");
      info["scatter_points"] = s.points.size();
    } else {
      run.warn("scatter skipped: the model has fewer factors than the requested axes");
    }
  });

  if (config.compare) {
    run.run("compare", [&](Json& info) {
      std::vector<ClassificationSet> chosen;
      for (std::size_t f : config.compare_factors) {
        const auto it = sets.find(f);
        if (it == sets.end()) {
          throw Error(ErrorKind::kDomain, "no positive-score set for factor " + std::to_string(f));
        }
        chosen.push_back(it->second);
      }
      const ComparisonReport r = compare_sets(chosen);
      run.emit("compare.json", comparison_json(r).dump(2) + "\n");
      run.emit("compare.txt", render([&](std::ostream& o) { write_comparison_summary(o, r, raw.labels()); }));
      info = {{"union", r.union_size}, {"regions", r.regions.size()}};
    });
  }

  run.manifest["status"] = "ok";
  run.write_manifest();
  return run.manifest;
}

}  // namespace factor_atlas
