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

// factor-atlas: command-line front end. Each subcommand is a thin shell
// over one library operation and reads/writes the on-disk artifacts.

#include <CLI11.hpp>
#include <Eigen/Core>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "factor_atlas/artifacts.hpp"
#include "factor_atlas/citation_matrix.hpp"
#include "factor_atlas/decomposition.hpp"
#include "factor_atlas/error.hpp"
#include "factor_atlas/factor_engine.hpp"
#include "factor_atlas/mapping.hpp"
#include "factor_atlas/pipeline.hpp"
#include "factor_atlas/synth_bench.hpp"
#include "factor_atlas/text.hpp"

namespace fa = factor_atlas;
namespace fs = std::filesystem;

namespace {

// Writes to a file, or stdout for "-".
void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
  } else {
    fa::write_text_file(path, content);
  }
}

template <typename F>
std::string render(F&& write) {
  std::ostringstream out;
  write(out);
  return out.str();
}

fa::LabelMap load_labels(const std::string& path) {
  if (path.empty()) return {};
  std::istringstream in(fa::read_text_file(path));
  return fa::read_label_map(in);
}

fa::CitationMatrix load_input(const std::string& path, const std::string& labels_path = {},
                              bool drop_diagonal = false) {
  const fa::LabelMap labels = load_labels(labels_path);
  return fa::load_any(path, labels_path.empty() ? nullptr : &labels,
                      fa::IngestOptions{drop_diagonal});
}

void write_model_outputs(const fs::path& dir, const fa::FactorModel& model,
                         const fa::ScoreMatrix& scores, const fa::LabelMap& labels,
                         double suppress_below) {
  fs::create_directories(dir);
  const auto at = [&](const char* name) { return (dir / name).string(); };
  fa::write_text_file(at("eigenvalues.tsv"),
                      render([&](std::ostream& o) { fa::write_eigenvalues_tsv(o, model.spectrum); }));
  fa::write_text_file(at("loadings.tsv"),
                      render([&](std::ostream& o) { fa::write_loadings_tsv(o, model.loadings, labels); }));
  fa::write_text_file(at("loadings.txt"), render([&](std::ostream& o) {
                        fa::write_loadings_table(o, model.loadings, labels, suppress_below);
                      }));
  fa::save_scores(at("scores.tsv"), scores);
  fa::save_json(at("model.json"), fa::model_json(model, "scores.tsv"));
}

void print_model_summary(const fa::FactorModel& model, const fs::path& dir) {
  std::cout << "factors: " << model.k() << (model.rotated() ? " (varimax)" : " (unrotated)") << '\n';
  if (model.spectrum.complete) {
    std::cout << "eigenvalues > 1: " << fa::kaiser_count(model.spectrum) << '\n';
  }
  if (model.rotation) {
    std::cout << "varimax sweeps: " << model.rotation->sweeps
              << (model.rotation->converged ? "" : " (not converged)") << '\n';
  }
  for (const auto& w : model.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << "written to " << dir.string() << '\n';
}

fa::EigenRoute route_of(const std::string& name) {
  if (name == "dense") return fa::EigenRoute::kDense;
  if (name == "implicit") return fa::EigenRoute::kImplicit;
  return fa::EigenRoute::kAuto;
}

int threads_from_env() {
  if (const char* v = std::getenv("FACTOR_ATLAS_THREADS")) {
    if (const auto n = fa::text::parse_int(v); n && *n >= 1) return static_cast<int>(*n);
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"factor-atlas: factor-analytic classification of citation matrices"};
  app.require_subcommand(1);
  int threads = threads_from_env();
  app.add_option("--threads", threads, "Worker threads (also FACTOR_ATLAS_THREADS)")
      ->check(CLI::PositiveNumber);

  std::function<void()> action;

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Read an edge list into a matrix file");
  std::string in_edges, in_labels, in_out, in_stats;
  bool in_drop = false;
  ingest->add_option("edges", in_edges, "cited <TAB> citing <TAB> count")->required();
  ingest->add_option("--labels", in_labels, "id <TAB> label file");
  ingest->add_flag("--drop-diagonal", in_drop, "Discard within-journal citations");
  ingest->add_option("--out", in_out, "Matrix file")->required();
  ingest->add_option("--stats", in_stats, "Also write stats JSON");
  ingest->callback([&] {
    action = [&] {
      const auto m = load_input(in_edges, in_labels, in_drop);
      fa::save_matrix(in_out, m);
      const auto stats = fa::stats_json(fa::compute_stats(m));
      if (!in_stats.empty()) emit(in_stats, stats.dump(2) + "\n");
      std::cout << m.n_cases() << " cited x " << m.n_vars() << " citing journals\n";
    };
  });

  // stats
  auto* stats = app.add_subcommand("stats", "Matrix size, density and citations per link");
  std::string st_in, st_out;
  stats->add_option("matrix", st_in, "Matrix or edge list")->required();
  stats->add_option("--out", st_out, "JSON output (default stdout)");
  stats->callback([&] {
    action = [&] { emit(st_out, fa::stats_json(fa::compute_stats(load_input(st_in))).dump(2) + "\n"); };
  });

  // filter
  auto* filter = app.add_subcommand("filter", "Drop citing journals with low column variance");
  std::string fi_in, fi_out, fi_dropped;
  double fi_threshold = 8.0;
  filter->add_option("matrix", fi_in)->required();
  filter->add_option("--threshold", fi_threshold, "Minimum variance kept")->capture_default_str();
  filter->add_option("--out", fi_out)->required();
  filter->add_option("--dropped", fi_dropped, "TSV of dropped journals");
  filter->callback([&] {
    action = [&] {
      const auto m = load_input(fi_in);
      const auto r = fa::filter_by_variance(m, fi_threshold);
      fa::save_matrix(fi_out, r.matrix);
      if (!fi_dropped.empty()) {
        emit(fi_dropped, render([&](std::ostream& o) {
               fa::write_dropped_tsv(o, r.dropped, m.labels(), "variance below threshold");
             }));
      }
      std::cout << "kept " << r.matrix.n_vars() << ", dropped " << r.dropped.size() << " variables\n";
    };
  });

  // factor
  auto* factor = app.add_subcommand("factor", "Extract, rotate and score a k-factor model");
  std::string fc_in, fc_dir = ".", fc_route = "auto";
  std::size_t fc_k = 12;
  bool fc_no_rotate = false;
  double fc_suppress = 0.10;
  factor->add_option("matrix", fc_in)->required();
  factor->add_option("--k", fc_k, "Number of factors")->capture_default_str();
  factor->add_flag("--no-rotate", fc_no_rotate, "Keep the unrotated solution");
  factor->add_option("--route", fc_route, "Eigensolver: auto, dense or implicit")
      ->check(CLI::IsMember({"auto", "dense", "implicit"}));
  factor->add_option("--suppress-below", fc_suppress, "Blank small loadings in loadings.txt")
      ->capture_default_str();
  factor->add_option("--out-dir", fc_dir, "Output directory")->capture_default_str();
  factor->callback([&] {
    action = [&] {
      const auto m = load_input(fc_in);
      fa::FitOptions opts;
      opts.k = fc_k;
      opts.rotate = !fc_no_rotate;
      opts.route = route_of(fc_route);
      const auto fitted = fa::fit_factor_model(m, opts);
      write_model_outputs(fc_dir, fitted.model, fitted.scores, m.labels(), fc_suppress);
      print_model_summary(fitted.model, fc_dir);
    };
  });

  // designate
  auto* designate = app.add_subcommand("designate", "Top journals and positive counts per factor");
  std::string de_model, de_scores, de_factor_labels, de_matrix, de_out;
  designate->add_option("model", de_model, "model.json")->required();
  designate->add_option("--scores", de_scores, "Scores TSV (default: the model's reference)");
  designate->add_option("--factor-labels", de_factor_labels, "factor <TAB> label sidecar");
  designate->add_option("--matrix", de_matrix, "Matrix supplying journal labels");
  designate->add_option("--out", de_out, "TSV output (default stdout)");
  designate->callback([&] {
    action = [&] {
      const auto j = fa::load_json(de_model);
      const auto model = fa::model_from_json(j);
      std::string scores_path = de_scores;
      if (scores_path.empty()) {
        scores_path = (fs::path(de_model).parent_path() / fa::scores_ref_of(j)).string();
      }
      const auto scores = fa::load_scores(scores_path);
      fa::FactorLabels names;
      if (!de_factor_labels.empty()) {
        std::istringstream in(fa::read_text_file(de_factor_labels));
        names = fa::read_factor_labels(in);
      }
      const fa::LabelMap labels = de_matrix.empty() ? fa::LabelMap{} : load_input(de_matrix).labels();
      const auto d = fa::designate(model, scores, names);
      emit(de_out, render([&](std::ostream& o) {
             fa::write_designations_tsv(o, d, labels, model.variable_ids.size(), scores.case_ids.size());
           }));
    };
  });

  // select
  auto* select = app.add_subcommand("select", "Journals with a positive score on one factor");
  std::string se_scores, se_out, se_label, se_model;
  std::size_t se_factor = 1;
  select->add_option("scores", se_scores)->required();
  select->add_option("--factor", se_factor, "1-based factor")->required();
  select->add_option("--label", se_label, "Set label");
  select->add_option("--model", se_model, "Model reference recorded in the set header");
  select->add_option("--out", se_out)->required();
  select->callback([&] {
    action = [&] {
      const auto scores = fa::load_scores(se_scores);
      const std::string label = se_label.empty() ? "factor " + std::to_string(se_factor) : se_label;
      const auto set = fa::select_positive(scores, se_factor, label, se_model);
      fa::save_set(se_out, set);
      std::cout << set.members.size() << " journals with a positive score on factor " << se_factor << '\n';
    };
  });

  // drill
  auto* drill = app.add_subcommand("drill", "Refit a model on the raw counts of a selected set");
  std::string dr_in, dr_set, dr_dir = "drill";
  std::size_t dr_k = 12;
  double dr_suppress = 0.10;
  drill->add_option("matrix", dr_in)->required();
  drill->add_option("--set", dr_set, "Set file")->required();
  drill->add_option("--k", dr_k)->capture_default_str();
  drill->add_option("--suppress-below", dr_suppress)->capture_default_str();
  drill->add_option("--out-dir", dr_dir)->capture_default_str();
  drill->callback([&] {
    action = [&] {
      fa::DecompositionNode parent;
      parent.matrix = load_input(dr_in);
      const auto set = fa::load_set(dr_set);
      const auto child = fa::drill_down(parent, set, dr_k);
      write_model_outputs(dr_dir, *child.model, *child.scores, parent.matrix.labels(), dr_suppress);
      fa::save_matrix((fs::path(dr_dir) / "matrix.fam").string(), child.matrix);
      fa::write_text_file((fs::path(dr_dir) / "designations.tsv").string(), render([&](std::ostream& o) {
                            fa::write_designations_tsv(o, child.designations, parent.matrix.labels(),
                                                       child.matrix.n_vars(), child.matrix.n_cases());
                          }));
      std::cout << child.matrix.n_cases() << " cases, " << child.matrix.n_vars() << " variables ("
                << child.dropped_not_citing.size() << " not citing, "
                << child.dropped_zero_variance.size() << " constant)\n";
      print_model_summary(*child.model, dr_dir);
    };
  });

  // env
  auto* env = app.add_subcommand("env", "Local citation environment of a seed journal");
  std::string en_in, en_out, en_set;
  fa::JournalId en_seed = 0;
  double en_pct = 0.5;
  bool en_both = false;
  env->add_option("matrix", en_in)->required();
  env->add_option("--seed", en_seed, "Seed journal id")->required();
  env->add_option("--pct", en_pct, "Threshold in percent of the seed's totals")->capture_default_str();
  env->add_flag("--both", en_both, "Require both the cited and the citing criterion");
  env->add_option("--out", en_out, "Matrix file of the environment");
  env->add_option("--set", en_set, "Set file of the members");
  env->callback([&] {
    action = [&] {
      const auto m = load_input(en_in);
      const auto e = fa::local_environment(m, en_seed, en_pct / 100.0,
                                           en_both ? fa::EnvironmentRule::kBoth : fa::EnvironmentRule::kEither);
      if (!en_out.empty()) fa::save_matrix(en_out, e.matrix);
      if (!en_set.empty()) {
        fa::ClassificationSet s;
        s.label = "environment of " + m.label(en_seed);
        s.members = e.members;
        fa::save_set(en_set, s);
      }
      std::cout << e.members.size() << " journals; seed cited " << fa::text::format_exact(e.total_cited)
                << " times, citing " << fa::text::format_exact(e.total_citing) << " times\n";
    };
  });

  // map
  auto* map = app.add_subcommand("map", "Cosine-similarity journal graph in Pajek format");
  std::string ma_in, ma_set, ma_out, ma_orientation = "cited-rows";
  double ma_edge = 0.5, ma_isolate = 0.2;
  map->add_option("matrix", ma_in)->required();
  map->add_option("--set", ma_set, "Restrict to the journals of a set");
  map->add_option("--edge-cos", ma_edge)->capture_default_str();
  map->add_option("--isolate-cos", ma_isolate)->capture_default_str();
  map->add_option("--orientation", ma_orientation)->check(CLI::IsMember({"cited-rows", "citing-columns"}));
  map->add_option("--out", ma_out, ".net file")->required();
  map->callback([&] {
    action = [&] {
      auto m = load_input(ma_in);
      if (!ma_set.empty()) m = fa::restrict_to(m, fa::load_set(ma_set).members);
      const auto sim = fa::cosine_similarity(
          m, ma_orientation == "cited-rows" ? fa::Orientation::kCitedRows : fa::Orientation::kCitingColumns);
      if (!sim.excluded_zero.empty()) {
        std::cerr << "warning: " << sim.excluded_zero.size() << " journals with an all-zero profile excluded\n";
      }
      const auto g = fa::build_graph(sim, ma_isolate, ma_edge);
      fa::export_pajek(g, ma_out);
      std::cout << g.nodes.size() << " nodes, " << g.edges.size() << " edges, " << g.removed.size()
                << " isolates removed\n";
    };
  });

  // scatter
  auto* scatter = app.add_subcommand("scatter", "Factor-score scatter series");
  std::string sc_scores, sc_out, sc_axis = "both", sc_matrix;
  std::size_t sc_fx = 1, sc_fy = 2;
  double sc_min = 10.0;
  bool sc_log = false;
  scatter->add_option("scores", sc_scores)->required();
  scatter->add_option("--fx", sc_fx)->capture_default_str();
  scatter->add_option("--fy", sc_fy)->capture_default_str();
  scatter->add_option("--min-abs", sc_min)->capture_default_str();
  scatter->add_option("--axis", sc_axis, "Filter on both axes or either")->check(CLI::IsMember({"both", "either"}));
  scatter->add_flag("--log", sc_log, "Signed log10 axes");
  scatter->add_option("--matrix", sc_matrix, "Matrix supplying journal labels");
  scatter->add_option("--out", sc_out, "TSV; a .json sidecar is written next to it")->required();
  scatter->callback([&] {
    action = [&] {
      const auto scores = fa::load_scores(sc_scores);
      const fa::LabelMap labels = sc_matrix.empty() ? fa::LabelMap{} : load_input(sc_matrix).labels();
      fa::ScatterOptions opts{sc_min, sc_axis == "both" ? fa::AxisRule::kBoth : fa::AxisRule::kEither,
                              sc_log ? fa::ScatterScale::kLog : fa::ScatterScale::kLinear};
      const auto s = fa::scatter_scores(scores, sc_fx, sc_fy, opts, &labels);
      fa::write_text_file(sc_out, render([&](std::ostream& o) { fa::write_scatter_tsv(o, s); }));
      fa::save_json(fs::path(sc_out).replace_extension(".json").string(), fa::scatter_json(s));
      std::cout << s.points.size() << " points";
      if (s.excluded_log) std::cout << ", " << s.excluded_log << " excluded by the log scale";
      std::cout << '\n';
    };
  });

  // compare
  auto* compare = app.add_subcommand("compare", "Venn regions and Jaccard indices of 2 to 5 sets");
  std::vector<std::string> co_sets;
  std::string co_out, co_matrix;
  compare->add_option("sets", co_sets, "Set files")->required()->expected(2, 5);
  compare->add_option("--out", co_out, "JSON report");
  compare->add_option("--matrix", co_matrix, "Matrix supplying journal labels");
  compare->callback([&] {
    action = [&] {
      std::vector<fa::ClassificationSet> sets;
      for (const auto& p : co_sets) sets.push_back(fa::load_set(p));
      const auto r = fa::compare_sets(sets);
      if (!co_out.empty()) fa::save_json(co_out, fa::comparison_json(r));
      const fa::LabelMap labels = co_matrix.empty() ? fa::LabelMap{} : load_input(co_matrix).labels();
      fa::write_comparison_summary(std::cout, r, labels);
    };
  });

  // synth
  auto* synth = app.add_subcommand("synth", "Planted block-model citation matrix");
  fa::BlockSpec spec;
  std::size_t sy_sub = 0;
  double sy_lsub = 20.0;
  std::string sy_out, sy_truth, sy_edges;
  synth->add_option("--blocks", spec.n_blocks)->capture_default_str();
  synth->add_option("--size", spec.journals_per_block, "Journals per block")->capture_default_str();
  synth->add_option("--lin", spec.lambda_in)->capture_default_str();
  synth->add_option("--lout", spec.lambda_out)->capture_default_str();
  synth->add_option("--sub-blocks", sy_sub, "Nest this many sub-blocks in each block");
  synth->add_option("--lsub", sy_lsub, "Within-sub-block intensity")->capture_default_str();
  synth->add_option("--seed", spec.seed)->capture_default_str();
  synth->add_option("--out", sy_out, "Matrix file")->required();
  synth->add_option("--truth", sy_truth, "Planted assignment TSV");
  synth->add_option("--edges", sy_edges, "Also write an edge list");
  synth->callback([&] {
    action = [&] {
      if (sy_sub > 0) spec.nested = fa::NestedSpec{sy_sub, sy_lsub};
      const auto corpus = fa::generate_block_model(spec);
      fa::save_matrix(sy_out, corpus.matrix);
      if (!sy_truth.empty()) {
        fa::write_text_file(sy_truth, render([&](std::ostream& o) { fa::write_truth(o, corpus.truth); }));
      }
      if (!sy_edges.empty()) {
        fa::write_text_file(sy_edges, render([&](std::ostream& o) { fa::write_edge_list(o, corpus.matrix); }));
      }
      std::cout << corpus.matrix.n_cases() << " journals, " << corpus.matrix.cells().nonZeros() << " links\n";
    };
  });

  // recover
  auto* recover = app.add_subcommand("recover", "Score recovery of a planted assignment");
  std::string re_in, re_truth, re_basis = "score";
  std::size_t re_k = 6;
  bool re_sub = false;
  recover->add_option("matrix", re_in)->required();
  recover->add_option("truth", re_truth)->required();
  recover->add_option("--k", re_k)->capture_default_str();
  recover->add_option("--basis", re_basis, "Assignment by score or loading")->check(CLI::IsMember({"score", "loading"}));
  recover->add_flag("--sub-blocks", re_sub, "Score against the sub-block column");
  recover->callback([&] {
    action = [&] {
      const auto m = load_input(re_in);
      std::istringstream in(fa::read_text_file(re_truth));
      const auto truth = fa::read_truth(in);
      fa::RecoveryOptions opts;
      opts.basis = re_basis == "score" ? fa::AssignmentBasis::kScore : fa::AssignmentBasis::kLoading;
      const auto r = fa::evaluate_recovery(m, re_sub ? truth.sub_block : truth.block, re_k, opts);
      std::cout << "accuracy\t" << fa::text::fixed(r.accuracy, 4) << (r.greedy_matching ? "\t(greedy)" : "")
                << "\nblock";
      for (Eigen::Index f = 0; f + 1 < r.confusion.cols(); ++f) std::cout << "\tF" << f + 1;
      std::cout << "\tunassigned\n";
      for (Eigen::Index b = 0; b < r.confusion.rows(); ++b) {
        std::cout << r.blocks[static_cast<std::size_t>(b)];
        for (Eigen::Index f = 0; f < r.confusion.cols(); ++f) std::cout << '\t' << r.confusion(b, f);
        std::cout << '\n';
      }
    };
  });

  // run
  auto* run = app.add_subcommand("run", "Whole pipeline with a manifest of hashed artifacts");
  std::string ru_config, ru_input, ru_out;
  std::vector<std::string> ru_set;
  int ru_k = -1;
  bool ru_drill = false, ru_compare = false;
  run->add_option("--config", ru_config, "key = value config file");
  run->add_option("--input", ru_input, "Edge list or matrix");
  run->add_option("--out-dir", ru_out);
  run->add_option("--k", ru_k);
  run->add_flag("--drill", ru_drill, "Add the drill stage");
  run->add_flag("--compare", ru_compare, "Add the compare stage");
  run->add_option("--set", ru_set, "Override any config key: key=value");
  run->callback([&] {
    action = [&] {
      fa::RunConfig c = ru_config.empty() ? fa::RunConfig{} : fa::load_run_config(ru_config);
      for (const auto& kv : ru_set) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw fa::Error(fa::ErrorKind::kDomain, "--set expects key=value");
        fa::set_option(c, std::string(fa::text::trim(kv.substr(0, eq))),
                       std::string(fa::text::trim(kv.substr(eq + 1))));
      }
      if (!ru_input.empty()) c.input = ru_input;
      if (!ru_out.empty()) c.output_dir = ru_out;
      if (ru_k >= 0) c.k = static_cast<std::size_t>(ru_k);
      if (ru_drill) c.drill = true;
      if (ru_compare) c.compare = true;
      if (app.get_option("--threads")->count() > 0 || std::getenv("FACTOR_ATLAS_THREADS")) c.threads = threads;
      const auto manifest = fa::run_pipeline(c);
      for (const auto& stage : manifest["stages"]) {
        std::cout << stage["name"].get<std::string>() << "\tok\t" << stage["artifacts"].size() << " artifacts\n";
      }
      for (const auto& w : manifest["warnings"]) std::cerr << "warning: " << w.get<std::string>() << '\n';
      std::cout << "manifest: " << (fs::path(c.output_dir) / "manifest.json").string() << '\n';
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  Eigen::setNbThreads(threads);
  try {
    action();
    return 0;
  } catch (const fa::StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return fa::exit_code_for(e.kind());
  } catch (const fa::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return fa::exit_code_for(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
