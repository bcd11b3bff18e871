// Copyright 2026 The MemAudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// The memaudit command line. dispatch() parses argv-style arguments, writes
// line-JSON records to `out` and (with --pretty) a text table to `err`.
//
// Exit codes: 0 success; 1 the analysis verdict is positive (ks-test
// rejects, leak-detect finds leakage); 2 usage or input error; 3 runtime
// failure such as training divergence.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "memaudit/attacks.hpp"
#include "memaudit/audit.hpp"
#include "memaudit/capacity.hpp"
#include "memaudit/dedup.hpp"
#include "memaudit/experiment_spec.hpp"
#include "memaudit/experiments.hpp"
#include "memaudit/report.hpp"
#include "memaudit/scores.hpp"
#include "memaudit/stats.hpp"

namespace memaudit {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerdict = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitFailure = 3;

namespace cli {

struct Common {
  double alpha = -1.0;  // < 0: subcommand default
  std::string kind;
  std::optional<std::uint64_t> seed;
  std::string spec;
  std::string out;
  bool pretty = false;
};

inline ScoreSet load_scores(const std::string& path, const Common& c) {
  ScoreSet s = read_scores(path);
  if (!c.kind.empty() && parse_score_kind(c.kind) != s.kind) {
    throw InputError("'" + path + "' holds " + std::string(to_string(s.kind)) + " scores, --kind is " + c.kind);
  }
  return s;
}

inline void emit(const std::vector<Json>& records, const Common& c, std::ostream& out, std::ostream& err) {
  write_records(records, out);
  if (c.pretty) err << format_table(records);
}

inline std::filesystem::path out_dir(const Common& c) {
  std::filesystem::path dir(c.out);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_report_file(const std::vector<Json>& records, const Common& c, const std::string& name) {
  if (c.out.empty()) return;
  std::ofstream f(out_dir(c) / name);
  if (!f) throw Error("cannot write report into '" + c.out + "'");
  write_records(records, f);
}

inline std::string score_file_name(std::string_view stem, AugmentationMode mode, std::uint64_t seed,
                                   std::string_view part) {
  return std::string(stem) + "_" + std::string(to_string(mode)) + "_seed" + std::to_string(seed) + "_" +
         std::string(part) + ".jsonl";
}

inline ExperimentSpec load_spec(const Common& c, std::optional<ExperimentKind> expected) {
  if (c.spec.empty()) throw InputError("--spec is required");
  ExperimentSpec spec = parse_experiment_spec(c.spec, true);
  if (expected && spec.kind != *expected) {
    throw InputError("spec kind is " + std::string(to_string(spec.kind)) + ", expected " +
                     std::string(to_string(*expected)));
  }
  if (c.seed) spec.seeds = {*c.seed};
  if (c.alpha > 0) spec.alpha = c.alpha;
  if (!c.out.empty()) spec.out_dir = c.out;
  return spec;
}

// Runs any experiment kind and returns its records; score sets go to
// spec.out_dir when set.
inline std::vector<Json> run_experiment(const ExperimentSpec& spec) {
  Common c;
  c.out = spec.out_dir;
  std::vector<Json> records;
  auto save = [&](const ScoreSet& s, const std::string& name) {
    if (!c.out.empty()) write_scores(s, (out_dir(c) / name).string());
  };
  switch (spec.kind) {
    case ExperimentKind::kMemorize: {
      const MemorizationCurve curve = run_memorization(spec);
      records.push_back(curve_summary(curve));
      for (const auto& p : curve.points) records.push_back(p);
      break;
    }
    case ExperimentKind::kLeak: {
      const LeakageTable t = run_leakage(spec);
      for (const auto& r : t.rows) {
        records.push_back(r);
        const auto mode = spec.augmentations.front();
        const std::string stem = "leak_s" + std::to_string(r.leaked_per_class);
        save(r.val_scores, score_file_name(stem, mode, r.seed, "val"));
        save(r.test_scores, score_file_name(stem, mode, r.seed, "test"));
      }
      for (const auto& [s, p] : t.median_p_value) {
        records.push_back({{"type", "leakage_median"}, {"s", s}, {"median_p_value", p}});
      }
      break;
    }
    case ExperimentKind::kAttackFinal: {
      for (const auto& r : run_attack_final(spec)) {
        records.push_back(r);
        save(r.members, score_file_name("final", r.mode, r.seed, "members"));
        save(r.nonmembers, score_file_name("final", r.mode, r.seed, "nonmembers"));
      }
      break;
    }
    case ExperimentKind::kAttackPartial: {
      for (const auto& r : run_attack_partial(spec)) {
        records.push_back(r);
        save(r.members, score_file_name("partial_" + r.cut, r.mode, r.seed, "members"));
        save(r.nonmembers, score_file_name("partial_" + r.cut, r.mode, r.seed, "nonmembers"));
      }
      break;
    }
    case ExperimentKind::kShadow: {
      for (const auto& r : run_shadow(spec)) records.push_back(summarize(r));
      break;
    }
  }
  return records;
}

inline std::string usage_of(const CLI::App& app) {
  std::ostringstream s;
  s << app.help();
  return s.str();
}

}  // namespace cli

inline int dispatch(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  using cli::Common;
  CLI::App app{"memaudit: membership inference and dataset privacy audits", "memaudit"};
  app.require_subcommand(1);
  Common c;
  // Shared flags, accepted by every subcommand.
  auto common = [&c](CLI::App* sub) {
    sub->add_option("--alpha", c.alpha, "significance level")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--kind", c.kind, "expected score kind")->check(CLI::IsMember({"confidence", "loss"}));
    sub->add_option("--seed", c.seed, "random seed");
    sub->add_option("--spec", c.spec, "experiment spec file");
    sub->add_option("--out", c.out, "output directory or file");
    sub->add_flag("--pretty", c.pretty, "human-readable table on stderr");
  };

  std::string a_path, b_path, val_path, test_path, batch_path, ref1_path, ref2_path, members_path,
      nonmembers_path, scores_path, descriptors_path, write_descriptors_path;
  std::uint64_t params = 0, pool = 0, n_bits = 0;
  double fit_fraction = 0.0, threshold = -1.0;
  std::size_t k = kDefaultKnn, planted_size = 10'000, planted_groups = 1'000;
  bool histogram = false, planted = false;

  auto* ks = app.add_subcommand("ks-test", "two-sample Kolmogorov-Smirnov test (exit 1 if rejected)");
  ks->add_option("--a", a_path, "first score file")->required();
  ks->add_option("--b", b_path, "second score file")->required();
  common(ks);

  auto* leak = app.add_subcommand("leak-detect", "validation-set leakage test (exit 1 if detected)");
  leak->add_option("--val", val_path, "validation score file")->required();
  leak->add_option("--test", test_path, "test score file")->required();
  common(leak);

  auto* src = app.add_subcommand("source-infer", "assign a batch to the nearer of two references");
  src->add_option("--batch", batch_path, "batch score file")->required();
  src->add_option("--ref1", ref1_path, "reference 1 score file")->required();
  src->add_option("--ref2", ref2_path, "reference 2 score file")->required();
  common(src);

  auto* bayes = app.add_subcommand("attack-bayes", "Bayes (correctness) membership attack");
  bayes->add_option("--members", members_path, "member score file")->required();
  bayes->add_option("--nonmembers", nonmembers_path, "non-member score file")->required();
  common(bayes);

  auto* mat = app.add_subcommand("attack-mat", "maximum-accuracy threshold attack");
  mat->add_option("--members", members_path, "member score file")->required();
  mat->add_option("--nonmembers", nonmembers_path, "non-member score file")->required();
  mat->add_option("--fit-fraction", fit_fraction, "fit tau on this fraction, score the rest")
      ->check(CLI::Range(0.0, 1.0));
  common(mat);

  auto* cap = app.add_subcommand("capacity", "log2 C(N, n) capacity and the crossover n*");
  cap->add_option("--params", params, "parameter count")->required();
  cap->add_option("--pool", pool, "pool size N")->required();
  cap->add_option("--n", n_bits, "also report log2 C(N, n) for this n");
  common(cap);

  auto* mem = app.add_subcommand("memorize", "explicit memorization curve experiment");
  common(mem);
  auto* partial = app.add_subcommand("attack-partial", "partial-layers attack experiment");
  common(partial);
  auto* shadow = app.add_subcommand("shadow", "shadow-model attack experiment");
  common(shadow);
  auto* experiment = app.add_subcommand("experiment", "run an experiment spec of any kind");
  common(experiment);

  auto* dedup = app.add_subcommand("dedup", "near-duplicate groups from a descriptor file");
  auto* desc_opt = dedup->add_option("--descriptors", descriptors_path, "descriptor file");
  auto* planted_opt = dedup->add_flag("--planted", planted, "use a synthetic planted-duplicate corpus");
  desc_opt->excludes(planted_opt);
  dedup->add_option("--planted-size", planted_size, "planted corpus size");
  dedup->add_option("--planted-groups", planted_groups, "planted duplicate groups");
  dedup->add_option("--k", k, "neighbours per record")->check(CLI::PositiveNumber);
  dedup->add_option("--threshold", threshold, "edge threshold (default: histogram valley)");
  dedup->add_flag("--histogram", histogram, "emit the 1-NN distance histogram");
  dedup->add_option("--write-descriptors", write_descriptors_path, "save the descriptors used");
  common(dedup);

  auto* vs = app.add_subcommand("validate-scores", "check a score file against the format");
  vs->add_option("--scores", scores_path, "score file")->required();
  common(vs);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    std::vector<Json> records;
    int code = kExitOk;
    if (ks->parsed()) {
      const double alpha = c.alpha > 0 ? c.alpha : 0.05;
      const ScoreSet a = cli::load_scores(a_path, c), b = cli::load_scores(b_path, c);
      require_same_kind(a, b);
      const KsTestResult r = ks_two_sample_test(a.ecdf(), b.ecdf(), alpha);
      Json j = r;
      j["alpha"] = alpha;
      records.push_back(j);
      code = r.reject_null ? kExitVerdict : kExitOk;
    } else if (leak->parsed()) {
      const double alpha = c.alpha > 0 ? c.alpha : kDefaultLeakageAlpha;
      const LeakageReport r = detect_leakage(cli::load_scores(val_path, c), cli::load_scores(test_path, c), alpha);
      records.push_back(r);
      code = r.verdict == LeakageVerdict::kLeakageDetected ? kExitVerdict : kExitOk;
    } else if (src->parsed()) {
      records.push_back(infer_source(cli::load_scores(batch_path, c), cli::load_scores(ref1_path, c),
                                     cli::load_scores(ref2_path, c)));
    } else if (bayes->parsed()) {
      records = attack_records(run_bayes_attack(cli::load_scores(members_path, c), cli::load_scores(nonmembers_path, c)));
    } else if (mat->parsed()) {
      const ScoreSet m = cli::load_scores(members_path, c), nm = cli::load_scores(nonmembers_path, c);
      if (fit_fraction > 0.0) {
        const MatSplitFit fit = fit_mat_split(m, nm, fit_fraction, c.seed.value_or(0));
        records.push_back(fit.model);
        const auto& model = fit.model;
        auto rec = attack_records(evaluate_attack(AttackMethod::kMat, fit.rest_train, fit.rest_heldout,
                                                  [&](const ScoreSample& s) { return mat_predict(model, s.score); }));
        records.insert(records.end(), rec.begin(), rec.end());
      } else {
        MatModel model;
        const AttackReport r = run_mat_attack(m, nm, &model);
        records.push_back(model);
        auto rec = attack_records(r);
        records.insert(records.end(), rec.begin(), rec.end());
      }
    } else if (cap->parsed()) {
      records.push_back(CapacitySummary{params, pool, capacity_crossover(params, pool)});
      if (n_bits > 0) records.push_back(capacity_report(n_bits, pool));
    } else if (mem->parsed()) {
      records = cli::run_experiment(cli::load_spec(c, ExperimentKind::kMemorize));
    } else if (partial->parsed()) {
      records = cli::run_experiment(cli::load_spec(c, ExperimentKind::kAttackPartial));
    } else if (shadow->parsed()) {
      records = cli::run_experiment(cli::load_spec(c, ExperimentKind::kShadow));
    } else if (experiment->parsed()) {
      records = cli::run_experiment(cli::load_spec(c, std::nullopt));
    } else if (dedup->parsed()) {
      std::vector<DescriptorRecord> descriptors;
      if (planted) {
        descriptors = describe_all(make_planted_corpus(c.seed.value_or(1), planted_size, planted_groups).images);
      } else if (!descriptors_path.empty()) {
        descriptors = read_descriptors(descriptors_path);
      } else {
        throw InputError("dedup needs --descriptors or --planted");
      }
      if (!write_descriptors_path.empty()) write_descriptors(descriptors, write_descriptors_path);
      const auto edges = knn_graph(descriptors, k);
      std::vector<double> nn(descriptors.size(), std::numeric_limits<double>::infinity());
      for (const auto& e : edges) nn[e.source] = std::min(nn[e.source], e.distance);
      const DistanceHistogram h = histogram_of(nn);
      const double th = threshold >= 0.0 ? threshold : histogram_valley_threshold(h);
      const DupGroups groups = components(descriptors, edges, th);
      records.push_back({{"type", "dedup"}, {"images", groups.image_count()}, {"groups", groups.group_count()},
                         {"threshold", th}, {"k", std::min(k, descriptors.size() - 1)}});
      if (histogram) {
        for (std::size_t b = 0; b < h.counts.size(); ++b) {
          records.push_back({{"type", "histogram_bin"}, {"lower", h.lower(b)},
                             {"upper", b < h.edges.size() ? Json(h.upper(b)) : Json(nullptr)}, {"count", h.counts[b]}});
        }
      }
      if (!c.out.empty()) {
        std::ofstream f(c.out);
        if (!f) throw Error("cannot write '" + c.out + "'");
        write_groups_csv(groups, f);
      }
    } else if (vs->parsed()) {
      const ScoreSet s = cli::load_scores(scores_path, c);
      records.push_back({{"type", "score_validation"}, {"valid", true}, {"kind", std::string(to_string(s.kind))},
                         {"count", s.size()}, {"source_tag", s.source_tag}, {"format_version", kScoreFormatVersion}});
    }
    if (mem->parsed() || partial->parsed() || shadow->parsed() || experiment->parsed()) {
      cli::write_report_file(records, c, "report.jsonl");
    }
    cli::emit(records, c, out, err);
    return code;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace memaudit
