// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bp/aggregation.hpp"
#include "bp/error.hpp"
#include "bp/evaluation.hpp"
#include "bp/experiment.hpp"
#include "bp/model_dir.hpp"
#include "bp/profile.hpp"
#include "bp/reproduce.hpp"
#include "bp/sweep.hpp"
#include "bp/synth.hpp"
#include "bp/trainer.hpp"
#include "bp/util.hpp"

namespace bp::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

int verbosity() {
  const char* v = std::getenv("BP_VERBOSE");
  return v ? std::atoi(v) : 0;
}

// Option values shared by several subcommands.
struct Common {
  std::string manifest;
  std::string embeddings;
  std::string out;
  std::string params;
  std::uint64_t seed = 0;
  int jobs = 1;
  int k = 5;
};

struct LabelOpts {
  std::string variant = "baseline";
  std::optional<double> threshold;
  bool exclude = false;
};

struct TrainOpts {
  int epochs = 15;
  int batch_size = 64;
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::string hidden = "32";
  bool no_weighting = false;
};

std::vector<int> parse_hidden(const std::string& text) {
  std::vector<int> dims;
  if (text.empty() || text == "none") return dims;
  for (auto cell : split_csv_line(text)) {
    try {
      std::size_t used = 0;
      const std::string s(cell);
      const int d = std::stoi(s, &used);
      if (used != s.size() || d <= 0) throw std::invalid_argument(s);
      dims.push_back(d);
    } catch (const std::exception&) {
      throw usage_error("--hidden expects positive integers separated by commas, got '" + text + "'");
    }
  }
  return dims;
}

TrainConfig to_config(const TrainOpts& t, std::uint64_t seed) {
  TrainConfig c;
  c.epochs = t.epochs;
  c.batch_size = t.batch_size;
  c.learning_rate = t.lr;
  c.adam_beta1 = t.beta1;
  c.adam_beta2 = t.beta2;
  c.adam_epsilon = t.adam_eps;
  c.hidden_dims = parse_hidden(t.hidden);
  c.weighted_sampling = !t.no_weighting;
  c.seed = seed;
  c.validate();
  return c;
}

LabelingSpec to_spec(const LabelOpts& l) {
  const auto v = parse_variant(l.variant);
  if (!v) throw usage_error("unknown variant '" + l.variant + "' (expected baseline, snp, cimp or cnv)");
  LabelingSpec spec;
  spec.variant = *v;
  spec.exclude_mss_cimp_h_from_train = l.exclude && *v == Variant::kCimp;
  if (l.threshold) {
    spec.threshold = l.threshold;
  } else if (*v == Variant::kSnp) {
    spec.threshold = kDefaultSnpThreshold;
  } else if (*v == Variant::kCnv) {
    spec.threshold = kDefaultCnvThreshold;
  }
  spec.validate();
  return spec;
}

void add_label_options(CLI::App* sub, LabelOpts& l) {
  sub->add_option("--variant", l.variant, "baseline, snp, cimp or cnv");
  sub->add_option("--threshold", l.threshold, "sub-class threshold (snp default 1200, cnv 0.005)");
  sub->add_flag("--exclude-mss-cimp-h", l.exclude,
                "drop TRAIN MSS CIMP-H patients from head training");
}

void add_train_options(CLI::App* sub, TrainOpts& t) {
  sub->add_option("--epochs", t.epochs);
  sub->add_option("--batch-size", t.batch_size);
  sub->add_option("--lr", t.lr, "Adam learning rate");
  sub->add_option("--beta1", t.beta1);
  sub->add_option("--beta2", t.beta2);
  sub->add_option("--adam-eps", t.adam_eps);
  sub->add_option("--hidden", t.hidden, "hidden widths, e.g. 32 or 64,32; 'none' for a linear head");
  sub->add_flag("--no-weighting", t.no_weighting, "plain shuffling instead of the class-balanced sampler");
}

// Input and output bookkeeping for run.json.
class Run {
 public:
  Run(std::string command, const CLI::App* sub) : command_(std::move(command)), sub_(sub) {}

  void input(const fs::path& p) {
    if (fs::is_directory(p)) {
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(p)) {
        if (e.is_regular_file() && e.path().filename() != "run.json") files.push_back(e.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) inputs_[f.string()] = sha256_file(f);
    } else {
      inputs_[p.string()] = sha256_file(p);
    }
  }
  void seed(const std::string& name, std::uint64_t value) { seeds_[name] = value; }
  void note(const std::string& key, json value) { extra_[key] = std::move(value); }

  json effective_config() const {
    json cfg = json::object();
    for (const CLI::Option* opt : sub_->get_options()) {
      const std::string name = opt->get_single_name();
      if (name.empty() || name == "help" || name == "params") continue;
      if (opt->get_expected_min() == 0) {
        cfg[name] = opt->count() > 0 && opt->as<bool>();
      } else if (opt->count() > 0) {
        cfg[name] = opt->results().back();
      } else if (!opt->get_default_str().empty()) {
        cfg[name] = opt->get_default_str();
      }
    }
    return cfg;
  }

  void write(const fs::path& dir) const {
    json j{{"command", command_},
           {"toolkit_version", kToolkitVersion},
           {"effective_config", effective_config()},
           {"seeds", seeds_},
           {"inputs", inputs_}};
    for (const auto& [k, v] : extra_.items()) j[k] = v;
    fs::create_directories(dir);
    write_file(dir / "run.json", j.dump(1) + "\n");
  }

 private:
  std::string command_;
  const CLI::App* sub_;
  std::map<std::string, std::string> inputs_;
  std::map<std::string, std::uint64_t> seeds_;
  json extra_ = json::object();
};

std::shared_ptr<const Cohort> load_cohort(const Common& c, Run& run, bool need_embeddings) {
  if (c.manifest.empty()) throw usage_error("--manifest is required");
  auto cohort = load_manifest(c.manifest);
  run.input(c.manifest);
  if (!c.embeddings.empty()) {
    cohort = attach_embeddings(cohort, c.embeddings);
    run.input(c.embeddings);
  } else if (need_embeddings) {
    throw usage_error("--embeddings is required");
  }
  return std::make_shared<const Cohort>(std::move(cohort));
}

FoldPlan load_plan(const std::string& path, const Cohort& cohort, Run& run) {
  std::ifstream in(path);
  if (!in) throw usage_error("cannot open fold file " + path);
  run.input(path);
  return read_folds(in, cohort);
}

fs::path require_out(const Common& c) {
  if (c.out.empty()) throw usage_error("--out is required");
  fs::create_directories(c.out);
  return c.out;
}

void log(std::ostream& err, const std::string& msg) {
  if (verbosity() > 0) err << "bp: " << msg << '\n';
}

json summary_json(const CohortSummary& s) {
  const auto five = [](const std::optional<FiveNumber>& f) -> json {
    if (!f) return nullptr;
    return {{"min", f->min}, {"q1", f->q1}, {"median", f->median}, {"q3", f->q3}, {"max", f->max}};
  };
  json groups = json::object();
  for (Split split : {Split::kTrain, Split::kTest}) {
    for (MsiStatus m : {MsiStatus::kMsi, MsiStatus::kMss}) {
      const auto& g = s.at(split, m);
      groups[std::string(to_string(split)) + "_" + std::string(to_string(m))] = {
          {"patients", g.patients}, {"patches", g.patches}};
    }
  }
  return {{"groups", groups},
          {"total_patients", s.total_patients},
          {"total_patches", s.total_patches},
          {"dim", s.dim},
          {"snp", five(s.snp)},
          {"snp_missing", s.snp_missing},
          {"cimp_proportions",
           {{"CIMP_H", s.cimp_proportions[0]},
            {"CIMP_LOW", s.cimp_proportions[1]},
            {"NON_CIMP", s.cimp_proportions[2]},
            {"NA", s.cimp_proportions[3]}}},
          {"cnv", five(s.cnv)},
          {"cnv_missing", s.cnv_missing}};
}

void print_metric_line(std::ostream& out, const EvaluationReport& r) {
  out << r.model << ": AUROC " << format_double(r.auroc.interval.mean) << " (sd "
      << format_double(r.auroc.interval.sd) << "), AP " << format_double(r.ap.interval.mean) << ", F1 "
      << format_double(r.f1.interval.mean) << '\n';
  for (const auto& c : r.paired) {
    out << "  vs " << c.comparator << " " << c.metric << ": t=" << format_double(c.test.t)
        << " p=" << format_double(c.test.p) << (c.test.degenerate ? " (degenerate)" : "") << '\n';
  }
}

// Rebuilds the evaluated state of a model directory for fusion.
ExperimentResult load_experiment(const fs::path& dir, std::shared_ptr<const Cohort> cohort,
                                 const std::string& name, Run& run) {
  run.input(dir);
  auto md = read_model_dir(dir, *cohort);
  ExperimentResult r;
  r.labeled = relabel(cohort, md.spec);
  r.plan = md.plan;
  r.focus.name = name;
  for (int f = 0; f < md.plan.k; ++f) r.focus.scores.push_back(score_fold(md.models[f], *cohort, md.plan, f));
  r.focus.models = std::move(md.models);
  r.focus.report = build_report(name, md.spec.describe(), r.focus.scores);
  return r;
}

EvaluationReport evaluate_dir(const ModelDir& md, const Cohort& cohort, const std::string& name,
                              const std::string& labeling, int jobs) {
  std::vector<FoldScores> scores(static_cast<std::size_t>(md.plan.k));
  parallel_for(md.plan.k, jobs, [&](int f) {
    scores[static_cast<std::size_t>(f)] = score_fold(md.models[f], cohort, md.plan, f);
  });
  auto report = build_report(name, labeling, scores);
  for (const auto& flag : md.plan.flags) report.flags.push_back(flag);
  return report;
}

std::string variant_name(const LabelingSpec& spec) { return std::string(to_string(spec.variant)); }

void expect_same_plan(const FoldPlan& a, const FoldPlan& b, const std::string& what) {
  if (a.k != b.k || a.assignment != b.assignment) {
    throw usage_error(what + " was trained on a different fold plan");
  }
}

// Expands `--params <file>` into leading arguments so later flags win.
std::vector<std::string> expand_params(const std::vector<std::string>& args) {
  for (std::size_t i = 1; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--params" && i + 1 < args.size()) {
      path = args[i + 1];
    } else if (args[i].rfind("--params=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      continue;
    }
    json j;
    try {
      j = json::parse(read_file(path));
    } catch (const json::exception& e) {
      throw data_error(path + ": " + e.what());
    }
    if (j.contains("effective_config")) j = j.at("effective_config");
    if (!j.is_object()) throw data_error(path + ": expected a JSON object of option values");
    std::vector<std::string> expanded{args[0]};
    for (const auto& [key, value] : j.items()) {
      if (value.is_boolean()) {
        if (value.get<bool>()) expanded.push_back("--" + key);
      } else if (value.is_string()) {
        expanded.push_back("--" + key);
        expanded.push_back(value.get<std::string>());
      } else if (value.is_number()) {
        expanded.push_back("--" + key);
        expanded.push_back(value.is_number_float() ? format_double(value.get<double>()) : value.dump());
      } else if (!value.is_null()) {
        throw data_error(path + ": option '" + key + "' must be a boolean, number or string");
      }
    }
    expanded.insert(expanded.end(), args.begin() + 1, args.end());
    return expanded;
  }
  return args;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Biologically-primed MSI/MSS classification toolkit", "bp"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolkitVersion));

  Common c;
  LabelOpts label;
  TrainOpts topts;
  std::function<void(CLI::App*)> action;

  const auto io = [&](CLI::App* sub, bool embeddings) {
    sub->add_option("--params", c.params, "JSON file of option values (a run.json also works)");
    sub->add_option("--manifest", c.manifest, "patient manifest CSV");
    if (embeddings) sub->add_option("--embeddings", c.embeddings, "embedding file (CSV or packed)");
    sub->add_option("--out", c.out, "output directory");
  };

  // simulate
  auto* simulate = app.add_subcommand("simulate", "write a synthetic cohort");
  std::string gen_config;
  std::optional<std::uint64_t> sim_seed;
  std::string format = "packed";
  simulate->add_option("--params", c.params, "JSON file of option values");
  simulate->add_option("--config", gen_config, "generator config JSON");
  simulate->add_option("--seed", sim_seed, "overrides the config's seed");
  simulate->add_option("--format", format, "embedding format")->check(CLI::IsMember({"csv", "packed"}));
  simulate->add_option("--out", c.out, "output directory");
  simulate->callback([&] {
    action = [&](CLI::App* sub) {
      Run r("simulate", sub);
      GeneratorConfig g;
      if (!gen_config.empty()) {
        r.input(gen_config);
        try {
          g = json::parse(read_file(gen_config)).get<GeneratorConfig>();
        } catch (const json::exception& e) {
          throw data_error(gen_config + ": " + e.what());
        }
      }
      if (sim_seed) g.seed = *sim_seed;
      const auto dir = require_out(c);
      r.seed("generator", g.seed);
      const Cohort cohort = generate(g);
      write_manifest(cohort, dir / "manifest.csv");
      const auto emb = dir / (format == "csv" ? "embeddings.csv" : "embeddings.bpem");
      write_embeddings(cohort.embeddings(), emb, format == "csv" ? EmbeddingFormat::kCsv : EmbeddingFormat::kPacked);
      write_file(dir / "generator.json", json(g).dump(1) + "\n");
      r.note("generator", g);
      r.write(dir);
      out << "wrote " << cohort.patients().size() << " patients, " << cohort.embeddings().size()
          << " patches to " << dir.string() << '\n';
    };
  });

  // summary
  auto* summary = app.add_subcommand("summary", "cohort counts and genomic distributions");
  io(summary, true);
  summary->callback([&] {
    action = [&](CLI::App* sub) {
      Run r("summary", sub);
      const auto cohort = load_cohort(c, r, true);
      const auto s = cohort_summary(*cohort);
      const std::string text = format_summary(s);
      out << text;
      if (!c.out.empty()) {
        const auto dir = require_out(c);
        write_file(dir / "summary.txt", text);
        write_file(dir / "summary.json", summary_json(s).dump(1) + "\n");
        r.write(dir);
      }
    };
  });

  // relabel
  auto* relabel_cmd = app.add_subcommand("relabel", "assign MSS / MSI_1 / MSI_2 sub-labels");
  io(relabel_cmd, false);
  add_label_options(relabel_cmd, label);
  relabel_cmd->callback([&] {
    action = [&](CLI::App* sub) {
      Run r("relabel", sub);
      const auto cohort = load_cohort(c, r, false);
      const auto labeled = relabel(cohort, to_spec(label));
      std::ostringstream csv;
      write_sublabels(labeled, csv);
      const auto dir = require_out(c);
      write_file(dir / "sublabels.csv", csv.str());
      r.write(dir);
      std::array<std::size_t, 3> n{};
      for (const auto& s : labeled.sublabels) {
        if (s) ++n[static_cast<int>(*s)];
      }
      out << labeled.spec.describe() << ": MSS " << n[0] << ", MSI_1 " << n[1] << ", MSI_2 " << n[2]
          << ", excluded " << labeled.excluded_train_patients.size() << '\n';
    };
  });

  // folds
  auto* folds = app.add_subcommand("folds", "stratified fold plan over TRAIN patients");
  io(folds, false);
  add_label_options(folds, label);
  folds->add_option("--k", c.k, "number of folds");
  folds->add_option("--seed", c.seed, "fold seed")->required();
  folds->callback([&] {
    action = [&](CLI::App* sub) {
      Run r("folds", sub);
      const auto cohort = load_cohort(c, r, false);
      const auto plan = make_folds(relabel(cohort, to_spec(label)), c.k, c.seed);
      r.seed("folds", c.seed);
      std::ostringstream csv;
      write_folds(plan, *cohort, csv);
      const auto dir = require_out(c);
      write_file(dir / "folds.csv", csv.str());
      r.note("flags", plan.flags);
      r.write(dir);
      out << "k=" << plan.k << " folds over " << cohort->patients_in(Split::kTrain).size() << " TRAIN patients\n";
      for (const auto& f : plan.flags) out << "flag: " << f << '\n';
    };
  });

  // sweep
  auto* sweep = app.add_subcommand("sweep", "SNP threshold sweep on the first fold");
  std::string candidates = "800:1500:100";
  std::string folds_file;
  io(sweep, true);
  add_train_options(sweep, topts);
  sweep->add_option("--candidates", candidates, "lo:hi:step or a comma list");
  sweep->add_option("--k", c.k);
  sweep->add_option("--seed", c.seed, "fold and training seed")->required();
  sweep->add_option("--folds", folds_file, "fold plan CSV (default: stratified by MSI status)");
  sweep->add_option("--jobs", c.jobs, "parallel candidates");
  sweep->callback([&] {
    action = [&](CLI::App* sub) {
      Run r("sweep", sub);
      const auto cohort = load_cohort(c, r, true);
      const auto cfg = to_config(topts, c.seed);
      const auto plan = folds_file.empty() ? make_folds(relabel(cohort, LabelingSpec::baseline()), c.k, c.seed)
                                           : load_plan(folds_file, *cohort, r);
      const auto cands = parse_candidates(candidates);
      r.seed("folds", c.seed);
      r.seed("train", c.seed);
      const auto result = sweep_snp_threshold(cohort, cands, plan, cfg, c.jobs);
      const auto dir = require_out(c);
      write_sweep_table(result, dir / "sweep.csv");
      json table = json::array();
      for (const auto& row : result.table) {
        table.push_back({{"threshold", row.threshold},
                         {"val_auroc", row.auroc ? json(*row.auroc) : json(nullptr)},
                         {"note", row.note}});
      }
      write_file(dir / "sweep.json",
                 json{{"best_threshold", result.best_threshold}, {"table", table}}.dump(1) + "\n");
      r.write(dir);
      for (const auto& row : result.table) {
        out << format_double(row.threshold) << ' ' << (row.auroc ? format_double(*row.auroc) : "skipped")
            << (row.note.empty() ? "" : " (" + row.note + ")") << '\n';
      }
      out << "best_threshold=" << format_double(result.best_threshold) << '\n';
    };
  });

  // train
  auto* train_cmd = app.add_subcommand("train", "train one head per fold");
  int fold = -1;
  io(train_cmd, true);
  add_label_options(train_cmd, label);
  add_train_options(train_cmd, topts);
  train_cmd->add_option("--k", c.k);
  train_cmd->add_option("--seed", c.seed, "fold and training seed")->required();
  train_cmd->add_option("--folds", folds_file, "fold plan CSV (default: stratified on this labeling)");
  train_cmd->add_option("--fold", fold, "train a single fold (default: all)");
  train_cmd->add_option("--jobs", c.jobs, "parallel folds");
  train_cmd->callback([&] {
    action = [&](CLI::App* sub) {
      Run r("train", sub);
      const auto cohort = load_cohort(c, r, true);
      const auto spec = to_spec(label);
      const auto labeled = relabel(cohort, spec);
      // A baseline trained with --exclude-mss-cimp-h drops the same patients
      // a CIMP model would.
      const auto exclusions = label.exclude && spec.variant != Variant::kCimp
                                  ? relabel(cohort, LabelingSpec::cimp(true))
                                  : labeled;
      const auto plan = folds_file.empty() ? make_folds(labeled, c.k, c.seed) : load_plan(folds_file, *cohort, r);
      if (fold >= plan.k) throw usage_error("--fold " + std::to_string(fold) + " is outside the plan's k=" + std::to_string(plan.k));
      const auto cfg = to_config(topts, c.seed);
      r.seed("folds", plan.seed);
      r.seed("train", c.seed);
      std::vector<HeadModel> models(static_cast<std::size_t>(plan.k));
      std::vector<int> todo;
      for (int f = 0; f < plan.k; ++f) {
        if (fold < 0 || f == fold) todo.push_back(f);
      }
      parallel_for(static_cast<int>(todo.size()), c.jobs, [&](int t) {
        const int f = todo[static_cast<std::size_t>(t)];
        log(err, "training fold " + std::to_string(f));
        const auto train_patients = without_excluded(exclusions, plan.training_patients(f));
        models[static_cast<std::size_t>(f)] = train(labeled, train_patients, plan.fold_patients(f), cfg, f);
      });
      const auto dir = require_out(c);
      write_model_dir(dir, spec, plan, *cohort, models);
      r.note("training_exclusions", exclusions.excluded_train_patients.size());
      r.note("flags", plan.flags);
      r.write(dir);
      for (int f : todo) {
        const auto& p = models[static_cast<std::size_t>(f)].provenance();
        out << "fold " << f << ": best epoch " << p.best_epoch << ", val AUROC "
            << (p.best_epoch > 0 ? format_double(p.epoch_val_auroc[static_cast<std::size_t>(p.best_epoch - 1)]) : "init")
            << '\n';
      }
    };
  });

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "test-split report against a matched baseline");
  std::string models_dir, baseline_dir, name;
  io(evaluate, true);
  evaluate->add_option("--models", models_dir, "model directory")->required();
  evaluate->add_option("--baseline", baseline_dir, "baseline model directory")->required();
  evaluate->add_option("--folds", folds_file, "fold plan CSV (default: the model directory's)");
  evaluate->add_option("--name", name, "report name (default: the variant)");
  evaluate->add_option("--jobs", c.jobs);
  evaluate->callback([&] {
    action = [&](CLI::App* sub) {
      Run r("evaluate", sub);
      const auto cohort = load_cohort(c, r, true);
      std::optional<FoldPlan> plan;
      if (!folds_file.empty()) plan = load_plan(folds_file, *cohort, r);
      r.input(models_dir);
      r.input(baseline_dir);
      const auto md = read_model_dir(models_dir, *cohort, plan ? &*plan : nullptr);
      const auto bd = read_model_dir(baseline_dir, *cohort, plan ? &*plan : nullptr);
      expect_same_plan(md.plan, bd.plan, "the baseline");
      std::string model_name = name.empty() ? variant_name(md.spec) : name;
      // The comparator's files use the stem "baseline".
      if (model_name == "baseline") model_name = "baseline_model";
      auto report = evaluate_dir(md, *cohort, model_name, md.spec.describe(), c.jobs);
      const auto baseline = evaluate_dir(bd, *cohort, "baseline", bd.spec.describe(), c.jobs);
      add_paired_tests(report, baseline, "baseline");
      const auto dir = require_out(c);
      write_report(report, dir, model_name);
      write_report(baseline, dir, "baseline");
      r.write(dir);
      print_metric_line(out, report);
      print_metric_line(out, baseline);
    };
  });

  // combine
  auto* combine = app.add_subcommand("combine", "fuse two primed models");
  std::string model_a, model_b;
  TrainOpts fusion_opts;
  fusion_opts.hidden = "16";
  io(combine, true);
  add_train_options(combine, fusion_opts);
  combine->add_option("--model-a", model_a, "first model directory")->required();
  combine->add_option("--model-b", model_b, "second model directory")->required();
  combine->add_option("--baseline", baseline_dir, "baseline matched to model A")->required();
  combine->add_option("--seed", c.seed, "fusion training seed")->required();
  combine->add_option("--jobs", c.jobs);
  combine->callback([&] {
    action = [&](CLI::App* sub) {
      Run r("combine", sub);
      const auto cohort = load_cohort(c, r, true);
      auto a = load_experiment(model_a, cohort, "a", r);
      auto b = load_experiment(model_b, cohort, "b", r);
      const auto na = variant_name(a.labeled.spec), nb = variant_name(b.labeled.spec);
      a.focus.name = na == nb ? na + "_a" : na;
      b.focus.name = na == nb ? nb + "_b" : nb;
      a.focus.report.model = a.focus.name;
      b.focus.report.model = b.focus.name;
      r.input(baseline_dir);
      const auto bd = read_model_dir(baseline_dir, *cohort);
      expect_same_plan(a.plan, bd.plan, "the baseline");
      a.baseline.report = evaluate_dir(bd, *cohort, "baseline", bd.spec.describe(), c.jobs);
      const auto cfg = to_config(fusion_opts, c.seed);
      r.seed("fusion", c.seed);
      const auto result = run_combined(a, b, cfg, c.jobs);
      const auto dir = require_out(c);
      for (std::size_t f = 0; f < result.models.size(); ++f) {
        save_fusion(result.models[f], dir / ("fusion_fold" + std::to_string(f) + ".json"));
      }
      write_report(result.report, dir, "combined");
      r.write(dir);
      print_metric_line(out, result.report);
    };
  });

  // profile
  auto* profile = app.add_subcommand("profile", "genomic profile of TP / FN / FP / TN test patches");
  double threshold = 0.5;
  io(profile, true);
  profile->add_option("--models", models_dir, "model directory")->required();
  profile->add_option("--fold", fold, "fold model to profile (default 0)");
  profile->add_option("--patch-threshold", threshold, "patch MSI probability cut-off");
  profile->callback([&] {
    action = [&](CLI::App* sub) {
      Run r("profile", sub);
      const auto cohort = load_cohort(c, r, true);
      r.input(models_dir);
      const auto md = read_model_dir(models_dir, *cohort);
      const int f = fold < 0 ? 0 : fold;
      if (f >= md.plan.k) throw usage_error("--fold is outside the plan");
      std::vector<PatchEmbedding> test;
      for (PatientIndex i : cohort->patients_in(Split::kTest)) {
        for (std::size_t p : cohort->patient(i).patches) test.push_back(cohort->embeddings()[p]);
      }
      const auto preds = predict(md.models[static_cast<std::size_t>(f)], test);
      const auto labeled = relabel(cohort, md.spec);
      const auto prof = misclassification_profile(labeled, preds, md.spec.n_classes(), threshold);
      std::ostringstream csv;
      write_profile(prof, csv);
      const auto dir = require_out(c);
      write_file(dir / "profile.csv", csv.str());
      r.note("flags", prof.flags);
      r.write(dir);
      out << csv.str();
    };
  });

  // reproduce-synthetic
  auto* reproduce = app.add_subcommand("reproduce-synthetic", "seeded end-to-end synthetic experiment");
  reproduce->add_option("--params", c.params, "JSON file of option values");
  reproduce->add_option("--seed", c.seed, "root seed")->required();
  reproduce->add_option("--out", c.out, "output directory");
  reproduce->add_option("--jobs", c.jobs);
  reproduce->callback([&] {
    action = [&](CLI::App* sub) {
      Run r("reproduce-synthetic", sub);
      r.seed("root", c.seed);
      const auto dir = require_out(c);
      log(err, "running synthetic experiment, seed " + std::to_string(c.seed));
      const auto result = run_synthetic(c.seed, c.jobs);
      write_synthetic(result, dir);
      r.write(dir);
      out << synthetic_summary(result).dump(1) << '\n';
    };
  });

  const auto fail = [&](ErrorKind kind, const std::string& msg) {
    err << "error code=" << error_code_name(kind) << " exit=" << exit_code(kind) << ": " << msg << '\n';
    return exit_code(kind);
  };

  try {
    if (!raw_args.empty() && !raw_args[0].empty() && raw_args[0][0] != '-' &&
        app.get_subcommand_no_throw(raw_args[0]) == nullptr) {
      throw CLI::ParseError("unknown subcommand '" + raw_args[0] + "'", CLI::ExitCodes::ExtrasError);
    }
    const auto args = expand_params(raw_args);
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    if (!action) throw usage_error("no subcommand");
    action(app.get_subcommands().front());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kToolkitVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    const int code = fail(ErrorKind::kUsage, e.what());
    err << app.help();
    return code;
  } catch (const Error& e) {
    return fail(e.kind(), e.what());
  } catch (const json::exception& e) {
    return fail(ErrorKind::kDataValidation, e.what());
  } catch (const fs::filesystem_error& e) {
    return fail(ErrorKind::kDataValidation, e.what());
  } catch (const std::exception& e) {
    return fail(ErrorKind::kDataValidation, e.what());
  }
  return 0;
}

}  // namespace bp::cli
