// Command-line front end: simulate, infer, features, evaluate, classify.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "leadership/leadership.hpp"

namespace fs = std::filesystem;
using namespace leadership;

namespace {

enum Exit : int { kOk = 0, kIngest = 2, kConfig = 3, kNoCoordination = 4, kInternal = 5 };

constexpr const char* kOutputEnv = "LEADERSHIP_OUTPUT_DIR";

// An explicit --output wins; otherwise the environment overrides the config
// file, which overrides the default.
fs::path output_dir(const std::string& flag, const std::string& from_config, const char* fallback) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutputEnv); env != nullptr && *env != '\0') return env;
  if (!from_config.empty()) return from_config;
  return fallback;
}

struct PipelineFlags {
  std::string config;
  std::string input;
  std::string output;
  bool wide = false;
  std::size_t interpolate = 0;
  std::optional<std::size_t> omega, delta, beta, merge_gap, max_iter;
  std::optional<double> epsilon, damping, tol;
  std::optional<std::string> lambda;
  bool no_pagerank = false, no_vch = false, no_pch = false;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", config, "JSON config; keys mirror the pipeline fields");
    app->add_option("-i,--input", input, "input CSV (entity_id,time,dim...)");
    app->add_option("-o,--output", output, "output directory");
    app->add_flag("--wide", wide, "input is a one-dimensional wide table: time,<id>,<id>,...");
    app->add_option("--interpolate", interpolate, "fill interior gaps of at most this many steps");
    app->add_option("--omega", omega, "window length");
    app->add_option("--delta", delta, "window shift");
    app->add_option("--beta", beta, "DTW warping band");
    app->add_option("--epsilon", epsilon, "edge threshold on |score|");
    app->add_option("--lambda", lambda, "density threshold: mean | median | percentile:<p>");
    app->add_option("--merge-gap", merge_gap, "merge runs separated by at most this many windows");
    app->add_option("--damping", damping, "PageRank damping");
    app->add_option("--tol", tol, "PageRank L1 tolerance");
    app->add_option("--max-iter", max_iter, "PageRank iteration cap");
    app->add_flag("--no-pagerank", no_pagerank);
    app->add_flag("--no-vch", no_vch);
    app->add_flag("--no-pch", no_pch);
  }

  PipelineConfig resolve() const {
    PipelineConfig cfg;
    if (!config.empty()) cfg = load_config(config);
    if (!input.empty()) cfg.input = input;
    if (omega) cfg.window.omega = *omega;
    if (delta) cfg.window.delta = *delta;
    if (beta) cfg.window.beta = *beta;
    if (epsilon) cfg.epsilon = *epsilon;
    if (lambda) cfg.lambda = ThresholdPolicy::parse(*lambda);
    if (merge_gap) cfg.merge_gap = *merge_gap;
    if (damping) cfg.pagerank.damping = *damping;
    if (tol) cfg.pagerank.tol = *tol;
    if (max_iter) cfg.pagerank.max_iter = *max_iter;
    if (no_pagerank) cfg.measures.pagerank = false;
    if (no_vch) cfg.measures.vch = false;
    if (no_pch) cfg.measures.pch = false;
    cfg.validate();
    if (cfg.input.empty()) throw ConfigError("no input given (--input or config 'input')");
    return cfg;
  }

  IngestOptions ingest() const { return {interpolate, wide}; }
};

struct SimFlags {
  std::string model = "DM";
  SimConfig cfg;
  std::optional<std::size_t> lag_max;

  void attach(CLI::App* app) {
    app->add_option("--model", model, "DM | HM | LT | Random | RotatingDM");
    app->add_option("--kappa", cfg.kappa, "LT nearest neighbours");
    app->add_option("--rho", cfg.rho, "LT activation fraction");
    app->add_option("-n,--individuals", cfg.n, "population size");
    app->add_option("--events", cfg.events, "events per trial");
    app->add_option("--pre", cfg.pre_len, "pre-coordination steps");
    app->add_option("--coord", cfg.coord_len, "coordination steps");
    app->add_option("--post", cfg.post_len, "post-coordination steps");
    app->add_option("--speed", cfg.leader_speed, "leader speed per step");
    app->add_option("--noise", cfg.heading_noise_sigma, "heading noise sigma (radians)");
    app->add_option("--lag-max", lag_max, "largest follower lag (steps)");
    app->add_option("--radius", cfg.circle_radius, "initial circle radius");
    app->add_option("--seed", cfg.seed, "random seed");
  }

  SimConfig resolve() const {
    SimConfig c = cfg;
    c.model = parse_model(model);
    c.lag_max = lag_max;
    c.validate();
    return c;
  }
};

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IngestError("cannot open '" + p.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json read_json(const fs::path& p) {
  try {
    return nlohmann::json::parse(read_text(p));
  } catch (const nlohmann::json::exception& e) {
    throw IngestError("'" + p.string() + "' is not valid JSON: " + e.what());
  }
}

std::string pct(const std::optional<double>& v) {
  if (!v) return "   -";
  std::ostringstream s;
  s.precision(2);
  s << std::fixed << *v;
  return s.str();
}

int cmd_simulate(const SimFlags& flags, const std::string& out_flag) {
  const SimConfig sc = flags.resolve();
  const fs::path dir = output_dir(out_flag, "", "out");
  fs::create_directories(dir);
  const Trial trial = simulate(sc);
  std::ostringstream csv;
  write_long_csv(csv, trial.dataset);
  write_text(dir / "trajectories.csv", csv.str());
  write_text(dir / "truth.json", json_text(truth_json(trial)));
  std::cout << "wrote " << (dir / "trajectories.csv").string() << " (" << trial.dataset.entities()
            << " entities, " << trial.dataset.steps() << " steps) and truth.json\n";
  return kOk;
}

int cmd_infer(const PipelineFlags& flags, bool features_only) {
  const PipelineConfig cfg = flags.resolve();
  const Dataset data = read_dataset(cfg.input, flags.ingest());
  const Analysis a = analyze(data, cfg);
  const fs::path dir = output_dir(flags.output, cfg.output, "out");
  if (features_only) {
    fs::create_directories(dir);
    const auto j = features_json(a, data.dims());
    write_text(dir / "features.json", json_text(j));
    std::cout << json_text(j);
  } else {
    write_analysis(dir, data, cfg, a);
    std::cout << a.events.size() << " coordination event(s); outputs in " << dir.string() << "\n";
  }
  if (!a.coordinated()) {
    std::cerr << "no coordination found: density never exceeds threshold " << a.threshold << "\n";
    return kNoCoordination;
  }
  return kOk;
}

int cmd_evaluate(EvaluationConfig ec, const std::string& out_flag, bool quiet) {
  const fs::path dir = output_dir(out_flag, "", "evaluation");
  fs::create_directories(dir);
  Progress progress;
  if (!quiet) progress = [](const std::string& m) { std::cerr << m << "\n"; };
  const EvaluationReport rep = evaluate_tables(ec, progress);

  std::ostringstream s;
  write_precision_csv(s, rep.precision);
  write_text(dir / "precision.csv", s.str());
  std::cout << "leader precision       PR   VCH   PCH  events\n";
  for (const auto& r : rep.precision)
    std::cout << "  " << r.model << std::string(20 - std::min<std::size_t>(20, r.model.size()), ' ')
              << pct(r.precision[0]) << "  " << pct(r.precision[1]) << "  " << pct(r.precision[2]) << "  "
              << r.mean_events << "\n";
  if (!rep.hierarchy.empty()) {
    s.str("");
    write_hierarchy_csv(s, rep.hierarchy);
    write_text(dir / "hierarchy.csv", s.str());
    std::cout << "HM hierarchy rank      PR   VCH   PCH\n";
    for (const auto& r : rep.hierarchy)
      std::cout << "  " << r.rank << "                   " << pct(r.precision[0]) << "  "
                << pct(r.precision[1]) << "  " << pct(r.precision[2]) << "\n";
  }
  if (rep.rotating) {
    s.str("");
    write_rotating_csv(s, *rep.rotating);
    write_text(dir / "rotating.csv", s.str());
    std::cout << "rotating leader: " << rep.rotating->hits() << "/" << rep.rotating->events.size()
              << " events correct; spread ratio per-event/static " << rep.rotating->spread_ratio() << "\n";
  }
  if (rep.classification) {
    s.str("");
    write_classification_csv(s, *rep.classification);
    write_text(dir / "classification.csv", s.str());
    std::cout << "classification (" << rep.classification->folds << "-fold CV)\n";
    for (const auto& c : rep.classification->classes)
      std::cout << "  " << label_name(c.label) << "  P " << pct(c.precision) << "  R " << pct(c.recall)
                << "  F " << pct(c.f_score) << "\n";
  }
  return kOk;
}

int cmd_classify(EvaluationConfig ec, const std::string& out_flag, const std::string& model_path,
                 const std::vector<std::string>& predict, bool quiet) {
  if (!predict.empty()) {
    if (model_path.empty()) throw ConfigError("--predict needs --model");
    const EnsembleModel m = EnsembleModel::from_json(read_json(model_path));
    for (const auto& p : predict) {
      const FeatureVector f = feature_vector_from_json(read_json(p));
      std::cout << p << "," << label_name(m.predict(f.values())) << "\n";
    }
    return kOk;
  }

  const fs::path dir = output_dir(out_flag, "", "classifier");
  fs::create_directories(dir);
  ec.precision_models.clear();
  ec.hierarchy_trials = 0;
  ec.rotating = false;
  ec.classification = true;
  Progress progress;
  if (!quiet) progress = [](const std::string& msg) { std::cerr << msg << "\n"; };
  const EvaluationReport rep = evaluate_tables(ec, progress);
  std::ostringstream s;
  write_classification_csv(s, *rep.classification);
  write_text(dir / "classification.csv", s.str());

  // Final model on every sample the cross validation saw.
  const EnsembleModel m = train(rep.samples, ec.forest_seed, ec.forest);
  const fs::path out_model = model_path.empty() ? dir / "model.json" : fs::path(model_path);
  write_text(out_model, m.to_json().dump() + "\n");
  for (const auto& c : rep.classification->classes)
    std::cout << label_name(c.label) << "  P " << pct(c.precision) << "  R " << pct(c.recall) << "  F "
              << pct(c.f_score) << "\n";
  std::cout << "model written to " << out_model.string() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Leadership inference from multivariate time series"};
  app.require_subcommand(1);

  SimFlags sim_flags;
  std::string sim_out;
  auto* sim = app.add_subcommand("simulate", "generate a trial and its ground truth");
  sim_flags.attach(sim);
  sim->add_option("-o,--output", sim_out, "output directory");

  PipelineFlags infer_flags;
  auto* infer = app.add_subcommand("infer", "run the full pipeline on a dataset");
  infer_flags.attach(infer);

  PipelineFlags feat_flags;
  auto* feat = app.add_subcommand("features", "compute the feature vector of a dataset");
  feat_flags.attach(feat);

  EvaluationConfig ec = EvaluationConfig::desk_scale();
  std::string eval_out;
  bool paper_scale = false, quiet = false, no_rotating = false, no_classification = false;
  auto* eval = app.add_subcommand("evaluate", "reproduce the simulation tables");
  eval->add_option("--trials", ec.precision_trials, "trials per model for the precision tables");
  eval->add_option("--trials-per-label", ec.trials_per_label, "trials per class for classification");
  eval->add_option("--folds", ec.folds, "cross-validation folds");
  eval->add_option("--trees", ec.forest.n_trees, "trees in the forest");
  eval->add_option("--seed", ec.base_seed, "base seed for the suites");
  eval->add_flag("--paper-scale", paper_scale, "20 events of 200/200/200 steps per trial");
  eval->add_flag("--no-rotating", no_rotating);
  eval->add_flag("--no-classification", no_classification);
  eval->add_flag("-q,--quiet", quiet, "no progress output");
  eval->add_option("-o,--output", eval_out, "output directory");

  EvaluationConfig cc = EvaluationConfig::desk_scale();
  std::string cls_out, model_path;
  std::vector<std::string> predict;
  bool cls_paper = false, cls_quiet = false;
  auto* cls = app.add_subcommand("classify", "train and cross-validate the model classifier, or predict");
  cls->add_option("--trials-per-label", cc.trials_per_label, "trials per class");
  cls->add_option("--folds", cc.folds, "cross-validation folds");
  cls->add_option("--trees", cc.forest.n_trees, "trees in the forest");
  cls->add_option("--seed", cc.base_seed, "base seed for the suites");
  cls->add_option("--forest-seed", cc.forest_seed, "seed for bootstrap and feature sampling");
  cls->add_flag("--paper-scale", cls_paper, "20 events of 200/200/200 steps per trial");
  cls->add_option("--model", model_path, "model JSON to write after training, or to read with --predict");
  cls->add_option("--predict", predict, "features.json files to label");
  cls->add_flag("-q,--quiet", cls_quiet, "no progress output");
  cls->add_option("-o,--output", cls_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*sim) return cmd_simulate(sim_flags, sim_out);
    if (*infer) return cmd_infer(infer_flags, false);
    if (*feat) return cmd_infer(feat_flags, true);
    auto paper = [](EvaluationConfig& c) {
      c.base.events = 20;
      c.base.pre_len = c.base.coord_len = c.base.post_len = 200;
    };
    if (*eval) {
      if (paper_scale) paper(ec);
      ec.rotating = !no_rotating;
      ec.classification = !no_classification;
      return cmd_evaluate(ec, eval_out, quiet);
    }
    if (*cls) {
      if (cls_paper) paper(cc);
      return cmd_classify(cc, cls_out, model_path, predict, cls_quiet);
    }
  } catch (const IngestError& e) {
    std::cerr << "ingest error: " << e.what() << "\n";
    return kIngest;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kInternal;
}
