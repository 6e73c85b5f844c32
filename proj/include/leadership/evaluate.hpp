#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "leadership/forest.hpp"
#include "leadership/io.hpp"
#include "leadership/pipeline.hpp"
#include "leadership/simulate.hpp"

namespace leadership {

inline constexpr std::array<Measure, 3> kMeasures{Measure::PageRank, Measure::Vch, Measure::Pch};

/// What the tables need from one simulated trial.
struct TrialOutcome {
  std::size_t leader = 0;
  std::vector<std::size_t> ranks;  // HM truth
  std::size_t events_detected = 0;
  // top[m][p]: entity with the most support at position p + 1 for measure m;
  // empty when the measure was not computed.
  std::array<std::vector<std::size_t>, 3> top;
  std::array<bool, 3> enabled{};  // measure configured and applicable
  std::optional<FeatureVector> features;
};

inline TrialOutcome evaluate_trial(const Trial& trial, const PipelineConfig& cfg,
                                   std::size_t positions = 4) {
  const Analysis a = analyze(trial.dataset, cfg);
  TrialOutcome o;
  o.leader = trial.truth.front().leader;
  o.ranks = trial.truth.front().ranks;
  o.events_detected = a.events.size();
  o.features = a.features;
  o.enabled = {cfg.measures.pagerank, cfg.measures.vch, cfg.measures.pch && trial.dataset.dims() == 2};
  const std::size_t p = std::min(positions, a.n);
  for (std::size_t q = 0; q < kMeasures.size(); ++q) {
    const MeasureRankings* r = a.rankings(kMeasures[q]);
    if (r == nullptr) continue;
    for (std::size_t pos = 1; pos <= p; ++pos) o.top[q].push_back(top_supported(*r, pos));
  }
  return o;
}

using Progress = std::function<void(const std::string&)>;

inline std::vector<TrialOutcome> run_suite(SimConfig sim, std::size_t trials, std::uint64_t base_seed,
                                           const PipelineConfig& cfg, const Progress& progress = {}) {
  if (trials < 1) throw ConfigError("suite needs at least one trial");
  std::vector<TrialOutcome> out;
  for (std::size_t k = 0; k < trials; ++k) {
    sim.seed = base_seed + k;
    out.push_back(evaluate_trial(simulate(sim), cfg));
    if (progress) progress(sim.label() + " trial " + std::to_string(k + 1) + "/" + std::to_string(trials));
  }
  return out;
}

// ---------------------------------------------------------------- tables

/// Leader precision per measure: fraction of trials whose most-supported
/// entity is the true leader. Trials without events count as misses.
struct PrecisionRow {
  std::string model;
  std::size_t trials = 0;
  std::array<std::optional<double>, 3> precision;  // PageRank, VCH, PCH
  double mean_events = 0.0;
};

inline PrecisionRow precision_row(const std::string& model, const std::vector<TrialOutcome>& suite,
                                  std::size_t trials) {
  trials = std::min(trials, suite.size());
  PrecisionRow row{model, trials, {}, 0.0};
  for (std::size_t q = 0; q < kMeasures.size(); ++q) {
    if (trials == 0 || !suite.front().enabled[q]) continue;
    std::size_t hits = 0;
    for (std::size_t k = 0; k < trials; ++k)
      hits += !suite[k].top[q].empty() && suite[k].top[q][0] == suite[k].leader ? 1 : 0;
    row.precision[q] = static_cast<double>(hits) / static_cast<double>(trials);
  }
  for (std::size_t k = 0; k < trials; ++k)
    row.mean_events += static_cast<double>(suite[k].events_detected);
  if (trials > 0) row.mean_events /= static_cast<double>(trials);
  return row;
}

/// Precision of recovering the rank-r individual of the HM chain as the
/// entity most often placed at position r.
struct HierarchyRow {
  std::size_t rank = 0;
  std::array<std::optional<double>, 3> precision;
};

inline std::vector<HierarchyRow> hierarchy_table(const std::vector<TrialOutcome>& suite,
                                                 std::size_t trials) {
  trials = std::min(trials, suite.size());
  if (trials == 0) return {};
  const std::size_t ranks = suite.front().ranks.size();
  std::vector<HierarchyRow> rows;
  for (std::size_t r = 0; r < ranks; ++r) {
    HierarchyRow row{r + 1, {}};
    for (std::size_t q = 0; q < kMeasures.size(); ++q) {
      if (!suite.front().enabled[q]) continue;
      std::size_t hits = 0;
      for (std::size_t k = 0; k < trials; ++k) {
        const auto& o = suite[k];
        hits += o.top[q].size() > r && o.top[q][r] == o.ranks[r] ? 1 : 0;
      }
      row.precision[q] = static_cast<double>(hits) / static_cast<double>(trials);
    }
    rows.push_back(row);
  }
  return rows;
}

/// Per-event leaders versus the time-aggregated network for a trial whose
/// leader changes every event.
struct RotatingEvent {
  std::size_t scheduled = 0;  // scheduled event index
  std::size_t leader = 0;
  std::optional<std::size_t> detected;  // first detected event mapped here
  std::optional<std::size_t> top;       // PageRank first place in that event
  double spread = 0.0;                  // max - min PageRank over the pre interval
};

struct RotatingReport {
  std::vector<RotatingEvent> events;
  std::size_t detected_events = 0;
  std::vector<double> static_pagerank;
  double per_event_spread = 0.0;  // mean over detected events
  double static_spread = 0.0;

  std::size_t hits() const {
    return static_cast<std::size_t>(std::count_if(events.begin(), events.end(), [](const auto& e) {
      return e.top && *e.top == e.leader;
    }));
  }
  double spread_ratio() const {
    return static_spread > 0.0 ? per_event_spread / static_spread : std::numeric_limits<double>::infinity();
  }
};

inline double value_spread(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi - *lo;
}

inline RotatingReport rotating_experiment(const Trial& trial, const PipelineConfig& cfg) {
  PipelineConfig c = cfg;
  c.measures = {true, false, false};
  const Analysis a = analyze(trial.dataset, c);
  RotatingReport rep;
  rep.detected_events = a.events.size();
  for (std::size_t e = 0; e < trial.truth.size(); ++e) rep.events.push_back({e, trial.truth[e].leader, {}, {}, 0.0});

  const std::size_t steps = trial.dataset.steps();
  double total_spread = 0.0;
  for (std::size_t q = 0; q < a.events.size(); ++q) {
    const auto& ev = a.events[q];
    const auto [first, last] = pre_windows(ev);
    const double s = value_spread(pagerank(aggregate_network(a.networks, first, last), c.pagerank).scores);
    total_spread += s;
    const std::size_t t = window_interval(ev.coord_start, c.window, steps).begin;
    for (std::size_t e = 0; e < trial.truth.size(); ++e) {
      const auto& tr = trial.truth[e];
      if (t < tr.pre_start || t >= tr.end || rep.events[e].detected) continue;
      rep.events[e].detected = q;
      rep.events[e].top = a.pagerank->events[q].order.order.front();
      rep.events[e].spread = s;
    }
  }
  if (!a.events.empty()) rep.per_event_spread = total_spread / static_cast<double>(a.events.size());
  rep.static_pagerank = pagerank(aggregate_network(a.networks, 0, a.networks.size()), c.pagerank).scores;
  rep.static_spread = value_spread(rep.static_pagerank);
  return rep;
}

// ---------------------------------------------------------------- full evaluation

struct ModelSetting {
  Model model = Model::DM;
  std::size_t kappa = 3;
  double rho = 0.25;
};

inline Label class_of(Model m) {
  switch (m) {
    case Model::DM:
    case Model::RotatingDM: return Label::DM;
    case Model::HM: return Label::HM;
    case Model::LT: return Label::LT;
    case Model::Random: return Label::Random;
  }
  return Label::DM;
}

struct EvaluationConfig {
  PipelineConfig pipeline{};
  SimConfig base{};  // n, events, interval lengths and motion parameters
  std::uint64_t base_seed = 1;

  std::size_t precision_trials = 20;
  std::vector<ModelSetting> precision_models{{Model::DM},       {Model::HM},       {Model::LT, 3, 0.25},
                                             {Model::LT, 5, 0.25}, {Model::LT, 10, 0.75}, {Model::Random}};
  std::size_t hierarchy_trials = 20;

  // Rotating-leader trial uses its own sizes.
  bool rotating = true;
  std::size_t rotating_n = 20;
  std::size_t rotating_events = 20;
  std::size_t rotating_len = 200;  // pre, coord and post

  bool classification = true;
  std::size_t trials_per_label = 50;
  std::vector<ModelSetting> lt_pool{{Model::LT, 3, 0.25}, {Model::LT, 5, 0.5}, {Model::LT, 10, 0.75}};
  std::size_t folds = 10;
  ForestOptions forest{};
  std::uint64_t forest_seed = 7;

  static EvaluationConfig desk_scale() {
    EvaluationConfig c;
    c.base.events = 10;
    c.base.pre_len = c.base.coord_len = c.base.post_len = 100;
    return c;
  }
};

struct EvaluationReport {
  std::vector<PrecisionRow> precision;
  std::vector<HierarchyRow> hierarchy;
  std::optional<RotatingReport> rotating;
  std::optional<CvReport> classification;
  std::vector<LabeledSample> samples;  // classification input
  std::size_t trials_run = 0;
};

inline SimConfig setting_config(const SimConfig& base, const ModelSetting& s) {
  SimConfig c = base;
  c.model = s.model;
  c.kappa = s.kappa;
  c.rho = s.rho;
  return c;
}

/// Trials per setting for the classification suite: the LT label is split
/// as evenly as possible over the pooled settings.
inline std::vector<std::pair<ModelSetting, std::size_t>> classification_plan(const EvaluationConfig& cfg) {
  std::vector<std::pair<ModelSetting, std::size_t>> plan;
  for (Model m : {Model::DM, Model::HM, Model::Random}) plan.emplace_back(ModelSetting{m}, cfg.trials_per_label);
  const std::size_t pools = cfg.lt_pool.size();
  for (std::size_t q = 0; q < pools; ++q)
    plan.emplace_back(cfg.lt_pool[q], cfg.trials_per_label / pools + (q < cfg.trials_per_label % pools ? 1 : 0));
  return plan;
}

/// Labelled feature vectors in plan order; ids are assigned sequentially.
/// Trials without coordination contribute no sample.
inline std::vector<LabeledSample> labeled_samples(
    const std::vector<std::pair<ModelSetting, std::vector<TrialOutcome>>>& suites) {
  std::vector<LabeledSample> samples;
  std::uint64_t id = 0;
  for (const auto& [s, outs] : suites)
    for (const auto& o : outs) {
      if (o.features) samples.push_back({id, o.features->values(), class_of(s.model)});
      ++id;
    }
  return samples;
}

/// Reproduces the evaluation tables from generated suites. Suites are keyed by
/// model label and shared between tables: a table that needs k trials uses
/// the first k of the suite.
inline EvaluationReport evaluate_tables(const EvaluationConfig& cfg, const Progress& progress = {}) {
  struct Suite {
    SimConfig sim;
    std::vector<TrialOutcome> outcomes;
  };
  std::vector<Suite> suites;
  EvaluationReport rep;
  auto suite = [&](const ModelSetting& s, std::size_t trials) -> const std::vector<TrialOutcome>& {
    const SimConfig sim = setting_config(cfg.base, s);
    auto it = std::find_if(suites.begin(), suites.end(),
                           [&](const Suite& x) { return x.sim.label() == sim.label(); });
    if (it == suites.end()) {
      suites.push_back({sim, {}});
      it = suites.end() - 1;
    }
    if (it->outcomes.size() < trials) {
      auto more = run_suite(sim, trials - it->outcomes.size(), cfg.base_seed + it->outcomes.size(),
                            cfg.pipeline, progress);
      rep.trials_run += more.size();
      it->outcomes.insert(it->outcomes.end(), more.begin(), more.end());
    }
    return it->outcomes;
  };

  // Plan the largest request per label first so every suite runs once.
  std::vector<std::pair<ModelSetting, std::size_t>> plan;
  auto want = [&](const ModelSetting& s, std::size_t trials) {
    const std::string l = setting_config(cfg.base, s).label();
    for (auto& [ps, pt] : plan)
      if (setting_config(cfg.base, ps).label() == l) {
        pt = std::max(pt, trials);
        return;
      }
    plan.emplace_back(s, trials);
  };
  for (const auto& s : cfg.precision_models) want(s, cfg.precision_trials);
  if (cfg.hierarchy_trials > 0) want({Model::HM}, cfg.hierarchy_trials);
  const auto cls = cfg.classification ? classification_plan(cfg) : decltype(classification_plan(cfg)){};
  for (const auto& [s, t] : cls) want(s, t);
  for (const auto& [s, t] : plan) suite(s, t);

  for (const auto& s : cfg.precision_models)
    rep.precision.push_back(precision_row(setting_config(cfg.base, s).label(), suite(s, cfg.precision_trials),
                                          cfg.precision_trials));
  if (cfg.hierarchy_trials > 0)
    rep.hierarchy = hierarchy_table(suite({Model::HM}, cfg.hierarchy_trials), cfg.hierarchy_trials);

  if (cfg.rotating) {
    SimConfig sim = cfg.base;
    sim.model = Model::RotatingDM;
    sim.n = cfg.rotating_n;
    sim.events = cfg.rotating_events;
    sim.pre_len = sim.coord_len = sim.post_len = cfg.rotating_len;
    sim.lag_max.reset();
    sim.hm_lag.reset();
    sim.seed = cfg.base_seed;
    if (progress) progress("RotatingDM trial");
    rep.rotating = rotating_experiment(simulate(sim), cfg.pipeline);
    ++rep.trials_run;
  }

  if (cfg.classification) {
    std::vector<std::pair<ModelSetting, std::vector<TrialOutcome>>> sets;
    for (const auto& [s, t] : cls) {
      const auto& outs = suite(s, t);
      sets.emplace_back(s, std::vector<TrialOutcome>(outs.begin(), outs.begin() + static_cast<std::ptrdiff_t>(t)));
    }
    rep.samples = labeled_samples(sets);
    const auto& samples = rep.samples;
    if (progress) progress("cross validation over " + std::to_string(samples.size()) + " samples");
    rep.classification = cross_validate(samples, cfg.folds, cfg.forest_seed, cfg.forest);
  }
  return rep;
}

// ---------------------------------------------------------------- CSV

inline std::string optional_cell(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

inline void write_precision_csv(std::ostream& out, const std::vector<PrecisionRow>& rows) {
  out << "model,trials,pagerank,vch,pch,mean_events\n";
  for (const auto& r : rows)
    out << r.model << ',' << r.trials << ',' << optional_cell(r.precision[0]) << ','
        << optional_cell(r.precision[1]) << ',' << optional_cell(r.precision[2]) << ','
        << format_double(r.mean_events) << '\n';
}

inline void write_hierarchy_csv(std::ostream& out, const std::vector<HierarchyRow>& rows) {
  out << "rank,pagerank,vch,pch\n";
  for (const auto& r : rows)
    out << r.rank << ',' << optional_cell(r.precision[0]) << ',' << optional_cell(r.precision[1]) << ','
        << optional_cell(r.precision[2]) << '\n';
}

inline void write_rotating_csv(std::ostream& out, const RotatingReport& r) {
  out << "event,leader,detected_event,pagerank_top,correct,pagerank_spread\n";
  for (const auto& e : r.events)
    out << e.scheduled << ',' << e.leader << ',' << (e.detected ? std::to_string(*e.detected) : "") << ','
        << (e.top ? std::to_string(*e.top) : "") << ',' << (e.top && *e.top == e.leader ? 1 : 0) << ','
        << format_double(e.spread) << '\n';
  out << "static,,,,," << format_double(r.static_spread) << '\n';
}

inline void write_classification_csv(std::ostream& out, const CvReport& r) {
  out << "class,precision,recall,f_score\n";
  for (const auto& c : r.classes)
    out << label_name(c.label) << ',' << format_double(c.precision) << ',' << format_double(c.recall)
        << ',' << format_double(c.f_score) << '\n';
}

}  // namespace leadership
