#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "leadership/dataset.hpp"
#include "leadership/dtw.hpp"
#include "leadership/network.hpp"
#include "leadership/pagerank.hpp"
#include "leadership/ranking.hpp"

namespace leadership {

struct MeasureToggles {
  bool pagerank = true;
  bool vch = true;
  bool pch = true;
};

struct PipelineConfig {
  WindowSpec window{};
  double epsilon = 0.0;
  ThresholdPolicy lambda = ThresholdPolicy::mean();
  std::optional<std::size_t> merge_gap;  // default: beta in windows
  PageRankOptions pagerank{};
  MeasureToggles measures{};
  std::uint64_t seed = 0;
  std::string input;
  std::string output;

  std::size_t effective_merge_gap() const { return merge_gap.value_or(default_merge_gap(window)); }

  void validate() const {
    window.validate();
    if (epsilon < 0.0) throw ConfigError("epsilon must be >= 0");
    if (!(pagerank.damping > 0.0 && pagerank.damping < 1.0))
      throw ConfigError("pagerank damping must be in (0, 1)");
    if (!(pagerank.tol > 0.0)) throw ConfigError("pagerank tol must be positive");
    if (pagerank.max_iter < 1) throw ConfigError("pagerank max_iter must be >= 1");
  }
};

/// Everything computed for one dataset.
struct Analysis {
  std::size_t n = 0;
  FollowScores scores;
  FollowingNetworkSequence networks;
  std::vector<double> density;
  double threshold = 0.0;
  std::vector<CoordinationEvent> events;
  std::optional<MeasureRankings> pagerank;
  std::optional<MeasureRankings> vch;
  std::optional<MeasureRankings> pch;
  bool pch_available = false;
  std::optional<FeatureVector> features;

  bool coordinated() const { return !events.empty(); }

  const MeasureRankings* rankings(Measure m) const {
    const auto& r = m == Measure::PageRank ? pagerank : m == Measure::Vch ? vch : pch;
    return r ? &*r : nullptr;
  }
};

/// Scores, networks, density and events; the ranking stages are left empty.
inline Analysis detect(const Dataset& data, const PipelineConfig& cfg) {
  cfg.validate();
  if (window_count(cfg.window, data.steps()) == 0)
    throw ConfigError("series shorter than one window (t < omega)");
  Analysis a;
  a.n = data.entities();
  a.scores = pairwise_follow_scores(data, cfg.window);
  a.networks = infer_network(a.scores, cfg.epsilon);
  a.density = density_series(a.networks);
  a.threshold = resolve_threshold(a.density, cfg.lambda);
  a.events = detect_events(a.density, a.threshold, cfg.effective_merge_gap());
  return a;
}

/// Full analysis: detection followed by rankings, support and features.
inline Analysis analyze(const Dataset& data, const PipelineConfig& cfg) {
  Analysis a = detect(data, cfg);
  a.pch_available = data.dims() == 2 && cfg.measures.pch;
  if (!a.coordinated()) return a;

  const RankingContext ctx{data, cfg.window, a.networks, cfg.pagerank};
  if (cfg.measures.pagerank) a.pagerank = rank_events(Measure::PageRank, ctx, a.events);
  if (cfg.measures.vch) a.vch = rank_events(Measure::Vch, ctx, a.events);
  if (a.pch_available) a.pch = rank_events(Measure::Pch, ctx, a.events);
  if (a.pagerank && a.vch)
    a.features = feature_vector(*a.pagerank, *a.vch, a.pch ? &*a.pch : nullptr);
  return a;
}

}  // namespace leadership
