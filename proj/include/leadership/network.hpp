#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "leadership/dataset.hpp"
#include "leadership/dtw.hpp"

namespace leadership {

/// Directed edge from a follower to the entity it follows.
struct Edge {
  std::size_t follower = 0;
  std::size_t leader = 0;
  double weight = 0.0;
  friend bool operator==(const Edge&, const Edge&) = default;
};

struct FollowingNetwork {
  std::size_t n = 0;
  std::vector<Edge> edges;
};

struct FollowingNetworkSequence {
  std::size_t n = 0;
  std::vector<FollowingNetwork> windows;

  std::size_t size() const { return windows.size(); }
  const FollowingNetwork& operator[](std::size_t k) const { return windows[k]; }
};

/// One edge per pair whose |score| exceeds epsilon, pointing follower -> leader.
inline FollowingNetworkSequence infer_network(const FollowScores& scores, double epsilon = 0.0) {
  if (epsilon < 0.0) throw ConfigError("epsilon must be >= 0");
  const std::size_t n = scores.entities();
  FollowingNetworkSequence seq{n, {}};
  seq.windows.resize(scores.windows());
  for (std::size_t k = 0; k < scores.windows(); ++k) {
    auto& net = seq.windows[k];
    net.n = n;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        const double s = scores.follows(k, a, b);
        if (std::abs(s) <= epsilon) continue;
        if (s > 0.0)
          net.edges.push_back({a, b, s});
        else
          net.edges.push_back({b, a, -s});
      }
    }
  }
  return seq;
}

inline double density(const FollowingNetwork& net) {
  if (net.n < 2) throw std::invalid_argument("density: need n >= 2");
  const double n = static_cast<double>(net.n);
  return 2.0 * static_cast<double>(net.edges.size()) / (n * (n - 1.0));
}

inline std::vector<double> density_series(const FollowingNetworkSequence& seq) {
  std::vector<double> d;
  d.reserve(seq.size());
  for (const auto& net : seq.windows) d.push_back(density(net));
  return d;
}

struct ThresholdPolicy {
  enum class Kind { Mean, Median, Percentile };
  Kind kind = Kind::Mean;
  double percentile = 50.0;

  static ThresholdPolicy mean() { return {Kind::Mean, 0.0}; }
  static ThresholdPolicy median() { return {Kind::Median, 0.0}; }
  static ThresholdPolicy at_percentile(double p) { return {Kind::Percentile, p}; }

  /// Accepts "mean", "median", "percentile:<p>" or "p<p>".
  static ThresholdPolicy parse(const std::string& text) {
    if (text == "mean") return mean();
    if (text == "median") return median();
    std::string num;
    if (text.rfind("percentile:", 0) == 0)
      num = text.substr(11);
    else if (text.size() > 1 && text[0] == 'p')
      num = text.substr(1);
    else
      throw ConfigError("unknown threshold policy '" + text + "'");
    double p = 0.0;
    try {
      std::size_t used = 0;
      p = std::stod(num, &used);
      if (used != num.size()) throw ConfigError("");
    } catch (...) {
      throw ConfigError("bad percentile in threshold policy '" + text + "'");
    }
    if (p < 0.0 || p > 100.0) throw ConfigError("percentile must be in [0, 100]");
    return at_percentile(p);
  }

  std::string to_string() const {
    switch (kind) {
      case Kind::Mean: return "mean";
      case Kind::Median: return "median";
      case Kind::Percentile: break;
    }
    std::string s = std::to_string(percentile);
    s.erase(s.find_last_not_of('0') + 1);
    if (!s.empty() && s.back() == '.') s.pop_back();
    return "percentile:" + s;
  }
};

/// Threshold lambda from the density distribution. Percentiles use nearest rank.
inline double resolve_threshold(const std::vector<double>& d, const ThresholdPolicy& policy) {
  if (d.empty()) throw ComputeError("resolve_threshold: empty density series");
  switch (policy.kind) {
    case ThresholdPolicy::Kind::Mean:
      return std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
    case ThresholdPolicy::Kind::Median: {
      std::vector<double> s(d);
      std::sort(s.begin(), s.end());
      const std::size_t mid = s.size() / 2;
      return s.size() % 2 == 1 ? s[mid] : 0.5 * (s[mid - 1] + s[mid]);
    }
    case ThresholdPolicy::Kind::Percentile: {
      std::vector<double> s(d);
      std::sort(s.begin(), s.end());
      const double rank = std::ceil(policy.percentile / 100.0 * static_cast<double>(s.size()));
      const std::size_t idx = rank < 1.0 ? 0 : static_cast<std::size_t>(rank) - 1;
      return s[std::min(idx, s.size() - 1)];
    }
  }
  return 0.0;
}

/// A coordination event in window indices: pre-coordination starts at
/// pre_start, coordination spans [coord_start, coord_end] inclusive.
struct CoordinationEvent {
  std::size_t pre_start = 0;
  std::size_t coord_start = 0;
  std::size_t coord_end = 0;
  friend bool operator==(const CoordinationEvent&, const CoordinationEvent&) = default;
};

/// Walks left from j while density is strictly rising; never goes below floor.
inline std::size_t backtrack_pre_start(const std::vector<double>& d, std::size_t j,
                                       std::size_t floor = 0) {
  std::size_t k = std::min(j, d.empty() ? 0 : d.size() - 1);
  while (k > floor && d[k] - d[k - 1] > 0.0) --k;
  return k;
}

/// Maximal runs with d > lambda, greedily merged when separated by at most
/// merge_gap windows, each given a pre-coordination start.
inline std::vector<CoordinationEvent> detect_events(const std::vector<double>& d, double lambda,
                                                    std::size_t merge_gap) {
  struct Run {
    std::size_t begin, end;
  };
  std::vector<Run> runs;
  for (std::size_t k = 0; k < d.size(); ++k) {
    if (!(d[k] > lambda)) continue;
    if (!runs.empty() && runs.back().end + 1 == k)
      runs.back().end = k;
    else
      runs.push_back({k, k});
  }

  std::vector<Run> merged;
  for (const Run& r : runs) {
    if (!merged.empty() && r.begin - merged.back().end - 1 <= merge_gap)
      merged.back().end = r.end;
    else
      merged.push_back(r);
  }

  std::vector<CoordinationEvent> events;
  events.reserve(merged.size());
  for (const Run& r : merged) {
    const std::size_t floor = events.empty() ? 0 : events.back().coord_end + 1;
    events.push_back({backtrack_pre_start(d, r.begin, floor), r.begin, r.end});
  }
  return events;
}

/// Default merge gap: the warping band expressed in windows, rounded up.
inline std::size_t default_merge_gap(const WindowSpec& spec) {
  return (spec.beta + spec.delta - 1) / spec.delta;
}

}  // namespace leadership
