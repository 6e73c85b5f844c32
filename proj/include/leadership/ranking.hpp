#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "leadership/dataset.hpp"
#include "leadership/geometry.hpp"
#include "leadership/network.hpp"
#include "leadership/pagerank.hpp"

namespace leadership {

/// Permutation of entity indices; order[0] is the highest ranked.
struct RankOrder {
  std::vector<std::size_t> order;

  std::size_t size() const { return order.size(); }
  std::size_t first() const { return order.front(); }

  /// 1-based position of every entity.
  std::vector<double> positions() const {
    std::vector<double> pos(order.size());
    for (std::size_t r = 0; r < order.size(); ++r) pos[order[r]] = static_cast<double>(r + 1);
    return pos;
  }

  bool is_permutation() const {
    std::vector<bool> seen(order.size(), false);
    for (std::size_t e : order) {
      if (e >= order.size() || seen[e]) return false;
      seen[e] = true;
    }
    return true;
  }

  friend bool operator==(const RankOrder&, const RankOrder&) = default;
};

/// Descending by score; ties go to the lower entity index.
inline RankOrder rank_order(const std::vector<double>& scores) {
  RankOrder r{std::vector<std::size_t>(scores.size())};
  std::iota(r.order.begin(), r.order.end(), std::size_t{0});
  std::stable_sort(r.order.begin(), r.order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return r;
}

/// Ascending by value (lower mean rank is better); ties go to the lower index.
inline RankOrder rank_ascending(const std::vector<double>& values) {
  RankOrder r{std::vector<std::size_t>(values.size())};
  std::iota(r.order.begin(), r.order.end(), std::size_t{0});
  std::stable_sort(r.order.begin(), r.order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  return r;
}

/// 1-based descending positions where tied scores share the mean of the
/// positions they span. Used when averaging positions over many steps, so
/// that heavily tied steps carry no information about entity index.
inline std::vector<double> tied_positions(const std::vector<double>& scores) {
  const RankOrder r = rank_order(scores);
  std::vector<double> pos(scores.size());
  std::size_t i = 0;
  while (i < r.size()) {
    std::size_t j = i;
    while (j + 1 < r.size() && scores[r.order[j + 1]] == scores[r.order[i]]) ++j;
    const double shared = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) pos[r.order[k]] = shared;
    i = j + 1;
  }
  return pos;
}

/// Running per-entity mean of rank positions.
class MeanRankAccumulator {
 public:
  explicit MeanRankAccumulator(std::size_t n) : sum_(n, 0.0) {}

  void add(const std::vector<double>& positions) {
    for (std::size_t i = 0; i < sum_.size(); ++i) sum_[i] += positions[i];
    ++count_;
  }

  std::size_t count() const { return count_; }

  std::vector<double> mean() const {
    std::vector<double> m(sum_);
    if (count_ > 0)
      for (double& x : m) x /= static_cast<double>(count_);
    return m;
  }

 private:
  std::vector<double> sum_;
  std::size_t count_ = 0;
};

/// Mean position per entity across orders, re-ranked ascending.
inline RankOrder aggregate_mean_rank(const std::vector<RankOrder>& orders) {
  if (orders.empty()) throw std::invalid_argument("aggregate_mean_rank: no rank orders");
  MeanRankAccumulator acc(orders.front().size());
  for (const RankOrder& r : orders) {
    if (r.size() != orders.front().size())
      throw std::invalid_argument("aggregate_mean_rank: entity sets differ");
    acc.add(r.positions());
  }
  return rank_ascending(acc.mean());
}

// ---------------------------------------------------------------------------
// Indicators

/// Relative slack on speed comparisons so that equal nominal speeds which
/// differ only by rounding do not register as leaving the range.
inline constexpr double kSpeedRelTol = 1e-9;

inline int vch_indicator(const VelocityMatrix& v, std::size_t i, std::size_t j) {
  if (j < 1) throw std::invalid_argument("vch_indicator: j must be >= 1");
  double lo = v(0, j - 1), hi = lo;
  for (std::size_t k = 1; k < v.n; ++k) {
    lo = std::min(lo, v(k, j - 1));
    hi = std::max(hi, v(k, j - 1));
  }
  const double s = v(i, j);
  if (s > hi * (1.0 + kSpeedRelTol) && s > hi) return 1;
  if (s < lo * (1.0 - kSpeedRelTol) && s < lo) return -1;
  return 0;
}

inline Point2 position(const Dataset& data, std::size_t i, std::size_t step) {
  return {data(i, 0, step), data(i, 1, step)};
}

inline std::vector<Point2> positions_at(const Dataset& data, std::size_t step) {
  std::vector<Point2> pts(data.entities());
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = position(data, i, step);
  return pts;
}

inline Point2 population_heading(const Dataset& data, std::size_t j) {
  Point2 sum{};
  for (std::size_t k = 0; k < data.entities(); ++k)
    sum = sum + (position(data, k, j) - position(data, k, j - 1));
  return sum;
}

/// +1 when entity i leaves the previous step's hull heading with the group,
/// -1 when it leaves heading away from it, 0 otherwise. `hull` is the hull of
/// all positions at step j-1.
inline int pch_indicator(const Dataset& data, const std::vector<Point2>& hull, std::size_t i,
                         std::size_t j, std::optional<Point2> group_heading = std::nullopt) {
  if (data.dims() != 2) throw std::invalid_argument("pch_indicator: requires m == 2");
  if (j < 1) throw std::invalid_argument("pch_indicator: j must be >= 1");
  if (hull_contains(hull, position(data, i, j))) return 0;
  const Point2 own = position(data, i, j) - position(data, i, j - 1);
  const Point2 group = group_heading ? *group_heading : population_heading(data, j);
  if (norm(own) == 0.0 || norm(group) == 0.0) return 0;
  return dot(own, group) >= 0.0 ? 1 : -1;
}

// ---------------------------------------------------------------------------
// Per-event rankings

enum class Measure { PageRank, Vch, Pch };

inline std::string_view measure_name(Measure m) {
  switch (m) {
    case Measure::PageRank: return "pagerank";
    case Measure::Vch: return "vch";
    case Measure::Pch: return "pch";
  }
  return "?";
}

/// Everything the rankers read. References must outlive the context.
struct RankingContext {
  const Dataset& data;
  const WindowSpec& spec;
  const FollowingNetworkSequence& networks;
  PageRankOptions pagerank{};
  VelocityMatrix velocity = velocity_matrix(data);
};

/// Windows of the pre-coordination interval [pre_start, coord_start). An
/// empty interval falls back to the first coordination window.
inline std::pair<std::size_t, std::size_t> pre_windows(const CoordinationEvent& ev) {
  if (ev.coord_start > ev.pre_start) return {ev.pre_start, ev.coord_start};
  return {ev.coord_start, ev.coord_start + 1};
}

/// Time steps covered by the pre-coordination windows.
inline Interval pre_time_span(const CoordinationEvent& ev, const WindowSpec& spec, std::size_t t) {
  const auto [first, last] = pre_windows(ev);
  return window_span(first, last - 1, spec, t);
}

inline Interval pre_time_span(const RankingContext& ctx, const CoordinationEvent& ev) {
  return pre_time_span(ev, ctx.spec, ctx.data.steps());
}

/// Per-step (or per-window) tied positions over an event's pre-coordination interval.
inline std::vector<std::vector<double>> step_positions(Measure measure, const RankingContext& ctx,
                                                       const CoordinationEvent& ev) {
  std::vector<std::vector<double>> out;
  const std::size_t n = ctx.data.entities();
  switch (measure) {
    case Measure::PageRank: {
      const auto [first, last] = pre_windows(ev);
      for (std::size_t k = first; k < last; ++k)
        out.push_back(tied_positions(pagerank(ctx.networks[k], ctx.pagerank).scores));
      break;
    }
    case Measure::Vch: {
      const Interval span = pre_time_span(ctx, ev);
      std::vector<double> ind(n);
      for (std::size_t j = std::max<std::size_t>(span.begin, 1); j + 1 < span.end; ++j) {
        for (std::size_t i = 0; i < n; ++i) ind[i] = vch_indicator(ctx.velocity, i, j);
        out.push_back(tied_positions(ind));
      }
      break;
    }
    case Measure::Pch: {
      if (ctx.data.dims() != 2) throw ComputeError("position convex hull requires m == 2");
      const Interval span = pre_time_span(ctx, ev);
      std::vector<double> ind(n);
      for (std::size_t j = std::max<std::size_t>(span.begin, 1); j < span.end; ++j) {
        const auto hull = convex_hull_2d(positions_at(ctx.data, j - 1));
        const Point2 heading = population_heading(ctx.data, j);
        for (std::size_t i = 0; i < n; ++i) ind[i] = pch_indicator(ctx.data, hull, i, j, heading);
        out.push_back(tied_positions(ind));
      }
      break;
    }
  }
  if (out.empty()) throw ComputeError("event has no steps to rank");
  return out;
}

/// Aggregated ranking: mean position per entity and the order it induces.
struct EventRanking {
  RankOrder order;
  std::vector<double> mean_rank;
  std::size_t steps = 0;
};

inline EventRanking finish(const MeanRankAccumulator& acc) {
  EventRanking r;
  r.mean_rank = acc.mean();
  r.order = rank_ascending(r.mean_rank);
  r.steps = acc.count();
  return r;
}

inline EventRanking event_ranking(Measure measure, const RankingContext& ctx,
                                  const CoordinationEvent& ev) {
  MeanRankAccumulator acc(ctx.data.entities());
  for (const auto& pos : step_positions(measure, ctx, ev)) acc.add(pos);
  return finish(acc);
}

/// Local rankings for every event plus the global ranking built from all
/// events' per-step positions.
struct MeasureRankings {
  Measure measure = Measure::PageRank;
  std::vector<EventRanking> events;
  EventRanking global;
};

inline MeasureRankings rank_events(Measure measure, const RankingContext& ctx,
                                   const std::vector<CoordinationEvent>& events) {
  if (events.empty()) throw ComputeError("no coordination events to rank");
  MeasureRankings out{measure, {}, {}};
  MeanRankAccumulator global(ctx.data.entities());
  for (const auto& ev : events) {
    MeanRankAccumulator local(ctx.data.entities());
    for (const auto& pos : step_positions(measure, ctx, ev)) {
      local.add(pos);
      global.add(pos);
    }
    out.events.push_back(finish(local));
  }
  out.global = finish(global);
  return out;
}

/// Fraction of events in which each entity holds the given 1-based position.
inline std::vector<double> positional_support(const std::vector<EventRanking>& events,
                                              std::size_t n, std::size_t position = 1) {
  if (events.empty()) throw ComputeError("support needs at least one event");
  std::vector<double> sup(n, 0.0);
  for (const auto& e : events) sup[e.order.order.at(position - 1)] += 1.0;
  for (double& s : sup) s /= static_cast<double>(events.size());
  return sup;
}

inline std::vector<double> support(const std::vector<EventRanking>& events, std::size_t n) {
  return positional_support(events, n, 1);
}

inline std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

/// Entity with the highest support for a position. Equal support goes to the
/// better global mean rank, then to the lower index.
inline std::size_t top_supported(const MeasureRankings& r, std::size_t position = 1) {
  const std::size_t n = r.global.mean_rank.size();
  const auto sup = positional_support(r.events, n, position);
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (sup[i] > sup[best] ||
        (sup[i] == sup[best] && r.global.mean_rank[i] < r.global.mean_rank[best]))
      best = i;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Kendall tau-b

namespace detail {

inline std::int64_t tie_pairs_sorted(const std::vector<double>& v, std::size_t begin,
                                     std::size_t end) {
  std::int64_t total = 0, run = 1;
  for (std::size_t i = begin + 1; i < end; ++i) {
    if (v[i] == v[i - 1]) {
      ++run;
    } else {
      total += run * (run - 1) / 2;
      run = 1;
    }
  }
  return total + run * (run - 1) / 2;
}

// Merge sort on y counting strict inversions.
inline std::int64_t sort_count_inversions(std::vector<double>& y, std::vector<double>& buf,
                                          std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t inv = sort_count_inversions(y, buf, lo, mid) + sort_count_inversions(y, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (y[j] < y[i]) {
      inv += static_cast<std::int64_t>(mid - i);
      buf[k++] = y[j++];
    } else {
      buf[k++] = y[i++];
    }
  }
  while (i < mid) buf[k++] = y[i++];
  while (j < hi) buf[k++] = y[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
            y.begin() + static_cast<std::ptrdiff_t>(lo));
  return inv;
}

}  // namespace detail

/// Tie-corrected Kendall correlation in O(n log n) (Knight's algorithm).
/// When either input is fully tied the coefficient is undefined; two fully
/// tied inputs count as agreeing (1), otherwise 0.
inline double kendall_tau_b(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("kendall_tau_b: size mismatch");
  const std::size_t n = x.size();
  if (n < 2) return 1.0;

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return x[a] != x[b] ? x[a] < x[b] : y[a] < y[b];
  });
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = x[idx[i]];
    ys[i] = y[idx[i]];
  }

  const auto n0 = static_cast<std::int64_t>(n * (n - 1) / 2);
  const std::int64_t n1 = detail::tie_pairs_sorted(xs, 0, n);
  std::int64_t n3 = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && xs[j] == xs[i]) ++j;
    n3 += detail::tie_pairs_sorted(ys, i, j);
    i = j;
  }
  std::vector<double> buf(n);
  const std::int64_t swaps = detail::sort_count_inversions(ys, buf, 0, n);
  const std::int64_t n2 = detail::tie_pairs_sorted(ys, 0, n);

  const std::int64_t ax = n0 - n1, ay = n0 - n2;
  if (ax == 0 || ay == 0) return (ax == 0 && ay == 0) ? 1.0 : 0.0;
  const std::int64_t num = n0 - n1 - n2 + n3 - 2 * swaps;
  return static_cast<double>(num) / std::sqrt(static_cast<double>(ax) * static_cast<double>(ay));
}

inline double kendall_tau(const RankOrder& a, const RankOrder& b) {
  if (a.size() != b.size()) throw std::invalid_argument("kendall_tau: entity sets differ");
  return kendall_tau_b(a.positions(), b.positions());
}

/// Mean Kendall correlation of each event's ranking against the global one.
inline double corr_global_local(const MeasureRankings& r) {
  if (r.events.empty()) throw ComputeError("corr_global_local: no events");
  double sum = 0.0;
  for (const auto& e : r.events) sum += kendall_tau_b(r.global.mean_rank, e.mean_rank);
  return sum / static_cast<double>(r.events.size());
}

/// Mean Kendall correlation between two measures' rankings of the same events.
inline double corr_cross(const MeasureRankings& a, const MeasureRankings& b) {
  if (a.events.empty() || a.events.size() != b.events.size())
    throw ComputeError("corr_cross: event lists differ or are empty");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.events.size(); ++i)
    sum += kendall_tau_b(a.events[i].mean_rank, b.events[i].mean_rank);
  return sum / static_cast<double>(a.events.size());
}

// ---------------------------------------------------------------------------
// Feature vector

struct FeatureVector {
  std::optional<double> corr_p;
  double corr_v = 0.0;
  std::optional<double> corr_p_pr;
  double corr_v_pr = 0.0;
  double max_support_pr = 0.0;

  bool pch_available() const { return corr_p.has_value() && corr_p_pr.has_value(); }

  /// Classifier input; PCH-derived entries are dropped when unavailable.
  std::vector<double> values() const {
    if (pch_available()) return {*corr_p, corr_v, *corr_p_pr, corr_v_pr, max_support_pr};
    return {corr_v, corr_v_pr, max_support_pr};
  }

  static std::vector<std::string> names(bool with_pch) {
    if (with_pch) return {"corr_p", "corr_v", "corr_p_pr", "corr_v_pr", "max_support_pr"};
    return {"corr_v", "corr_v_pr", "max_support_pr"};
  }
};

inline FeatureVector feature_vector(const MeasureRankings& pr, const MeasureRankings& vch,
                                    const MeasureRankings* pch) {
  FeatureVector f;
  f.corr_v = corr_global_local(vch);
  f.corr_v_pr = corr_cross(vch, pr);
  const auto sup = support(pr.events, pr.global.mean_rank.size());
  f.max_support_pr = *std::max_element(sup.begin(), sup.end());
  if (pch != nullptr) {
    f.corr_p = corr_global_local(*pch);
    f.corr_p_pr = corr_cross(*pch, pr);
  }
  return f;
}

inline FeatureVector feature_vector(const RankingContext& ctx,
                                    const std::vector<CoordinationEvent>& events) {
  if (events.empty()) throw ComputeError("feature_vector: no coordination events");
  const auto pr = rank_events(Measure::PageRank, ctx, events);
  const auto vch = rank_events(Measure::Vch, ctx, events);
  if (ctx.data.dims() == 2) {
    const auto pch = rank_events(Measure::Pch, ctx, events);
    return feature_vector(pr, vch, &pch);
  }
  return feature_vector(pr, vch, nullptr);
}

}  // namespace leadership
