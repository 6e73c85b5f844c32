#pragma once

// Slow, obviously-correct reference implementations used to check the
// library. Nothing here calls into the code under test except for plain
// data types.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <set>
#include <utility>
#include <vector>

#include "leadership/dtw.hpp"
#include "leadership/geometry.hpp"
#include "leadership/network.hpp"

namespace oracle {

using leadership::Point2;
using leadership::SeriesView;

inline double cell(const SeriesView& q, const SeriesView& u, std::size_t i, std::size_t j) {
  double s = 0.0;
  for (std::size_t d = 0; d < q.dims; ++d) {
    const double x = q(d, i) - u(d, j);
    s += x * x;
  }
  return std::sqrt(s);
}

// Exhaustive enumeration of every monotone, contiguous path from (0,0) to
// (L-1,L-1) inside the band. Costs accumulate from the start cell, in path
// order, like a left fold.
inline double dtw_brute_force(const SeriesView& q, const SeriesView& u, std::size_t beta) {
  const std::size_t L = q.length;
  double best = std::numeric_limits<double>::infinity();
  struct Frame {
    std::size_t i, j;
    double cost;
  };
  std::vector<Frame> stack{{0, 0, cell(q, u, 0, 0)}};
  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    if (f.i == L - 1 && f.j == L - 1) {
      best = std::min(best, f.cost);
      continue;
    }
    const std::pair<std::size_t, std::size_t> steps[3] = {{1, 1}, {1, 0}, {0, 1}};
    for (auto [di, dj] : steps) {
      const std::size_t i = f.i + di, j = f.j + dj;
      if (i >= L || j >= L) continue;
      if ((i > j ? i - j : j - i) > beta) continue;
      stack.push_back({i, j, f.cost + cell(q, u, i, j)});
    }
  }
  return best;
}

inline double path_cost(const SeriesView& q, const SeriesView& u, const leadership::WarpingPath& p) {
  double c = 0.0;
  for (auto [i, j] : p.pairs) c += cell(q, u, i, j);
  return c;
}

// Hull vertices via the O(n^3) edge test: (a, b) is a counterclockwise hull
// edge when every other point is strictly left of a->b or on the closed
// segment [a, b]. Exact on integer-valued coordinates.
inline std::set<std::pair<double, double>> hull_vertices(const std::vector<Point2>& pts) {
  std::set<std::pair<double, double>> distinct;
  for (const auto& p : pts) distinct.insert({p.x, p.y});
  if (distinct.size() <= 1) return distinct;
  std::vector<Point2> u;
  for (auto [x, y] : distinct) u.push_back({x, y});

  std::set<std::pair<double, double>> out;
  for (const auto& a : u)
    for (const auto& b : u) {
      if (a == b) continue;
      bool edge = true;
      for (const auto& c : u) {
        if (c == a || c == b) continue;
        const double o = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
        if (o > 0.0) continue;
        if (o == 0.0 && std::min(a.x, b.x) <= c.x && c.x <= std::max(a.x, b.x) &&
            std::min(a.y, b.y) <= c.y && c.y <= std::max(a.y, b.y))
          continue;
        edge = false;
        break;
      }
      if (edge) {
        out.insert({a.x, a.y});
        out.insert({b.x, b.y});
      }
    }
  return out;
}

// Tau-b by enumerating all pairs.
inline double kendall_tau_b(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::int64_t conc = 0, disc = 0, tx = 0, ty = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool ex = x[i] == x[j], ey = y[i] == y[j];
      if (ex) ++tx;
      if (ey) ++ty;
      if (ex || ey) continue;
      if ((x[i] < x[j]) == (y[i] < y[j]))
        ++conc;
      else
        ++disc;
    }
  const auto n0 = static_cast<std::int64_t>(n * (n - 1) / 2);
  const std::int64_t ax = n0 - tx, ay = n0 - ty;
  if (n < 2) return 1.0;
  if (ax == 0 || ay == 0) return (ax == 0 && ay == 0) ? 1.0 : 0.0;
  return static_cast<double>(conc - disc) / std::sqrt(static_cast<double>(ax) * static_cast<double>(ay));
}

// Event detection by direct scan of the above-threshold mask: collect runs,
// merge while the count of below-threshold windows between them is within
// the gap, then walk each start left over strictly rising density.
inline std::vector<leadership::CoordinationEvent> detect_events(const std::vector<double>& d,
                                                                double lambda, std::size_t gap) {
  std::vector<bool> above(d.size());
  for (std::size_t k = 0; k < d.size(); ++k) above[k] = d[k] > lambda;

  std::vector<std::pair<std::size_t, std::size_t>> runs;
  std::size_t k = 0;
  while (k < d.size()) {
    if (!above[k]) {
      ++k;
      continue;
    }
    std::size_t e = k;
    while (e + 1 < d.size() && above[e + 1]) ++e;
    runs.emplace_back(k, e);
    k = e + 1;
  }

  std::vector<std::pair<std::size_t, std::size_t>> merged;
  for (const auto& r : runs) {
    if (!merged.empty()) {
      std::size_t below = 0;
      for (std::size_t q = merged.back().second + 1; q < r.first; ++q) below += above[q] ? 0 : 1;
      if (below <= gap) {
        merged.back().second = r.second;
        continue;
      }
    }
    merged.push_back(r);
  }

  std::vector<leadership::CoordinationEvent> out;
  for (const auto& [j, l] : merged) {
    const std::size_t floor = out.empty() ? 0 : out.back().coord_end + 1;
    std::size_t i = j;
    while (i > floor && d[i] > d[i - 1]) --i;
    out.push_back({i, j, l});
  }
  return out;
}

// Nearest-rank percentile: smallest value with at least p% of the data at or below it.
inline double nearest_rank(std::vector<double> d, double p) {
  std::sort(d.begin(), d.end());
  for (std::size_t r = 1; r <= d.size(); ++r)
    if (static_cast<double>(r) * 100.0 >= p * static_cast<double>(d.size())) return d[r - 1];
  return d.back();
}

}  // namespace oracle
