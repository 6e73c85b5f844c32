#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "leadership/dataset.hpp"

namespace leadership {

/// Read-only view of an m x L multidimensional subsequence. Dimension d,
/// element k lives at base[d * stride + k].
struct SeriesView {
  const double* base = nullptr;
  std::size_t stride = 0;
  std::size_t dims = 0;
  std::size_t length = 0;

  double operator()(std::size_t d, std::size_t k) const { return base[d * stride + k]; }

  /// Single-dimension view over a contiguous vector.
  static SeriesView of(const std::vector<double>& v) { return {v.data(), v.size(), 1, v.size()}; }

  /// Entity's observations restricted to a time interval.
  static SeriesView of(const Dataset& data, std::size_t entity, Interval span) {
    return {data.series(entity, 0).data() + span.begin, data.steps(), data.dims(), span.size()};
  }
};

struct WarpingPath {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  friend bool operator==(const WarpingPath&, const WarpingPath&) = default;
};

struct DtwResult {
  double cost = 0.0;
  WarpingPath path;
};

/// Euclidean distance across dimensions between q[:, i] and u[:, j].
inline double cell_distance(const SeriesView& q, const SeriesView& u, std::size_t i,
                            std::size_t j) {
  double sq = 0.0;
  for (std::size_t d = 0; d < q.dims; ++d) {
    const double diff = q(d, i) - u(d, j);
    sq += diff * diff;
  }
  return std::sqrt(sq);
}

/// Banded cumulative-cost matrix for DTW_D. Reusable across calls to avoid
/// reallocating on every window.
class DtwWorkspace {
 public:
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  /// Fills the band and returns the optimal cumulative cost.
  double fill(const SeriesView& q, const SeriesView& u, std::size_t beta) {
    if (q.length != u.length) throw std::invalid_argument("dtw: subsequence lengths differ");
    if (q.dims != u.dims) throw std::invalid_argument("dtw: dimension counts differ");
    if (q.length < 2) throw std::invalid_argument("dtw: subsequence length must be >= 2");
    if (beta < 1) throw std::invalid_argument("dtw: band must be >= 1");

    len_ = q.length;
    beta_ = std::min(beta, len_ - 1);
    width_ = 2 * beta_ + 1;
    acc_.assign(len_ * width_, kInf);

    for (std::size_t i = 0; i < len_; ++i) {
      const std::size_t lo = i > beta_ ? i - beta_ : 0;
      const std::size_t hi = std::min(len_ - 1, i + beta_);
      for (std::size_t j = lo; j <= hi; ++j) {
        const double c = cell_distance(q, u, i, j);
        if (i == 0 && j == 0) {
          at(0, 0) = c;
          continue;
        }
        double best = kInf;
        if (i > 0 && j > 0) best = get(i - 1, j - 1);
        if (i > 0) best = std::min(best, get(i - 1, j));
        if (j > 0) best = std::min(best, get(i, j - 1));
        at(i, j) = c + best;
      }
    }
    return get(len_ - 1, len_ - 1);
  }

  /// Walks the optimal path back from the end, calling visit(i, j) for every
  /// cell (end to start). Ties prefer diagonal, then vertical, then horizontal.
  template <typename Visit>
  void backtrack(Visit&& visit) const {
    std::size_t i = len_ - 1, j = len_ - 1;
    visit(i, j);
    while (i > 0 || j > 0) {
      std::size_t ni = i, nj = j;
      double best = kInf;
      if (i > 0 && j > 0) {
        best = get(i - 1, j - 1);
        ni = i - 1;
        nj = j - 1;
      }
      if (i > 0 && get(i - 1, j) < best) {
        best = get(i - 1, j);
        ni = i - 1;
        nj = j;
      }
      if (j > 0 && get(i, j - 1) < best) {
        best = get(i, j - 1);
        ni = i;
        nj = j - 1;
      }
      i = ni;
      j = nj;
      assert((i > j ? i - j : j - i) <= beta_);
      visit(i, j);
    }
  }

  double get(std::size_t i, std::size_t j) const {
    const std::size_t off = j + beta_;
    if (off < i || off - i >= width_) return kInf;
    return acc_[i * width_ + (off - i)];
  }

 private:
  double& at(std::size_t i, std::size_t j) { return acc_[i * width_ + (j + beta_ - i)]; }

  std::size_t len_ = 0;
  std::size_t beta_ = 0;
  std::size_t width_ = 0;
  std::vector<double> acc_;
};

/// Multidimensional dependent DTW under a Sakoe-Chiba band |j - i| <= beta.
/// Path pairs are (index into q, index into u), from (0,0) to (L-1,L-1).
inline DtwResult dtw_d(const SeriesView& q, const SeriesView& u, std::size_t beta) {
  DtwWorkspace ws;
  DtwResult out;
  out.cost = ws.fill(q, u, beta);
  ws.backtrack([&](std::size_t i, std::size_t j) { out.path.pairs.emplace_back(i, j); });
  std::reverse(out.path.pairs.begin(), out.path.pairs.end());
  return out;
}

inline int sign_of(long v) { return (v > 0) - (v < 0); }

/// Mean of sign(j - i) over the path. Positive when the second series' matched
/// index runs ahead of the first's, i.e. the second series lags (follows) the first.
inline double signed_path_score(const WarpingPath& path) {
  if (path.pairs.empty()) throw std::invalid_argument("signed_path_score: empty path");
  long total = 0;
  for (auto [i, j] : path.pairs) total += sign_of(static_cast<long>(j) - static_cast<long>(i));
  return static_cast<double>(total) / static_cast<double>(path.pairs.size());
}

inline WarpingPath transpose(const WarpingPath& path) {
  WarpingPath out;
  out.pairs.reserve(path.pairs.size());
  for (auto [i, j] : path.pairs) out.pairs.emplace_back(j, i);
  return out;
}

inline std::size_t pair_count(std::size_t n) { return n * (n - 1) / 2; }

/// Index of unordered pair (a, b), a < b, in row-major upper-triangle order.
inline std::size_t pair_index(std::size_t a, std::size_t b, std::size_t n) {
  return a * n - a * (a + 1) / 2 + (b - a - 1);
}

/// Windowed follow scores for every unordered entity pair.
///
/// follows(k, a, b) > 0 means a follows b in window k. Only one DTW is run per
/// unordered pair, so follows(k, a, b) == -follows(k, b, a) holds exactly.
class FollowScores {
 public:
  FollowScores() = default;
  FollowScores(std::size_t n, std::size_t windows)
      : n_(n), windows_(windows), values_(windows * pair_count(n), 0.0) {}

  std::size_t entities() const { return n_; }
  std::size_t windows() const { return windows_; }

  double follows(std::size_t k, std::size_t a, std::size_t b) const {
    if (a == b) return 0.0;
    if (a < b) return values_[k * pair_count(n_) + pair_index(a, b, n_)];
    return -values_[k * pair_count(n_) + pair_index(b, a, n_)];
  }

  /// Sets the score for a < b.
  void set(std::size_t k, std::size_t a, std::size_t b, double a_follows_b) {
    values_[k * pair_count(n_) + pair_index(a, b, n_)] = a_follows_b;
  }

 private:
  std::size_t n_ = 0;
  std::size_t windows_ = 0;
  std::vector<double> values_;
};

/// Score for "a follows b" on one window. The path runs over (a, b), so a
/// positive signed score means b lags a; negate it.
inline double follow_score(DtwWorkspace& ws, const SeriesView& a, const SeriesView& b,
                           std::size_t beta) {
  ws.fill(a, b, beta);
  long total = 0;
  std::size_t count = 0;
  ws.backtrack([&](std::size_t i, std::size_t j) {
    total += sign_of(static_cast<long>(j) - static_cast<long>(i));
    ++count;
  });
  return -static_cast<double>(total) / static_cast<double>(count);
}

inline FollowScores pairwise_follow_scores(const Dataset& data, const WindowSpec& spec) {
  spec.validate();
  const std::size_t n = data.entities();
  const std::size_t windows = window_count(spec, data.steps());
  FollowScores scores(n, windows);
  DtwWorkspace ws;
  for (std::size_t k = 0; k < windows; ++k) {
    const Interval span = window_interval(k, spec, data.steps());
    for (std::size_t a = 0; a < n; ++a) {
      const SeriesView va = SeriesView::of(data, a, span);
      for (std::size_t b = a + 1; b < n; ++b) {
        scores.set(k, a, b, follow_score(ws, va, SeriesView::of(data, b, span), spec.beta));
      }
    }
  }
  return scores;
}

}  // namespace leadership
