#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "leadership/dtw.hpp"
#include "oracles.hpp"

using namespace leadership;

namespace {

Dataset make(std::size_t n, std::size_t m, std::size_t t, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Dataset d = Dataset::zeros(n, m, t);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < m; ++k) {
      double x = 0.0;
      for (std::size_t s = 0; s < t; ++s) d(i, k, s) = x += g(rng);
    }
  return d;
}

bool well_formed(const WarpingPath& p, std::size_t L, std::size_t beta) {
  if (p.pairs.empty() || p.pairs.front() != std::pair<std::size_t, std::size_t>{0, 0}) return false;
  if (p.pairs.back() != std::pair<std::size_t, std::size_t>{L - 1, L - 1}) return false;
  for (std::size_t k = 0; k < p.pairs.size(); ++k) {
    const auto [i, j] = p.pairs[k];
    if ((i > j ? i - j : j - i) > beta) return false;
    if (k == 0) continue;
    const auto [pi, pj] = p.pairs[k - 1];
    const std::size_t di = i - pi, dj = j - pj;
    if (i < pi || j < pj || di > 1 || dj > 1 || di + dj == 0) return false;
  }
  return true;
}

}  // namespace

TEST(Windows, IntervalsAndCount) {
  const WindowSpec s{4, 2, 1};
  EXPECT_EQ(window_interval(0, s, 10), (Interval{0, 4}));
  EXPECT_EQ(window_interval(3, s, 10), (Interval{6, 10}));
  EXPECT_THROW(window_interval(4, s, 10), std::out_of_range);
  EXPECT_EQ(window_count(s, 10), 4u);
  EXPECT_EQ(window_count(s, 3), 0u);
  EXPECT_EQ(window_count(WindowSpec{40, 10, 10}, 100), 7u);
}

TEST(Windows, SpecValidation) {
  EXPECT_THROW((WindowSpec{1, 1, 1}.validate()), ConfigError);
  EXPECT_THROW((WindowSpec{4, 5, 1}.validate()), ConfigError);
  EXPECT_THROW((WindowSpec{4, 0, 1}.validate()), ConfigError);
  EXPECT_THROW((WindowSpec{4, 2, 0}.validate()), ConfigError);
  EXPECT_THROW((WindowSpec{4, 2, 5}.validate()), ConfigError);
  EXPECT_NO_THROW((WindowSpec{4, 4, 4}.validate()));
}

TEST(Dtw, IdenticalSeriesGiveZeroCostDiagonal) {
  const std::vector<double> q{3, 1, 4, 1, 5, 9, 2, 6};
  const auto r = dtw_d(SeriesView::of(q), SeriesView::of(q), 3);
  EXPECT_EQ(r.cost, 0.0);
  ASSERT_EQ(r.path.pairs.size(), q.size());
  for (std::size_t k = 0; k < q.size(); ++k) EXPECT_EQ(r.path.pairs[k], std::make_pair(k, k));
  EXPECT_EQ(signed_path_score(r.path), 0.0);
}

TEST(Dtw, ShiftedRampAlignsAtZeroCost) {
  const std::vector<double> q{0, 0, 1, 2, 3}, u{0, 1, 2, 3, 3};
  const auto r = dtw_d(SeriesView::of(q), SeriesView::of(u), 2);
  EXPECT_EQ(r.cost, 0.0);
  EXPECT_EQ(r.cost, oracle::dtw_brute_force(SeriesView::of(q), SeriesView::of(u), 2));
  // q runs one step behind u: q[i + 1] is matched with u[i].
  for (std::size_t k = 1; k + 1 < r.path.pairs.size(); ++k)
    EXPECT_EQ(r.path.pairs[k].first, r.path.pairs[k].second + 1);
  EXPECT_LT(signed_path_score(r.path), 0.0);
}

TEST(Dtw, NarrowBandCostsMoreWhenShiftExceedsIt) {
  const std::vector<double> a{0, 0, 0, 0, 1, 2, 3, 4, 5, 5};
  const std::vector<double> b{0, 1, 2, 3, 4, 5, 5, 5, 5, 5};
  const auto va = SeriesView::of(a), vb = SeriesView::of(b);
  const double narrow = dtw_d(va, vb, 1).cost, wide = dtw_d(va, vb, 3).cost;
  EXPECT_GT(narrow, wide);
  EXPECT_EQ(narrow, oracle::dtw_brute_force(va, vb, 1));
  EXPECT_EQ(wide, oracle::dtw_brute_force(va, vb, 3));
}

TEST(Dtw, Preconditions) {
  const std::vector<double> a{1, 2, 3}, b{1, 2}, c{1};
  EXPECT_THROW(dtw_d(SeriesView::of(a), SeriesView::of(b), 1), std::invalid_argument);
  EXPECT_THROW(dtw_d(SeriesView::of(c), SeriesView::of(c), 1), std::invalid_argument);
  EXPECT_THROW(dtw_d(SeriesView::of(a), SeriesView::of(a), 0), std::invalid_argument);
}

TEST(Dtw, MatchesBruteForceOnSmallSeries) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::size_t> len(2, 8), dims(1, 3);
  std::uniform_int_distribution<int> small(-2, 2);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int c = 0; c < 1000; ++c) {
    const std::size_t L = len(rng), m = dims(rng);
    std::uniform_int_distribution<std::size_t> band(1, L);
    const std::size_t beta = band(rng);
    // Half the cases use small integers so that ties are common.
    std::vector<double> q(m * L), u(m * L);
    for (auto* v : {&q, &u})
      for (double& x : *v) x = c % 2 == 0 ? small(rng) : g(rng);
    const SeriesView vq{q.data(), L, m, L}, vu{u.data(), L, m, L};
    const auto r = dtw_d(vq, vu, beta);
    ASSERT_EQ(r.cost, oracle::dtw_brute_force(vq, vu, beta)) << "case " << c;
    ASSERT_TRUE(well_formed(r.path, L, beta)) << "case " << c;
    ASSERT_EQ(oracle::path_cost(vq, vu, r.path), r.cost) << "case " << c;
  }
}

TEST(Dtw, CostNonIncreasingInBand) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int c = 0; c < 200; ++c) {
    std::vector<double> a(30), b(30);
    for (double& x : a) x = g(rng);
    for (double& x : b) x = g(rng);
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t beta = 1; beta <= 30; ++beta) {
      const double cost = dtw_d(SeriesView::of(a), SeriesView::of(b), beta).cost;
      EXPECT_LE(cost, prev);
      prev = cost;
    }
  }
}

TEST(SignedScore, Arithmetic) {
  WarpingPath p{{{0, 0}, {0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 4}}};
  EXPECT_DOUBLE_EQ(signed_path_score(p), 4.0 / 6.0);
  EXPECT_EQ(signed_path_score(transpose(p)), -signed_path_score(p));
  EXPECT_THROW(signed_path_score(WarpingPath{}), std::invalid_argument);
}

TEST(SignedScore, BoundedAndZeroWhenBalanced) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int c = 0; c < 300; ++c) {
    std::vector<double> a(12), b(12);
    for (double& x : a) x = g(rng);
    for (double& x : b) x = g(rng);
    const auto path = dtw_d(SeriesView::of(a), SeriesView::of(b), 4).path;
    const double s = signed_path_score(path);
    EXPECT_GE(s, -1.0);
    EXPECT_LE(s, 1.0);
    long above = 0, below = 0;
    for (auto [i, j] : path.pairs) {
      above += j > i;
      below += j < i;
    }
    EXPECT_EQ(s == 0.0, above == below);
  }
}

TEST(FollowScores, ConstantDatasetScoresZero) {
  Dataset d = Dataset::zeros(4, 2, 60);
  const auto s = pairwise_follow_scores(d, {20, 10, 5});
  for (std::size_t k = 0; k < s.windows(); ++k)
    for (std::size_t a = 0; a < 4; ++a)
      for (std::size_t b = 0; b < 4; ++b) EXPECT_EQ(s.follows(k, a, b), 0.0);
}

TEST(FollowScores, LaggedReplayFollows) {
  // b replays a's ramp two steps later.
  const std::size_t t = 30;
  Dataset d = Dataset::zeros(2, 1, t);
  for (std::size_t s = 0; s < t; ++s) {
    d(0, 0, s) = s >= 10 && s < 20 ? static_cast<double>(s - 10) : (s >= 20 ? 10.0 : 0.0);
    d(1, 0, s) = s >= 2 ? d(0, 0, s - 2) : 0.0;
  }
  const WindowSpec spec{16, 2, 3};
  const auto sc = pairwise_follow_scores(d, spec);
  bool any = false;
  for (std::size_t k = 0; k < sc.windows(); ++k) {
    const Interval w = window_interval(k, spec, t);
    if (w.begin <= 10 && w.end >= 22) {
      EXPECT_GT(sc.follows(k, 1, 0), 0.0) << "window " << k;
      any = true;
    }
  }
  EXPECT_TRUE(any);
}

TEST(FollowScores, PairCountAndAntisymmetry) {
  std::mt19937_64 rng(9);
  for (std::size_t n : {2u, 3u, 7u}) {
    const Dataset d = make(n, 2, 80, rng);
    const WindowSpec spec{20, 5, 4};
    const auto sc = pairwise_follow_scores(d, spec);
    EXPECT_EQ(pair_count(n), n * (n - 1) / 2);
    EXPECT_EQ(sc.windows(), window_count(spec, 80));
    for (std::size_t k = 0; k < sc.windows(); ++k) {
      const Interval w = window_interval(k, spec, 80);
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
          ASSERT_EQ(sc.follows(k, a, b), -sc.follows(k, b, a));
          if (a < b) {
            // a follows b exactly when the (a, b) path runs below the diagonal.
            const auto p = dtw_d(SeriesView::of(d, a, w), SeriesView::of(d, b, w), spec.beta).path;
            ASSERT_EQ(sc.follows(k, a, b), -signed_path_score(p));
          }
        }
    }
  }
}

TEST(Velocity, Examples) {
  Dataset d = Dataset::zeros(3, 2, 3);
  d(1, 0, 1) = 3;
  d(1, 1, 1) = 4;
  d(1, 0, 2) = 3;
  d(1, 1, 2) = 4;
  const auto v = velocity_matrix(d);
  EXPECT_EQ(v(0, 0), 0.0);
  EXPECT_EQ(v(0, 1), 0.0);
  EXPECT_EQ(v(1, 0), 5.0);
  EXPECT_EQ(v(1, 1), 0.0);

  Dataset p(std::vector<std::string>{"a", "b"}, 1, 3, {10, 12, 11, 0, 0, 0});
  const auto vp = velocity_matrix(p);
  EXPECT_EQ(vp(0, 0), 2.0);
  EXPECT_EQ(vp(0, 1), 1.0);

  Dataset h(std::vector<std::string>{"a", "b"}, 1, 2, {0, 4, 0, 0}, 2.0);
  EXPECT_EQ(velocity_matrix(h)(0, 0), 2.0);
}

TEST(DatasetInvariants, RejectsBadShapes) {
  EXPECT_THROW(Dataset(std::vector<std::string>{"a"}, 1, 2, {0, 0}), IngestError);
  EXPECT_THROW(Dataset(std::vector<std::string>{"a", "b"}, 1, 1, {0, 0}), IngestError);
  EXPECT_THROW(Dataset(std::vector<std::string>{"a", "b"}, 1, 2, {0, 0, 0}), IngestError);
  EXPECT_THROW(Dataset(std::vector<std::string>{"a", "b"}, 1, 2, {0, 0, 0, std::nan("")}), IngestError);
}
