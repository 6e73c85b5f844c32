#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "leadership/network.hpp"

namespace leadership {

struct PageRankOptions {
  double damping = 0.85;
  double tol = 1e-9;
  std::size_t max_iter = 200;
};

struct PageRankResult {
  std::vector<double> scores;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Weighted PageRank by power iteration. Each node spreads its mass over its
/// out-edges in proportion to edge weight; nodes without out-edges spread
/// uniformly. Mass therefore accumulates on the nodes being followed.
inline PageRankResult pagerank(const FollowingNetwork& net, const PageRankOptions& opt = {}) {
  if (!(opt.damping > 0.0 && opt.damping < 1.0))
    throw ConfigError("pagerank damping must be in (0, 1)");
  const std::size_t n = net.n;
  const double uniform = 1.0 / static_cast<double>(n);

  std::vector<double> out_weight(n, 0.0);
  for (const Edge& e : net.edges) out_weight[e.follower] += e.weight;

  PageRankResult res;
  std::vector<double> pr(n, uniform), next(n);
  for (res.iterations = 1; res.iterations <= opt.max_iter; ++res.iterations) {
    double dangling = 0.0;
    for (std::size_t v = 0; v < n; ++v)
      if (out_weight[v] <= 0.0) dangling += pr[v];
    const double base = (1.0 - opt.damping) * uniform + opt.damping * dangling * uniform;
    std::fill(next.begin(), next.end(), base);
    for (const Edge& e : net.edges)
      next[e.leader] += opt.damping * pr[e.follower] * e.weight / out_weight[e.follower];

    double change = 0.0;
    for (std::size_t v = 0; v < n; ++v) change += std::abs(next[v] - pr[v]);
    pr.swap(next);
    if (change < opt.tol) {
      res.converged = true;
      break;
    }
  }
  if (res.iterations > opt.max_iter) res.iterations = opt.max_iter;

  double total = 0.0;
  for (double x : pr) total += x;
  for (double& x : pr) x /= total;
  res.scores = std::move(pr);
  return res;
}

/// Sums edge weights over a range of windows into one static network.
inline FollowingNetwork aggregate_network(const FollowingNetworkSequence& seq, std::size_t first,
                                          std::size_t last_exclusive) {
  const std::size_t n = seq.n;
  std::vector<double> w(n * n, 0.0);
  for (std::size_t k = first; k < last_exclusive; ++k)
    for (const Edge& e : seq[k].edges) w[e.follower * n + e.leader] += e.weight;
  FollowingNetwork out{n, {}};
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (w[a * n + b] > 0.0) out.edges.push_back({a, b, w[a * n + b]});
  return out;
}

}  // namespace leadership
