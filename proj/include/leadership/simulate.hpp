#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "leadership/dataset.hpp"
#include "leadership/geometry.hpp"

namespace leadership {

enum class Model { DM, HM, LT, Random, RotatingDM };

inline std::string model_name(Model m) {
  switch (m) {
    case Model::DM: return "DM";
    case Model::HM: return "HM";
    case Model::LT: return "LT";
    case Model::Random: return "Random";
    case Model::RotatingDM: return "RotatingDM";
  }
  return "?";
}

inline Model parse_model(const std::string& s) {
  if (s == "DM") return Model::DM;
  if (s == "HM") return Model::HM;
  if (s == "LT") return Model::LT;
  if (s == "Random") return Model::Random;
  if (s == "RotatingDM") return Model::RotatingDM;
  throw ConfigError("unknown model '" + s + "'");
}

struct SimConfig {
  Model model = Model::DM;
  std::size_t kappa = 3;  // LT nearest neighbours
  double rho = 0.25;      // LT activation fraction
  std::size_t n = 20;
  std::size_t events = 20;
  std::size_t pre_len = 200;
  std::size_t coord_len = 200;
  std::size_t post_len = 200;
  double leader_speed = 1.0;
  double heading_noise_sigma = 0.1;
  std::optional<std::size_t> lag_max;  // default pre_len / 2
  double circle_radius = 10.0;
  std::uint64_t seed = 0;

  // Cohesion during coordination: a follower farther than its own trailing
  // distance (uniform in [leader_speed, trail_gap_max]) from its target speeds
  // up to at most catchup_factor * leader_speed.
  double catchup_factor = 1.5;
  double trail_gap_max = 3.0;
  // Post-coordination braking: per step, velocity is scaled by U[decel_min, 1).
  double decel_min = 0.5;

  // HM structure: chain of ranked individuals and follower allocation.
  std::size_t hm_ranks = 4;
  std::optional<std::size_t> hm_lag;  // default pre_len / 10
  std::vector<double> hm_proportions{0.4, 0.3, 0.2, 0.1};

  std::size_t effective_lag_max() const { return lag_max.value_or(pre_len / 2); }
  std::size_t effective_hm_lag() const { return hm_lag.value_or(std::max<std::size_t>(1, pre_len / 10)); }
  std::size_t event_len() const { return pre_len + coord_len + post_len; }
  std::size_t total_steps() const { return events * event_len(); }

  std::string label() const {
    if (model != Model::LT) return model_name(model);
    return "LT_" + std::to_string(kappa) + "_" +
           std::to_string(static_cast<int>(std::lround(rho * 100.0)));
  }

  void validate() const {
    if (n < 2) throw ConfigError("simulation needs n >= 2");
    if (events < 1 || pre_len < 1 || coord_len < 1 || post_len < 1)
      throw ConfigError("event count and interval lengths must be >= 1");
    if (effective_lag_max() >= pre_len) throw ConfigError("lag_max must be < pre_len");
    if (!(leader_speed > 0.0)) throw ConfigError("leader_speed must be positive");
    if (heading_noise_sigma < 0.0) throw ConfigError("heading_noise_sigma must be >= 0");
    if (!(circle_radius > 0.0)) throw ConfigError("circle_radius must be positive");
    if (!(catchup_factor >= 1.0)) throw ConfigError("catchup_factor must be >= 1");
    if (!(trail_gap_max >= leader_speed)) throw ConfigError("trail_gap_max must be >= leader_speed");
    if (!(decel_min >= 0.0 && decel_min < 1.0)) throw ConfigError("decel_min must be in [0, 1)");
    if (model == Model::LT) {
      if (!(rho > 0.0 && rho <= 1.0)) throw ConfigError("rho must be in (0, 1]");
      if (kappa < 1 || kappa >= n) throw ConfigError("kappa must be in [1, n)");
    }
    if (model == Model::HM) {
      if (hm_ranks < 2 || hm_ranks > n) throw ConfigError("hm_ranks must be in [2, n]");
      if (hm_proportions.size() != hm_ranks)
        throw ConfigError("hm_proportions needs one entry per rank");
      if ((hm_ranks - 1) * effective_hm_lag() >= pre_len)
        throw ConfigError("HM chain does not fit in the pre-coordination interval");
    }
  }
};

/// Ground truth for one scheduled event, in time steps.
struct EventTruth {
  std::size_t pre_start = 0;
  std::size_t coord_start = 0;
  std::size_t post_start = 0;
  std::size_t end = 0;
  std::size_t leader = 0;
  std::vector<std::size_t> ranks;            // HM: ids of ranks 1..hm_ranks
  std::vector<std::size_t> departure;        // per individual, steps after pre_start
};

struct Trial {
  SimConfig config;
  Dataset dataset;
  std::vector<EventTruth> truth;
};

namespace detail {

inline Point2 unit(double angle) { return {std::cos(angle), std::sin(angle)}; }

inline double heading_to(Point2 from, Point2 to) {
  const Point2 d = to - from;
  return std::atan2(d.y, d.x);
}

// Integer counts per proportion by largest remainder, summing to total.
inline std::vector<std::size_t> allocate(const std::vector<double>& props, std::size_t total) {
  const double sum = std::accumulate(props.begin(), props.end(), 0.0);
  std::vector<std::size_t> counts(props.size());
  std::vector<std::pair<double, std::size_t>> rem;
  std::size_t used = 0;
  for (std::size_t r = 0; r < props.size(); ++r) {
    const double exact = props[r] / sum * static_cast<double>(total);
    counts[r] = static_cast<std::size_t>(std::floor(exact));
    used += counts[r];
    rem.emplace_back(exact - std::floor(exact), r);
  }
  std::stable_sort(rem.begin(), rem.end(), [](auto a, auto b) { return a.first > b.first; });
  for (std::size_t k = 0; used < total; ++k, ++used) ++counts[rem[k % rem.size()].second];
  return counts;
}

class Simulator {
 public:
  explicit Simulator(const SimConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {}

  Trial run() {
    cfg_.validate();
    const std::size_t n = cfg_.n, T = cfg_.total_steps();
    pos_.resize(n);
    for (auto& p : pos_) {
      const double r = cfg_.circle_radius * std::sqrt(uniform(0.0, 1.0));
      const double a = uniform(0.0, 2.0 * std::numbers::pi);
      p = {r * std::cos(a), r * std::sin(a)};
    }

    fixed_leader_ = cfg_.model == Model::Random ? 0 : pick(n);
    if (cfg_.model == Model::HM) {
      std::vector<std::size_t> ids(n);
      std::iota(ids.begin(), ids.end(), std::size_t{0});
      std::shuffle(ids.begin(), ids.end(), rng_);
      hm_ranks_.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(cfg_.hm_ranks));
      fixed_leader_ = hm_ranks_.front();
    }

    std::vector<double> values(n * 2 * T);
    auto record = [&](std::size_t step) {
      for (std::size_t i = 0; i < n; ++i) {
        values[(i * 2 + 0) * T + step] = pos_[i].x;
        values[(i * 2 + 1) * T + step] = pos_[i].y;
      }
    };

    Trial trial;
    trial.config = cfg_;
    record(0);
    for (std::size_t e = 0; e < cfg_.events; ++e) {
      const std::size_t t0 = e * cfg_.event_len();
      trial.truth.push_back(begin_event(e, t0));
      for (std::size_t s = 0; s < cfg_.event_len(); ++s) {
        const std::size_t step = t0 + s;
        if (step + 1 >= T) break;
        advance(s, trial.truth.back());
        record(step + 1);
      }
    }

    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back(std::to_string(i));
    trial.dataset = Dataset(std::move(ids), 2, T, std::move(values));
    return trial;
  }

 private:
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  std::size_t lag(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, std::max(lo, hi))(rng_);
  }
  double noise() {
    if (cfg_.heading_noise_sigma <= 0.0) return 0.0;
    return std::normal_distribution<double>(0.0, cfg_.heading_noise_sigma)(rng_);
  }
  bool coin(double p) { return std::bernoulli_distribution(p)(rng_); }

  EventTruth begin_event(std::size_t e, std::size_t t0) {
    const std::size_t n = cfg_.n;
    EventTruth truth{t0, t0 + cfg_.pre_len, t0 + cfg_.pre_len + cfg_.coord_len, t0 + cfg_.event_len(),
                     fixed_leader_, {}, std::vector<std::size_t>(n, 0)};
    if (cfg_.model == Model::RotatingDM) truth.leader = e % n;

    leader_dir_ = uniform(0.0, 2.0 * std::numbers::pi);
    target_.assign(n, truth.leader);
    moving_.assign(n, false);
    speed_.assign(n, cfg_.leader_speed);
    vel_.assign(n, Point2{});
    trail_.resize(n);
    for (auto& g : trail_) g = uniform(cfg_.leader_speed, cfg_.trail_gap_max);

    const std::size_t lag_max = cfg_.effective_lag_max();
    switch (cfg_.model) {
      case Model::DM:
      case Model::RotatingDM:
        for (std::size_t i = 0; i < n; ++i)
          truth.departure[i] = i == truth.leader ? 0 : lag(1, lag_max);
        break;
      case Model::HM: {
        truth.ranks = hm_ranks_;
        const std::size_t step = cfg_.effective_hm_lag();
        for (std::size_t r = 0; r < hm_ranks_.size(); ++r) {
          truth.departure[hm_ranks_[r]] = r * step;
          if (r > 0) target_[hm_ranks_[r]] = hm_ranks_[r - 1];
        }
        std::vector<std::size_t> rest;
        for (std::size_t i = 0; i < n; ++i)
          if (std::find(hm_ranks_.begin(), hm_ranks_.end(), i) == hm_ranks_.end()) rest.push_back(i);
        std::shuffle(rest.begin(), rest.end(), rng_);
        // Followers leave only once the whole ranked chain is under way.
        const auto counts = allocate(cfg_.hm_proportions, rest.size());
        const std::size_t base = truth.departure[hm_ranks_.back()] + 1;
        std::size_t k = 0;
        for (std::size_t r = 0; r < counts.size(); ++r) {
          for (std::size_t c = 0; c < counts[r]; ++c, ++k) {
            const std::size_t who = rest[k];
            target_[who] = hm_ranks_[r];
            truth.departure[who] = std::min(base + lag(0, lag_max - 1), cfg_.pre_len - 1);
          }
        }
        break;
      }
      case Model::LT:
        // Non-leaders each start moving with probability 0.5; the leader and
        // everyone else must then be activated through their neighbourhood.
        for (std::size_t i = 0; i < n; ++i) {
          if (i != truth.leader && coin(0.5)) {
            moving_[i] = true;
            truth.departure[i] = 0;
          } else {
            truth.departure[i] = cfg_.pre_len;
          }
        }
        break;
      case Model::Random: {
        Point2 centre{};
        for (const auto& p : pos_) centre = centre + p;
        centre = {centre.x / static_cast<double>(n), centre.y / static_cast<double>(n)};
        const double r = 2.0 * cfg_.circle_radius * std::sqrt(uniform(0.0, 1.0));
        const double a = uniform(0.0, 2.0 * std::numbers::pi);
        destination_ = centre + Point2{r * std::cos(a), r * std::sin(a)};
        for (std::size_t i = 0; i < n; ++i) {
          truth.departure[i] = lag(0, lag_max);
          speed_[i] = cfg_.leader_speed * uniform(0.5, 1.5);
        }
        break;
      }
    }
    return truth;
  }

  // Moves toward a point at the given speed, without overshooting it.
  Point2 pursue(std::size_t i, Point2 goal, double speed) {
    const double dist = norm(goal - pos_[i]);
    if (dist <= 0.0) return {};
    const double step = std::min(speed, dist);
    return step * unit(heading_to(pos_[i], goal) + noise());
  }

  void lt_activate(std::size_t s, EventTruth& truth) {
    const std::size_t n = cfg_.n;
    std::vector<std::size_t> newly;
    std::vector<std::pair<double, std::size_t>> dist(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
      if (moving_[i]) continue;
      std::size_t k = 0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) dist[k++] = {norm(pos_[j] - pos_[i]), j};
      std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(cfg_.kappa),
                        dist.end());
      std::size_t active = 0;
      for (std::size_t q = 0; q < cfg_.kappa; ++q) active += moving_[dist[q].second] ? 1 : 0;
      const double frac = static_cast<double>(active) / static_cast<double>(cfg_.kappa);
      if (frac >= cfg_.rho && coin(0.5)) newly.push_back(i);
    }
    for (std::size_t i : newly) {
      moving_[i] = true;
      truth.departure[i] = s;
    }
  }

  void advance(std::size_t s, EventTruth& truth) {
    const std::size_t n = cfg_.n;
    const std::size_t active_len = cfg_.pre_len + cfg_.coord_len;
    std::vector<Point2> next_vel(n);

    if (s < active_len) {
      if (cfg_.model == Model::LT && s > 0) lt_activate(s, truth);
      if (s == cfg_.pre_len && cfg_.model != Model::Random) {
        // coordination: the whole population moves
        for (std::size_t i = 0; i < n; ++i) {
          if (cfg_.model == Model::LT && !moving_[i]) truth.departure[i] = s;
          moving_[i] = true;
        }
      }
      for (std::size_t i = 0; i < n; ++i) {
        const bool started = cfg_.model == Model::LT ? moving_[i] : s >= truth.departure[i];
        if (!started) continue;
        if (cfg_.model == Model::Random)
          next_vel[i] = pursue(i, destination_, speed_[i]);
        else if (i == truth.leader)
          next_vel[i] = cfg_.leader_speed * unit(leader_dir_);
        else {
          double sp = speed_[i];
          if (s >= cfg_.pre_len) {
            const double gap = norm(pos_[target_[i]] - pos_[i]);
            sp = std::min(cfg_.catchup_factor * sp, std::max(sp, gap - trail_[i]));
          }
          next_vel[i] = pursue(i, pos_[target_[i]], sp);
        }
      }
      vel_ = next_vel;
    } else {
      // post-coordination: random braking until stopped
      for (std::size_t i = 0; i < n; ++i) {
        vel_[i] = uniform(cfg_.decel_min, 1.0) * vel_[i];
        if (norm(vel_[i]) < 1e-3 * cfg_.leader_speed) vel_[i] = {};
        next_vel[i] = vel_[i];
      }
    }
    for (std::size_t i = 0; i < n; ++i) pos_[i] = pos_[i] + next_vel[i];
  }

  SimConfig cfg_;
  std::mt19937_64 rng_;
  std::vector<Point2> pos_;
  std::size_t fixed_leader_ = 0;
  std::vector<std::size_t> hm_ranks_;

  double leader_dir_ = 0.0;
  Point2 destination_{};
  std::vector<std::size_t> target_;
  std::vector<bool> moving_;
  std::vector<double> speed_;
  std::vector<Point2> vel_;
  std::vector<double> trail_;
};

}  // namespace detail

inline Trial simulate(const SimConfig& config) { return detail::Simulator(config).run(); }

/// Trials with seeds base_seed + index.
inline std::vector<Trial> run_trial_suite(SimConfig config, std::size_t trials,
                                          std::uint64_t base_seed) {
  if (trials < 1) throw ConfigError("trial suite needs at least one trial");
  std::vector<Trial> out;
  out.reserve(trials);
  for (std::size_t k = 0; k < trials; ++k) {
    config.seed = base_seed + k;
    out.push_back(simulate(config));
  }
  return out;
}

}  // namespace leadership
