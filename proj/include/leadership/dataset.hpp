#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace leadership {

// Error hierarchy. The CLI maps each family to its own exit code.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IngestError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct ComputeError : Error {
  using Error::Error;
};

/// n entities x m dimensions x t time steps of finite observations.
///
/// Values are stored entity-major, then dimension, then time, so one
/// entity's series in one dimension is a contiguous span.
class Dataset {
 public:
  Dataset() = default;

  Dataset(std::vector<std::string> entity_ids, std::size_t dims, std::size_t steps,
          std::vector<double> values, double sample_interval = 1.0)
      : ids_(std::move(entity_ids)),
        m_(dims),
        t_(steps),
        values_(std::move(values)),
        sample_interval_(sample_interval) {
    if (ids_.size() < 2) throw IngestError("dataset needs at least 2 entities");
    if (m_ < 1) throw IngestError("dataset needs at least 1 dimension");
    if (t_ < 2) throw IngestError("dataset needs at least 2 time steps");
    if (values_.size() != ids_.size() * m_ * t_)
      throw IngestError("dataset value count does not match n*m*t");
    if (!(sample_interval_ > 0.0) || !std::isfinite(sample_interval_))
      throw IngestError("sample_interval must be positive and finite");
    for (double v : values_)
      if (!std::isfinite(v)) throw IngestError("dataset contains a non-finite value");
  }

  /// Zero-filled dataset with generated ids "0".."n-1".
  static Dataset zeros(std::size_t n, std::size_t m, std::size_t t) {
    std::vector<std::string> ids;
    ids.reserve(n);
    for (std::size_t i = 0; i < n; ++i) ids.push_back(std::to_string(i));
    return Dataset(std::move(ids), m, t, std::vector<double>(n * m * t, 0.0));
  }

  std::size_t entities() const { return ids_.size(); }
  std::size_t dims() const { return m_; }
  std::size_t steps() const { return t_; }
  double sample_interval() const { return sample_interval_; }
  const std::vector<std::string>& entity_ids() const { return ids_; }
  const std::vector<double>& raw() const { return values_; }

  double operator()(std::size_t entity, std::size_t dim, std::size_t step) const {
    return values_[(entity * m_ + dim) * t_ + step];
  }
  double& operator()(std::size_t entity, std::size_t dim, std::size_t step) {
    return values_[(entity * m_ + dim) * t_ + step];
  }

  std::span<const double> series(std::size_t entity, std::size_t dim) const {
    return {values_.data() + (entity * m_ + dim) * t_, t_};
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::vector<std::string> ids_;
  std::size_t m_ = 0;
  std::size_t t_ = 0;
  std::vector<double> values_;
  double sample_interval_ = 1.0;
};

/// Sliding-window parameters: window length, shift, and DTW warping band.
struct WindowSpec {
  std::size_t omega = 40;
  std::size_t delta = 10;
  std::size_t beta = 10;

  void validate() const {
    if (omega < 2) throw ConfigError("omega must be >= 2");
    if (delta < 1 || delta > omega) throw ConfigError("delta must be in [1, omega]");
    if (beta < 1 || beta > omega) throw ConfigError("beta must be in [1, omega]");
  }
};

/// Half-open interval of time-step indices.
struct Interval {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

inline std::size_t window_count(const WindowSpec& spec, std::size_t t) {
  if (t < spec.omega) return 0;
  return (t - spec.omega) / spec.delta + 1;
}

inline Interval window_interval(std::size_t k, const WindowSpec& spec, std::size_t t) {
  const std::size_t begin = k * spec.delta;
  if (begin + spec.omega > t)
    throw std::out_of_range("window " + std::to_string(k) + " exceeds series length " +
                            std::to_string(t));
  return {begin, begin + spec.omega};
}

/// Time-step span covered by windows [first, last] (inclusive).
inline Interval window_span(std::size_t first, std::size_t last, const WindowSpec& spec,
                            std::size_t t) {
  return {window_interval(first, spec, t).begin, window_interval(last, spec, t).end};
}

/// n x (t-1) matrix of scalar speeds, row-major by entity.
struct VelocityMatrix {
  std::size_t n = 0;
  std::size_t cols = 0;
  std::vector<double> speed;

  double operator()(std::size_t i, std::size_t j) const { return speed[i * cols + j]; }
};

inline VelocityMatrix velocity_matrix(const Dataset& data) {
  const std::size_t n = data.entities(), m = data.dims(), t = data.steps();
  VelocityMatrix v{n, t - 1, std::vector<double>(n * (t - 1), 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j + 1 < t; ++j) {
      double sq = 0.0;
      for (std::size_t d = 0; d < m; ++d) {
        const double diff = (data(i, d, j + 1) - data(i, d, j)) / data.sample_interval();
        sq += diff * diff;
      }
      v.speed[i * v.cols + j] = std::sqrt(sq);
    }
  }
  return v;
}

}  // namespace leadership
