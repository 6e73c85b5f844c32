#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "leadership/dataset.hpp"
#include "leadership/pipeline.hpp"
#include "leadership/simulate.hpp"

namespace leadership {

inline constexpr int kFormatVersion = 1;

// ---------------------------------------------------------------- numbers

/// Shortest text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// ---------------------------------------------------------------- CSV input

namespace detail {

inline std::vector<std::string> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    std::string cell(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
    if (cell.size() >= 2 && cell.front() == '"' && cell.back() == '"')
      cell = cell.substr(1, cell.size() - 2);
    cells.push_back(std::move(cell));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

inline std::string describe_time(double t) { return format_double(t); }

// Fills interior runs of missing cells (NaN marks) of length <= max_gap by
// linear interpolation in step index. Returns false if any gap remains.
inline bool fill_gaps(std::vector<double>& s, std::size_t max_gap) {
  const std::size_t t = s.size();
  bool ok = true;
  for (std::size_t k = 0; k < t;) {
    if (!std::isnan(s[k])) {
      ++k;
      continue;
    }
    std::size_t e = k;
    while (e < t && std::isnan(s[e])) ++e;
    if (k == 0 || e == t || e - k > max_gap) {
      ok = false;
    } else {
      const double a = s[k - 1], b = s[e];
      const double span = static_cast<double>(e - k + 1);
      for (std::size_t q = k; q < e; ++q)
        s[q] = a + (b - a) * static_cast<double>(q - k + 1) / span;
    }
    k = e;
  }
  return ok;
}

}  // namespace detail

struct IngestOptions {
  // Interior gaps of at most this many steps are linearly interpolated;
  // 0 rejects any gap.
  std::size_t interpolate_max_gap = 0;
  bool wide = false;  // m = 1 table: time,<id>,<id>,...
};

namespace detail {

// Shared by the long and wide readers: cells[i][d][k], NaN where absent.
struct Grid {
  std::vector<std::string> ids;
  std::vector<double> times;  // sorted distinct
  std::size_t dims = 0;
  std::vector<double> values;  // (i * dims + d) * t + k
};

inline Dataset finish_grid(Grid& g, const IngestOptions& opt) {
  const std::size_t n = g.ids.size(), t = g.times.size();
  if (n < 2) throw IngestError("input needs at least 2 entities, found " + std::to_string(n));
  if (t < 2) throw IngestError("input needs at least 2 time steps, found " + std::to_string(t));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < g.dims; ++d) {
      std::vector<double> s(g.values.begin() + static_cast<std::ptrdiff_t>((i * g.dims + d) * t),
                            g.values.begin() + static_cast<std::ptrdiff_t>((i * g.dims + d + 1) * t));
      if (opt.interpolate_max_gap > 0) detail::fill_gaps(s, opt.interpolate_max_gap);
      for (std::size_t k = 0; k < t; ++k)
        if (std::isnan(s[k]))
          throw IngestError("ragged series: entity '" + g.ids[i] + "' has no value at time " +
                            describe_time(g.times[k]));
      std::copy(s.begin(), s.end(),
                g.values.begin() + static_cast<std::ptrdiff_t>((i * g.dims + d) * t));
    }
  }
  return Dataset(std::move(g.ids), g.dims, t, std::move(g.values));
}

inline std::string line_ref(std::size_t line) { return "line " + std::to_string(line) + ": "; }

}  // namespace detail

/// Long format: header entity_id,time,<dim>[,<dim>...]. Entities keep the
/// order of first appearance; rows may arrive in any order.
inline Dataset read_long_csv(std::istream& in, const IngestOptions& opt = {}) {
  std::string line;
  if (!std::getline(in, line)) throw IngestError("empty input");
  const auto header = detail::split_csv_line(line);
  if (header.size() < 3 || header[0] != "entity_id" || header[1] != "time")
    throw IngestError("header must be entity_id,time,<dim>[,<dim>...]");
  const std::size_t m = header.size() - 2;

  struct Row {
    std::size_t entity;
    double time;
    std::vector<double> x;
    std::size_t line;
  };
  std::vector<Row> rows;
  std::vector<std::string> ids;
  std::unordered_map<std::string, std::size_t> index;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size())
      throw IngestError(detail::line_ref(lineno) + "expected " + std::to_string(header.size()) +
                        " cells, found " + std::to_string(cells.size()));
    const auto [it, fresh] = index.try_emplace(cells[0], ids.size());
    if (fresh) ids.push_back(cells[0]);
    const auto time = parse_double(cells[1]);
    if (!time) throw IngestError(detail::line_ref(lineno) + "non-numeric time '" + cells[1] + "'");
    if (!std::isfinite(*time)) throw IngestError(detail::line_ref(lineno) + "non-finite time");
    Row r{it->second, *time, std::vector<double>(m), lineno};
    for (std::size_t d = 0; d < m; ++d) {
      const auto v = parse_double(cells[2 + d]);
      if (!v)
        throw IngestError(detail::line_ref(lineno) + "non-numeric value '" + cells[2 + d] +
                          "' in column " + header[2 + d]);
      if (!std::isfinite(*v))
        throw IngestError(detail::line_ref(lineno) + "non-finite value in column " + header[2 + d]);
      r.x[d] = *v;
    }
    rows.push_back(std::move(r));
  }

  detail::Grid g;
  g.dims = m;
  for (const auto& r : rows) g.times.push_back(r.time);
  std::sort(g.times.begin(), g.times.end());
  g.times.erase(std::unique(g.times.begin(), g.times.end()), g.times.end());
  const std::size_t t = g.times.size();
  g.values.assign(ids.size() * m * t, std::numeric_limits<double>::quiet_NaN());
  std::vector<std::size_t> seen(ids.size() * t, 0);
  for (const auto& r : rows) {
    const auto k = static_cast<std::size_t>(
        std::lower_bound(g.times.begin(), g.times.end(), r.time) - g.times.begin());
    if (seen[r.entity * t + k] != 0)
      throw IngestError(detail::line_ref(r.line) + "duplicate row for entity '" + ids[r.entity] +
                        "' at time " + detail::describe_time(r.time) + " (first on line " +
                        std::to_string(seen[r.entity * t + k]) + ")");
    seen[r.entity * t + k] = r.line;
    for (std::size_t d = 0; d < m; ++d) g.values[(r.entity * m + d) * t + k] = r.x[d];
  }
  g.ids = std::move(ids);
  return detail::finish_grid(g, opt);
}

/// Wide format for one-dimensional data: header time,<id>,<id>,...; one row
/// per time step; an empty cell is a gap.
inline Dataset read_wide_csv(std::istream& in, const IngestOptions& opt = {}) {
  std::string line;
  if (!std::getline(in, line)) throw IngestError("empty input");
  auto header = detail::split_csv_line(line);
  if (header.size() < 2 || header[0] != "time")
    throw IngestError("wide header must be time,<id>[,<id>...]");
  std::vector<std::string> ids(header.begin() + 1, header.end());
  {
    auto sorted = ids;
    std::sort(sorted.begin(), sorted.end());
    const auto dup = std::adjacent_find(sorted.begin(), sorted.end());
    if (dup != sorted.end()) throw IngestError("duplicate entity column '" + *dup + "'");
  }
  std::vector<std::pair<double, std::vector<double>>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size())
      throw IngestError(detail::line_ref(lineno) + "expected " + std::to_string(header.size()) +
                        " cells, found " + std::to_string(cells.size()));
    const auto time = parse_double(cells[0]);
    if (!time || !std::isfinite(*time))
      throw IngestError(detail::line_ref(lineno) + "bad time '" + cells[0] + "'");
    std::vector<double> x(ids.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (cells[1 + i].empty()) continue;
      const auto v = parse_double(cells[1 + i]);
      if (!v) throw IngestError(detail::line_ref(lineno) + "non-numeric value '" + cells[1 + i] + "'");
      if (!std::isfinite(*v))
        throw IngestError(detail::line_ref(lineno) + "non-finite value for entity '" + ids[i] + "'");
      x[i] = *v;
    }
    rows.emplace_back(*time, std::move(x));
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t k = 1; k < rows.size(); ++k)
    if (rows[k].first == rows[k - 1].first)
      throw IngestError("duplicate row for time " + detail::describe_time(rows[k].first));

  detail::Grid g;
  g.dims = 1;
  const std::size_t t = rows.size();
  for (const auto& r : rows) g.times.push_back(r.first);
  g.values.resize(ids.size() * t);
  for (std::size_t i = 0; i < ids.size(); ++i)
    for (std::size_t k = 0; k < t; ++k) g.values[i * t + k] = rows[k].second[i];
  g.ids = std::move(ids);
  return detail::finish_grid(g, opt);
}

inline Dataset read_dataset(const std::filesystem::path& path, const IngestOptions& opt = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open '" + path.string() + "'");
  return opt.wide ? read_wide_csv(in, opt) : read_long_csv(in, opt);
}

// ---------------------------------------------------------------- CSV output

/// Long format with time = step index and columns dim_1..dim_m.
inline void write_long_csv(std::ostream& out, const Dataset& data) {
  out << "entity_id,time";
  for (std::size_t d = 0; d < data.dims(); ++d) out << ",dim_" << d + 1;
  out << '\n';
  for (std::size_t i = 0; i < data.entities(); ++i)
    for (std::size_t k = 0; k < data.steps(); ++k) {
      out << data.entity_ids()[i] << ',' << k;
      for (std::size_t d = 0; d < data.dims(); ++d) out << ',' << format_double(data(i, d, k));
      out << '\n';
    }
}

inline void write_density_csv(std::ostream& out, const Analysis& a, const WindowSpec& spec,
                              std::size_t steps) {
  out << "window,time_begin,time_end,density,above_threshold\n";
  for (std::size_t k = 0; k < a.density.size(); ++k) {
    const Interval w = window_interval(k, spec, steps);
    out << k << ',' << w.begin << ',' << w.end << ',' << format_double(a.density[k]) << ','
        << (a.density[k] > a.threshold ? 1 : 0) << '\n';
  }
}

inline nlohmann::json events_json(const Analysis& a, const PipelineConfig& cfg, std::size_t steps) {
  nlohmann::json evs = nlohmann::json::array();
  for (std::size_t e = 0; e < a.events.size(); ++e) {
    const auto& ev = a.events[e];
    const Interval coord = window_span(ev.coord_start, ev.coord_end, cfg.window, steps);
    const Interval pre = pre_time_span(ev, cfg.window, steps);
    evs.push_back({{"event_id", e},
                   {"pre_start", ev.pre_start},
                   {"coord_start", ev.coord_start},
                   {"coord_end", ev.coord_end},
                   {"pre_time", {pre.begin, pre.end}},
                   {"coord_time", {coord.begin, coord.end}}});
  }
  nlohmann::json j{{"format_version", kFormatVersion},
                   {"windows", a.density.size()},
                   {"threshold_policy", cfg.lambda.to_string()},
                   {"threshold", a.threshold},
                   {"merge_gap", cfg.effective_merge_gap()},
                   {"coordinated", a.coordinated()},
                   {"events", evs}};
  if (!a.coordinated())
    j["notice"] = "no coordination found: density never exceeds the threshold; ranking and feature stages skipped";
  return j;
}

inline void write_rankings_csv(std::ostream& out, const Analysis& a,
                               const std::vector<std::string>& ids) {
  out << "event_id,measure,rank,entity_id,mean_rank\n";
  auto emit = [&](const std::string& event, Measure m, const EventRanking& r) {
    for (std::size_t p = 0; p < r.order.order.size(); ++p) {
      const std::size_t i = r.order.order[p];
      out << event << ',' << measure_name(m) << ',' << p + 1 << ',' << ids[i] << ','
          << format_double(r.mean_rank[i]) << '\n';
    }
  };
  for (Measure m : {Measure::PageRank, Measure::Vch, Measure::Pch}) {
    const MeasureRankings* r = a.rankings(m);
    if (r == nullptr) continue;
    for (std::size_t e = 0; e < r->events.size(); ++e) emit(std::to_string(e), m, r->events[e]);
    emit("global", m, r->global);
  }
}

inline void write_support_csv(std::ostream& out, const Analysis& a,
                              const std::vector<std::string>& ids) {
  out << "measure,entity_id,support,global_mean_rank,top_supported\n";
  for (Measure m : {Measure::PageRank, Measure::Vch, Measure::Pch}) {
    const MeasureRankings* r = a.rankings(m);
    if (r == nullptr) continue;
    const auto sup = support(r->events, ids.size());
    const std::size_t top = top_supported(*r);
    for (std::size_t i = 0; i < ids.size(); ++i)
      out << measure_name(m) << ',' << ids[i] << ',' << format_double(sup[i]) << ','
          << format_double(r->global.mean_rank[i]) << ',' << (i == top ? 1 : 0) << '\n';
  }
}

inline nlohmann::json features_json(const Analysis& a, std::size_t dims) {
  nlohmann::json j{{"format_version", kFormatVersion}, {"pch_available", a.pch_available}};
  if (!a.pch_available)
    j["pch_note"] = dims == 2 ? "PCH disabled by configuration"
                              : "PCH requires 2-dimensional positions; input has " +
                                    std::to_string(dims) + " dimension(s)";
  if (!a.features) {
    j["features"] = nullptr;
    j["notice"] = a.coordinated() ? "PageRank and VCH rankings are both required for features"
                                  : "no coordination found; features not computed";
    return j;
  }
  const FeatureVector& f = *a.features;
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); };
  j["features"] = {{"corr_p", opt(f.corr_p)},
                   {"corr_v", f.corr_v},
                   {"corr_p_pr", opt(f.corr_p_pr)},
                   {"corr_v_pr", f.corr_v_pr},
                   {"max_support_pr", f.max_support_pr}};
  return j;
}

inline FeatureVector feature_vector_from_json(const nlohmann::json& j) {
  try {
    const auto& f = j.contains("features") ? j.at("features") : j;
    if (f.is_null()) throw IngestError("features document has no feature values");
    FeatureVector v;
    auto opt = [&](const char* k) -> std::optional<double> {
      if (!f.contains(k) || f.at(k).is_null()) return std::nullopt;
      return f.at(k).get<double>();
    };
    v.corr_p = opt("corr_p");
    v.corr_v = f.at("corr_v").get<double>();
    v.corr_p_pr = opt("corr_p_pr");
    v.corr_v_pr = f.at("corr_v_pr").get<double>();
    v.max_support_pr = f.at("max_support_pr").get<double>();
    return v;
  } catch (const nlohmann::json::exception& e) {
    throw IngestError(std::string("features document: ") + e.what());
  }
}

// ---------------------------------------------------------------- simulation truth

inline nlohmann::json truth_json(const Trial& trial) {
  const auto& c = trial.config;
  const auto& ids = trial.dataset.entity_ids();
  nlohmann::json evs = nlohmann::json::array();
  for (std::size_t e = 0; e < trial.truth.size(); ++e) {
    const auto& t = trial.truth[e];
    nlohmann::json ranks = nlohmann::json::array();
    for (std::size_t r : t.ranks) ranks.push_back(ids[r]);
    evs.push_back({{"event_id", e},
                   {"pre_start", t.pre_start},
                   {"coord_start", t.coord_start},
                   {"post_start", t.post_start},
                   {"end", t.end},
                   {"leader", ids[t.leader]},
                   {"ranks", ranks}});
  }
  return {{"format_version", kFormatVersion},
          {"model", model_name(c.model)},
          {"label", c.label()},
          {"config",
           {{"n", c.n},
            {"events", c.events},
            {"pre_len", c.pre_len},
            {"coord_len", c.coord_len},
            {"post_len", c.post_len},
            {"kappa", c.kappa},
            {"rho", c.rho},
            {"leader_speed", c.leader_speed},
            {"heading_noise_sigma", c.heading_noise_sigma},
            {"lag_max", c.effective_lag_max()},
            {"circle_radius", c.circle_radius},
            {"seed", c.seed}}},
          {"events", evs}};
}

// ---------------------------------------------------------------- configuration

namespace detail {

inline void reject_unknown(const nlohmann::json& obj, std::initializer_list<std::string_view> keys,
                           const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, v] : obj.items())
    if (std::find(keys.begin(), keys.end(), k) == keys.end())
      throw ConfigError("unknown key '" + where + (where.empty() ? "" : ".") + k + "'");
}

template <class T>
void read_into(const nlohmann::json& obj, const char* key, T& dst, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    dst = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("bad value for '" + where + key + "'");
  }
}

}  // namespace detail

/// Applies a JSON config on top of cfg. Keys mirror the PipelineConfig
/// fields; unknown keys are rejected at every level.
inline void apply_config_json(const nlohmann::json& j, PipelineConfig& cfg) {
  using detail::read_into;
  detail::reject_unknown(j,
                         {"window", "epsilon", "lambda", "merge_gap", "pagerank", "measures", "seed",
                          "input", "output"},
                         "");
  if (j.contains("window")) {
    const auto& w = j.at("window");
    detail::reject_unknown(w, {"omega", "delta", "beta"}, "window");
    read_into(w, "omega", cfg.window.omega, "window.");
    read_into(w, "delta", cfg.window.delta, "window.");
    read_into(w, "beta", cfg.window.beta, "window.");
  }
  read_into(j, "epsilon", cfg.epsilon, "");
  if (j.contains("lambda")) {
    if (!j.at("lambda").is_string()) throw ConfigError("bad value for 'lambda'");
    cfg.lambda = ThresholdPolicy::parse(j.at("lambda").get<std::string>());
  }
  if (j.contains("merge_gap")) {
    if (j.at("merge_gap").is_null())
      cfg.merge_gap.reset();
    else {
      std::size_t g = 0;
      read_into(j, "merge_gap", g, "");
      cfg.merge_gap = g;
    }
  }
  if (j.contains("pagerank")) {
    const auto& p = j.at("pagerank");
    detail::reject_unknown(p, {"damping", "tol", "max_iter"}, "pagerank");
    read_into(p, "damping", cfg.pagerank.damping, "pagerank.");
    read_into(p, "tol", cfg.pagerank.tol, "pagerank.");
    read_into(p, "max_iter", cfg.pagerank.max_iter, "pagerank.");
  }
  if (j.contains("measures")) {
    const auto& m = j.at("measures");
    detail::reject_unknown(m, {"pagerank", "vch", "pch"}, "measures");
    read_into(m, "pagerank", cfg.measures.pagerank, "measures.");
    read_into(m, "vch", cfg.measures.vch, "measures.");
    read_into(m, "pch", cfg.measures.pch, "measures.");
  }
  read_into(j, "seed", cfg.seed, "");
  read_into(j, "input", cfg.input, "");
  read_into(j, "output", cfg.output, "");
  cfg.validate();
}

inline PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig cfg = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  apply_config_json(j, cfg);
  return cfg;
}

inline nlohmann::json config_json(const PipelineConfig& cfg) {
  return {{"window", {{"omega", cfg.window.omega}, {"delta", cfg.window.delta}, {"beta", cfg.window.beta}}},
          {"epsilon", cfg.epsilon},
          {"lambda", cfg.lambda.to_string()},
          {"merge_gap", cfg.merge_gap ? nlohmann::json(*cfg.merge_gap) : nlohmann::json()},
          {"pagerank",
           {{"damping", cfg.pagerank.damping},
            {"tol", cfg.pagerank.tol},
            {"max_iter", cfg.pagerank.max_iter}}},
          {"measures",
           {{"pagerank", cfg.measures.pagerank}, {"vch", cfg.measures.vch}, {"pch", cfg.measures.pch}}},
          {"seed", cfg.seed},
          {"input", cfg.input},
          {"output", cfg.output}};
}

// ---------------------------------------------------------------- files

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

inline std::string json_text(const nlohmann::json& j) { return j.dump(2) + "\n"; }

/// Writes density.csv, events.json, rankings.csv, support.csv and
/// features.json, in that order.
inline void write_analysis(const std::filesystem::path& dir, const Dataset& data,
                           const PipelineConfig& cfg, const Analysis& a) {
  std::filesystem::create_directories(dir);
  std::ostringstream s;
  write_density_csv(s, a, cfg.window, data.steps());
  write_text(dir / "density.csv", s.str());
  write_text(dir / "events.json", json_text(events_json(a, cfg, data.steps())));
  s.str("");
  write_rankings_csv(s, a, data.entity_ids());
  write_text(dir / "rankings.csv", s.str());
  s.str("");
  write_support_csv(s, a, data.entity_ids());
  write_text(dir / "support.csv", s.str());
  write_text(dir / "features.json", json_text(features_json(a, data.dims())));
}

}  // namespace leadership
