#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "leadership/dataset.hpp"

namespace leadership {

// Declaration order is the vote tie-break order.
enum class Label : std::uint8_t { DM = 0, HM = 1, LT = 2, Random = 3 };
inline constexpr std::size_t kLabelCount = 4;
inline constexpr std::array<Label, kLabelCount> kLabels{Label::DM, Label::HM, Label::LT, Label::Random};

inline std::string label_name(Label l) {
  switch (l) {
    case Label::DM: return "DM";
    case Label::HM: return "HM";
    case Label::LT: return "LT";
    case Label::Random: return "Random";
  }
  return "?";
}

inline Label parse_label(const std::string& s) {
  for (Label l : kLabels)
    if (label_name(l) == s) return l;
  throw ConfigError("unknown label '" + s + "'");
}

struct LabeledSample {
  std::uint64_t id = 0;  // keys the bootstrap; must be unique within a training set
  std::vector<double> x;
  Label label = Label::DM;
};

struct ForestOptions {
  std::size_t n_trees = 100;
  std::optional<std::size_t> mtry;  // default ceil(sqrt(d))
  std::size_t min_samples_split = 2;
};

/// Flat binary tree; a node with feature < 0 is a leaf.
struct DecisionTree {
  struct Node {
    int feature = -1;
    double threshold = 0.0;  // go left when x[feature] <= threshold
    int left = -1;
    int right = -1;
    Label label = Label::DM;
  };
  std::vector<Node> nodes;

  Label predict(const std::vector<double>& x) const {
    std::size_t k = 0;
    while (nodes[k].feature >= 0)
      k = static_cast<std::size_t>(x[static_cast<std::size_t>(nodes[k].feature)] <= nodes[k].threshold
                                       ? nodes[k].left
                                       : nodes[k].right);
    return nodes[k].label;
  }
};

inline Label majority(const std::array<std::size_t, kLabelCount>& counts) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < kLabelCount; ++c)
    if (counts[c] > counts[best]) best = c;
  return static_cast<Label>(best);
}

struct EnsembleModel {
  static constexpr int kFormatVersion = 1;

  std::size_t n_features = 0;
  std::size_t mtry = 0;
  std::uint64_t seed = 0;
  std::vector<DecisionTree> trees;

  std::array<std::size_t, kLabelCount> votes(const std::vector<double>& x) const {
    if (x.size() != n_features) throw ConfigError("feature vector has wrong length");
    std::array<std::size_t, kLabelCount> v{};
    for (const auto& t : trees) ++v[static_cast<std::size_t>(t.predict(x))];
    return v;
  }

  Label predict(const std::vector<double>& x) const { return majority(votes(x)); }

  nlohmann::json to_json() const {
    nlohmann::json trees_json = nlohmann::json::array();
    for (const auto& t : trees) {
      nlohmann::json feature = nlohmann::json::array(), threshold = nlohmann::json::array(),
                     left = nlohmann::json::array(), right = nlohmann::json::array(),
                     label = nlohmann::json::array();
      for (const auto& nd : t.nodes) {
        feature.push_back(nd.feature);
        threshold.push_back(nd.threshold);
        left.push_back(nd.left);
        right.push_back(nd.right);
        label.push_back(label_name(nd.label));
      }
      trees_json.push_back({{"feature", feature},
                            {"threshold", threshold},
                            {"left", left},
                            {"right", right},
                            {"label", label}});
    }
    std::vector<std::string> names;
    for (Label l : kLabels) names.push_back(label_name(l));
    return {{"format", "leadership-forest"},
            {"format_version", kFormatVersion},
            {"labels", names},
            {"n_features", n_features},
            {"mtry", mtry},
            {"seed", seed},
            {"trees", trees_json}};
  }

  static EnsembleModel from_json(const nlohmann::json& j) {
    try {
      if (j.at("format").get<std::string>() != "leadership-forest")
        throw IngestError("not a forest model document");
      if (j.at("format_version").get<int>() != kFormatVersion)
        throw IngestError("unsupported forest format_version");
      EnsembleModel m;
      m.n_features = j.at("n_features").get<std::size_t>();
      m.mtry = j.at("mtry").get<std::size_t>();
      m.seed = j.at("seed").get<std::uint64_t>();
      for (const auto& tj : j.at("trees")) {
        const auto feature = tj.at("feature").get<std::vector<int>>();
        const auto threshold = tj.at("threshold").get<std::vector<double>>();
        const auto left = tj.at("left").get<std::vector<int>>();
        const auto right = tj.at("right").get<std::vector<int>>();
        const auto label = tj.at("label").get<std::vector<std::string>>();
        const std::size_t k = feature.size();
        if (k == 0 || threshold.size() != k || left.size() != k || right.size() != k ||
            label.size() != k)
          throw IngestError("malformed tree arrays");
        DecisionTree t;
        for (std::size_t q = 0; q < k; ++q) {
          const bool leaf = feature[q] < 0;
          if (!leaf && (feature[q] >= static_cast<int>(m.n_features) ||
                        left[q] <= static_cast<int>(q) || right[q] <= static_cast<int>(q) ||
                        left[q] >= static_cast<int>(k) || right[q] >= static_cast<int>(k)))
            throw IngestError("tree node references out of range");
          t.nodes.push_back({feature[q], threshold[q], left[q], right[q], parse_label(label[q])});
        }
        m.trees.push_back(std::move(t));
      }
      return m;
    } catch (const nlohmann::json::exception& e) {
      throw IngestError(std::string("forest model: ") + e.what());
    } catch (const ConfigError& e) {
      throw IngestError(std::string("forest model: ") + e.what());
    }
  }
};

namespace detail {

inline double gini(const std::array<std::size_t, kLabelCount>& c, std::size_t total) {
  if (total == 0) return 0.0;
  double s = 0.0;
  for (std::size_t v : c) {
    const double p = static_cast<double>(v) / static_cast<double>(total);
    s += p * p;
  }
  return 1.0 - s;
}

class TreeBuilder {
 public:
  TreeBuilder(const std::vector<LabeledSample>& samples, std::size_t mtry, std::size_t min_split,
              std::mt19937_64& rng)
      : s_(samples), mtry_(mtry), min_split_(min_split), rng_(rng) {}

  DecisionTree build(std::vector<std::size_t> idx) {
    tree_.nodes.clear();
    grow(idx);
    return std::move(tree_);
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = -1.0;
  };

  std::array<std::size_t, kLabelCount> counts(const std::vector<std::size_t>& idx) const {
    std::array<std::size_t, kLabelCount> c{};
    for (std::size_t i : idx) ++c[static_cast<std::size_t>(s_[i].label)];
    return c;
  }

  // Best Gini split on one feature; midpoint thresholds between distinct values.
  Split best_on(std::size_t f, std::vector<std::size_t>& idx,
                const std::array<std::size_t, kLabelCount>& total, double parent) const {
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return s_[a].x[f] < s_[b].x[f]; });
    Split best;
    std::array<std::size_t, kLabelCount> left{};
    const std::size_t n = idx.size();
    for (std::size_t k = 0; k + 1 < n; ++k) {
      ++left[static_cast<std::size_t>(s_[idx[k]].label)];
      const double a = s_[idx[k]].x[f], b = s_[idx[k + 1]].x[f];
      if (!(a < b)) continue;
      std::array<std::size_t, kLabelCount> right{};
      for (std::size_t c = 0; c < kLabelCount; ++c) right[c] = total[c] - left[c];
      const std::size_t nl = k + 1, nr = n - nl;
      const double child = (static_cast<double>(nl) * gini(left, nl) +
                            static_cast<double>(nr) * gini(right, nr)) /
                           static_cast<double>(n);
      const double gain = parent - child;
      if (gain > best.gain) {
        double mid = a + (b - a) / 2.0;
        if (!(mid < b)) mid = a;  // adjacent doubles
        best = {static_cast<int>(f), mid, gain};
      }
    }
    return best;
  }

  int grow(std::vector<std::size_t>& idx) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back({});
    const auto c = counts(idx);
    tree_.nodes[static_cast<std::size_t>(id)].label = majority(c);
    const bool pure = std::count_if(c.begin(), c.end(), [](std::size_t v) { return v > 0; }) <= 1;
    if (pure || idx.size() < min_split_) return id;

    // Random feature order; if the first mtry are all constant here, keep
    // drawing until one splits or features run out.
    const std::size_t d = s_[idx.front()].x.size();
    std::vector<std::size_t> feats(d);
    std::iota(feats.begin(), feats.end(), std::size_t{0});
    std::shuffle(feats.begin(), feats.end(), rng_);
    const double parent = gini(c, idx.size());
    Split best;
    for (std::size_t q = 0; q < d; ++q) {
      if (q >= mtry_ && best.feature >= 0) break;
      const Split s = best_on(feats[q], idx, c, parent);
      if (s.feature >= 0 && s.gain > best.gain) best = s;
    }
    if (best.feature < 0) return id;

    std::vector<std::size_t> l, r;
    for (std::size_t i : idx)
      (s_[i].x[static_cast<std::size_t>(best.feature)] <= best.threshold ? l : r).push_back(i);
    idx.clear();
    idx.shrink_to_fit();
    const int li = grow(l);
    const int ri = grow(r);
    auto& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = li;
    node.right = ri;
    return id;
  }

  const std::vector<LabeledSample>& s_;
  std::size_t mtry_;
  std::size_t min_split_;
  std::mt19937_64& rng_;
  DecisionTree tree_;
};

}  // namespace detail

/// Bagged random-subspace tree ensemble. Samples are ordered by id before
/// bootstrapping, so input order does not affect the model.
inline EnsembleModel train(std::vector<LabeledSample> samples, std::uint64_t seed,
                           const ForestOptions& opt = {}) {
  if (samples.size() < 10) throw ConfigError("training needs at least 10 samples");
  if (opt.n_trees < 1) throw ConfigError("n_trees must be >= 1");
  const std::size_t d = samples.front().x.size();
  if (d == 0) throw ConfigError("samples have no features");
  std::array<std::size_t, kLabelCount> present{};
  for (const auto& s : samples) {
    if (s.x.size() != d) throw ConfigError("samples differ in feature count");
    for (double v : s.x)
      if (!std::isfinite(v)) throw ConfigError("non-finite feature value");
    ++present[static_cast<std::size_t>(s.label)];
  }
  if (std::count_if(present.begin(), present.end(), [](std::size_t v) { return v > 0; }) < 2)
    throw ConfigError("training needs at least two classes");
  std::sort(samples.begin(), samples.end(),
            [](const LabeledSample& a, const LabeledSample& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < samples.size(); ++i)
    if (samples[i].id == samples[i - 1].id) throw ConfigError("duplicate sample id");

  EnsembleModel m;
  m.n_features = d;
  m.mtry = std::clamp<std::size_t>(
      opt.mtry.value_or(static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))))), 1, d);
  m.seed = seed;
  const std::size_t n = samples.size();
  for (std::size_t t = 0; t < opt.n_trees; ++t) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(t)};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<std::size_t> boot(n);
    for (auto& b : boot) b = pick(rng);
    detail::TreeBuilder builder(samples, m.mtry, opt.min_samples_split, rng);
    m.trees.push_back(builder.build(std::move(boot)));
  }
  return m;
}

struct ClassMetrics {
  Label label = Label::DM;
  std::size_t support = 0;  // held-out samples of this class
  double precision = 0.0;
  double recall = 0.0;
  double f_score = 0.0;
};

struct CvReport {
  std::size_t folds = 0;
  std::array<std::array<std::size_t, kLabelCount>, kLabelCount> confusion{};  // [truth][predicted]
  std::vector<ClassMetrics> classes;  // labels present in the data, fixed order

  const ClassMetrics* find(Label l) const {
    for (const auto& c : classes)
      if (c.label == l) return &c;
    return nullptr;
  }
};

/// Per-class precision, recall and F from a confusion matrix; F is 0 when
/// precision + recall is 0, and precision is 0 for a class never predicted.
inline std::vector<ClassMetrics> class_metrics(
    const std::array<std::array<std::size_t, kLabelCount>, kLabelCount>& cm) {
  std::vector<ClassMetrics> out;
  for (std::size_t c = 0; c < kLabelCount; ++c) {
    std::size_t truth = 0, predicted = 0;
    for (std::size_t k = 0; k < kLabelCount; ++k) {
      truth += cm[c][k];
      predicted += cm[k][c];
    }
    if (truth == 0) continue;
    ClassMetrics m{static_cast<Label>(c), truth, 0.0, 0.0, 0.0};
    const double tp = static_cast<double>(cm[c][c]);
    if (predicted > 0) m.precision = tp / static_cast<double>(predicted);
    m.recall = tp / static_cast<double>(truth);
    if (m.precision + m.recall > 0.0)
      m.f_score = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    out.push_back(m);
  }
  return out;
}

/// Stratified k-fold assignment: each class is shuffled, then dealt round
/// robin across folds. Returned per sample, in the caller's order.
inline std::vector<std::size_t> stratified_folds(const std::vector<LabeledSample>& samples,
                                                 std::size_t folds, std::uint64_t seed) {
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return samples[a].id < samples[b].id; });
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> fold(samples.size());
  std::size_t next = 0;
  for (Label l : kLabels) {
    std::vector<std::size_t> cls;
    for (std::size_t i : order)
      if (samples[i].label == l) cls.push_back(i);
    std::shuffle(cls.begin(), cls.end(), rng);
    for (std::size_t i : cls) fold[i] = next++ % folds;
  }
  return fold;
}

inline CvReport cross_validate(const std::vector<LabeledSample>& samples, std::size_t folds,
                               std::uint64_t seed, const ForestOptions& opt = {}) {
  if (folds < 2) throw ConfigError("cross validation needs at least 2 folds");
  std::array<std::size_t, kLabelCount> per{};
  for (const auto& s : samples) ++per[static_cast<std::size_t>(s.label)];
  for (std::size_t v : per)
    if (v > 0 && v < folds) throw ConfigError("a class has fewer samples than folds");

  const auto fold = stratified_folds(samples, folds, seed);
  CvReport rep;
  rep.folds = folds;
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<LabeledSample> tr;
    for (std::size_t i = 0; i < samples.size(); ++i)
      if (fold[i] != f) tr.push_back(samples[i]);
    const EnsembleModel m = train(std::move(tr), seed + f + 1, opt);
    for (std::size_t i = 0; i < samples.size(); ++i)
      if (fold[i] == f)
        ++rep.confusion[static_cast<std::size_t>(samples[i].label)]
                       [static_cast<std::size_t>(m.predict(samples[i].x))];
  }
  rep.classes = class_metrics(rep.confusion);
  return rep;
}

}  // namespace leadership
