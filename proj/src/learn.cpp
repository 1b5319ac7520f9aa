#include "galaxy/learn.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "galaxy/error.hpp"
#include "galaxy/random.hpp"

namespace galaxy {

namespace {

constexpr int kModelFormatVersion = 1;

GalaxyClass argmax_class(const std::array<double, kClassCount>& votes) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < kClassCount; ++c) {
    if (votes[c] > votes[best]) best = c;
  }
  return static_cast<GalaxyClass>(best);
}

double entropy(const std::array<double, kClassCount>& counts, double total) {
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (double c : counts) {
    if (c > 0.0) {
      const double p = c / total;
      h -= p * std::log2(p);
    }
  }
  return h;
}

void require_rows(const LabeledDataset& data) {
  data.validate();
  if (data.rows() == 0) throw Error(ErrorKind::invalid_argument, "training set has zero rows");
}

}  // namespace

// ---------------------------------------------------------------------------
// Dataset and scaling

void LabeledDataset::validate() const {
  if (features.size() != labels.size()) {
    throw Error(ErrorKind::invalid_argument, "dataset has " + std::to_string(features.size()) + " rows but " +
                                                 std::to_string(labels.size()) + " labels");
  }
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].size() != arity()) {
      throw Error(ErrorKind::invalid_argument, "row " + std::to_string(i) + " has " +
                                                   std::to_string(features[i].size()) + " features, expected " +
                                                   std::to_string(arity()));
    }
  }
  if (features.empty()) return;
  for (std::size_t f = 0; f < arity(); ++f) {
    const bool any_finite = std::any_of(features.begin(), features.end(),
                                        [f](const FeatureVector& row) { return std::isfinite(row[f]); });
    if (!any_finite) throw Error(ErrorKind::invalid_argument, "feature '" + feature_names[f] + "' has no finite value");
  }
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
  LabeledDataset out;
  out.feature_names = feature_names;
  out.features.reserve(indices.size());
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) {
    out.features.push_back(features.at(i));
    out.labels.push_back(labels.at(i));
  }
  return out;
}

std::array<std::size_t, kClassCount> LabeledDataset::class_counts() const {
  std::array<std::size_t, kClassCount> counts{};
  for (GalaxyClass c : labels) ++counts[index_of(c)];
  return counts;
}

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::c45: return "c45";
    case Algorithm::knn: return "knn";
    case Algorithm::forest: return "rf";
    case Algorithm::svm: return "svm";
    case Algorithm::majority: return "majority";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  for (Algorithm a : {Algorithm::c45, Algorithm::knn, Algorithm::forest, Algorithm::svm, Algorithm::majority}) {
    if (to_string(a) == name) return a;
  }
  throw Error(ErrorKind::invalid_argument, "unknown algorithm '" + std::string(name) + "'");
}

Scaler Scaler::fit(const std::vector<FeatureVector>& rows) {
  Scaler s;
  if (rows.empty()) return s;
  const std::size_t f = rows.front().size();
  s.mean.assign(f, 0.0);
  s.scale.assign(f, 1.0);
  const double n = static_cast<double>(rows.size());
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < f; ++k) s.mean[k] += r[k];
  }
  for (double& m : s.mean) m /= n;
  std::vector<double> var(f, 0.0);
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < f; ++k) var[k] += (r[k] - s.mean[k]) * (r[k] - s.mean[k]);
  }
  for (std::size_t k = 0; k < f; ++k) {
    const double sd = std::sqrt(var[k] / n);
    s.scale[k] = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

FeatureVector Scaler::apply(std::span<const double> x) const {
  if (mean.empty()) return FeatureVector(x.begin(), x.end());
  FeatureVector out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = (x[k] - mean[k]) / scale[k];
  return out;
}

// ---------------------------------------------------------------------------
// Decision trees

GalaxyClass DecisionTree::predict(std::span<const double> x) const {
  int node = 0;
  while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
    const TreeNode& n = nodes[static_cast<std::size_t>(node)];
    node = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(node)].label;
}

std::size_t DecisionTree::depth() const {
  std::vector<std::size_t> level(nodes.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (nodes[i].feature >= 0) {
      level[static_cast<std::size_t>(nodes[i].left)] = level[i] + 1;
      level[static_cast<std::size_t>(nodes[i].right)] = level[i] + 1;
    }
  }
  return deepest;
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

double pessimistic_extra_errors(double n, double errors, double cf) {
  if (errors < 1.0) {
    const double base = n * (1.0 - std::pow(cf, 1.0 / n));
    if (errors == 0.0) return base;
    return base + errors * (pessimistic_extra_errors(n, 1.0, cf) - base);
  }
  if (errors + 0.5 >= n) return std::max(n - errors, 0.0);

  // z = Phi^-1(1 - cf) by bisection on the normal CDF.
  double lo = -10.0, hi = 10.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double cdf = 0.5 * std::erfc(-mid / std::sqrt(2.0));
    (cdf < 1.0 - cf ? lo : hi) = mid;
  }
  const double z = 0.5 * (lo + hi);
  const double f = (errors + 0.5) / n;
  const double r = (f + z * z / (2 * n) + z * std::sqrt(f / n - f * f / n + z * z / (4 * n * n))) / (1 + z * z / n);
  return r * n - errors;
}

namespace {

struct SplitCandidate {
  std::size_t feature = 0;
  double threshold = 0.0;
  double gain = 0.0;
  double gain_ratio = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const std::vector<FeatureVector>& x, const std::vector<GalaxyClass>& y, std::size_t min_leaf,
              std::size_t features_per_split, Rng* rng)
      : x_(x), y_(y), min_leaf_(std::max<std::size_t>(min_leaf, 1)), mtry_(features_per_split), rng_(rng) {}

  DecisionTree build(std::vector<std::size_t> rows) {
    DecisionTree tree;
    nodes_.clear();
    grow(std::move(rows));
    tree.nodes = std::move(nodes_);
    return tree;
  }

 private:
  std::array<double, kClassCount> count(const std::vector<std::size_t>& rows) const {
    std::array<double, kClassCount> counts{};
    for (std::size_t r : rows) counts[index_of(y_[r])] += 1.0;
    return counts;
  }

  // Best threshold on one feature by information gain (lowest threshold on ties).
  std::optional<SplitCandidate> best_on_feature(const std::vector<std::size_t>& rows, std::size_t f,
                                                double parent_entropy) const {
    std::vector<std::size_t> order = rows;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x_[a][f] < x_[b][f]; });
    const double n = static_cast<double>(order.size());
    std::array<double, kClassCount> left{};
    std::array<double, kClassCount> right = count(order);
    std::optional<SplitCandidate> best;
    for (std::size_t p = 1; p < order.size(); ++p) {
      const GalaxyClass moved = y_[order[p - 1]];
      left[index_of(moved)] += 1.0;
      right[index_of(moved)] -= 1.0;
      const double lo = x_[order[p - 1]][f];
      const double hi = x_[order[p]][f];
      if (!(lo < hi)) continue;
      if (p < min_leaf_ || order.size() - p < min_leaf_) continue;
      const double nl = static_cast<double>(p);
      const double nr = n - nl;
      const double gain = parent_entropy - (nl / n) * entropy(left, nl) - (nr / n) * entropy(right, nr);
      if (!best || gain > best->gain + 1e-12) {
        double threshold = lo + 0.5 * (hi - lo);
        if (!(threshold < hi)) threshold = lo;
        const double pl = nl / n;
        const double split_info = -(pl * std::log2(pl) + (1 - pl) * std::log2(1 - pl));
        best = SplitCandidate{f, threshold, gain, gain / split_info};
      }
    }
    return best;
  }

  std::vector<std::size_t> feature_order() const {
    const std::size_t arity = x_.front().size();
    std::vector<std::size_t> order(arity);
    std::iota(order.begin(), order.end(), 0);
    if (rng_ != nullptr && mtry_ > 0 && mtry_ < arity) rng_->shuffle(order);
    return order;
  }

  // C4.5 selection: gain ratio among splits whose gain is at least the average.
  std::optional<SplitCandidate> choose_split(const std::vector<std::size_t>& rows,
                                             const std::array<double, kClassCount>& counts) {
    const double parent_entropy = entropy(counts, static_cast<double>(rows.size()));
    const std::vector<std::size_t> order = feature_order();
    const std::size_t arity = order.size();
    const std::size_t budget = (mtry_ == 0 || mtry_ >= arity) ? arity : mtry_;

    std::vector<SplitCandidate> candidates;
    for (std::size_t k = 0; k < arity; ++k) {
      // Random subspaces keep drawing features until one yields a usable split.
      if (k >= budget && !candidates.empty()) break;
      auto c = best_on_feature(rows, order[k], parent_entropy);
      if (c && c->gain > 1e-12) candidates.push_back(*c);
    }
    if (candidates.empty()) return std::nullopt;
    std::sort(candidates.begin(), candidates.end(),
              [](const SplitCandidate& a, const SplitCandidate& b) { return a.feature < b.feature; });

    double mean_gain = 0.0;
    for (const auto& c : candidates) mean_gain += c.gain;
    mean_gain /= static_cast<double>(candidates.size());

    std::optional<SplitCandidate> best;
    for (const auto& c : candidates) {
      if (c.gain < mean_gain - 1e-12) continue;
      if (!best || c.gain_ratio > best->gain_ratio + 1e-12) best = c;
    }
    return best;
  }

  int grow(std::vector<std::size_t> rows) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    const auto counts = count(rows);
    nodes_[static_cast<std::size_t>(id)].counts = counts;
    nodes_[static_cast<std::size_t>(id)].label = argmax_class(counts);

    const std::size_t non_empty = static_cast<std::size_t>(std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0.0; }));
    if (non_empty <= 1 || rows.size() < 2 * min_leaf_) return id;

    const auto split = choose_split(rows, counts);
    if (!split) return id;

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : rows) {
      (x_[r][split->feature] <= split->threshold ? left_rows : right_rows).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    const int left = grow(std::move(left_rows));
    const int right = grow(std::move(right_rows));
    TreeNode& node = nodes_[static_cast<std::size_t>(id)];
    node.feature = static_cast<int>(split->feature);
    node.threshold = split->threshold;
    node.left = left;
    node.right = right;
    return id;
  }

  const std::vector<FeatureVector>& x_;
  const std::vector<GalaxyClass>& y_;
  std::size_t min_leaf_;
  std::size_t mtry_;
  Rng* rng_;
  std::vector<TreeNode> nodes_;
};

double leaf_errors(const TreeNode& n) {
  const double total = std::accumulate(n.counts.begin(), n.counts.end(), 0.0);
  return total - n.counts[index_of(n.label)];
}

double prune_node(std::vector<TreeNode>& nodes, int id, double cf) {
  TreeNode& node = nodes[static_cast<std::size_t>(id)];
  const double total = std::accumulate(node.counts.begin(), node.counts.end(), 0.0);
  const double as_leaf = leaf_errors(node) + pessimistic_extra_errors(total, leaf_errors(node), cf);
  if (node.feature < 0) return as_leaf;
  const double subtree = prune_node(nodes, node.left, cf) + prune_node(nodes, node.right, cf);
  TreeNode& again = nodes[static_cast<std::size_t>(id)];
  if (as_leaf <= subtree + 0.1) {
    again.feature = -1;
    again.left = again.right = -1;
    return as_leaf;
  }
  return subtree;
}

// Renumbers reachable nodes in depth-first order.
DecisionTree compact(const DecisionTree& tree) {
  DecisionTree out;
  auto copy = [&](auto&& self, int old_id) -> int {
    const int new_id = static_cast<int>(out.nodes.size());
    out.nodes.push_back(tree.nodes[static_cast<std::size_t>(old_id)]);
    if (out.nodes.back().feature >= 0) {
      const int l = self(self, tree.nodes[static_cast<std::size_t>(old_id)].left);
      const int r = self(self, tree.nodes[static_cast<std::size_t>(old_id)].right);
      out.nodes[static_cast<std::size_t>(new_id)].left = l;
      out.nodes[static_cast<std::size_t>(new_id)].right = r;
    }
    return new_id;
  };
  copy(copy, 0);
  return out;
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  return rows;
}

}  // namespace

TrainedModel train_c45(const LabeledDataset& data, const TreeParams& params) {
  require_rows(data);
  if (params.confidence <= 0.0 || params.confidence >= 1.0) {
    throw Error(ErrorKind::invalid_argument, "pruning confidence must lie in (0, 1)");
  }
  TreeBuilder builder(data.features, data.labels, params.min_leaf, 0, nullptr);
  DecisionTree tree = builder.build(all_rows(data.rows()));
  if (params.prune) {
    prune_node(tree.nodes, 0, params.confidence);
    tree = compact(tree);
  }
  return TrainedModel(Algorithm::c45, data.arity(), Scaler{}, std::move(tree));
}

TrainedModel train_forest(const LabeledDataset& data, const ForestParams& params) {
  require_rows(data);
  if (params.trees == 0) throw Error(ErrorKind::invalid_argument, "forest needs at least one tree");
  const std::size_t arity = data.arity();
  const std::size_t mtry = params.features_per_split == 0
                               ? static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(arity))))
                               : std::min(params.features_per_split, arity);
  ForestModel forest;
  forest.trees.reserve(params.trees);
  const std::size_t n = data.rows();
  for (std::size_t t = 0; t < params.trees; ++t) {
    Rng rng(params.seed + t);
    std::vector<std::size_t> rows;
    if (params.bootstrap) {
      rows.resize(n);
      for (auto& r : rows) r = rng.index(n);
    } else {
      rows = all_rows(n);
    }
    TreeBuilder builder(data.features, data.labels, params.min_leaf, mtry, &rng);
    forest.trees.push_back(builder.build(std::move(rows)));
  }
  return TrainedModel(Algorithm::forest, arity, Scaler{}, std::move(forest));
}

// ---------------------------------------------------------------------------
// k nearest neighbours

GalaxyClass knn_vote(std::span<const FeatureVector> points, std::span<const GalaxyClass> labels,
                     std::span<const double> query, std::size_t k) {
  if (points.empty()) throw Error(ErrorKind::invalid_argument, "k-NN with empty training set");
  if (k == 0) throw Error(ErrorKind::invalid_argument, "k must be positive");
  std::vector<std::pair<double, std::size_t>> dist(points.size());
  std::array<double, kClassCount> exact{};
  bool any_exact = false;
  for (std::size_t i = 0; i < points.size(); ++i) {
    double d2 = 0.0;
    for (std::size_t f = 0; f < query.size(); ++f) {
      const double diff = points[i][f] - query[f];
      d2 += diff * diff;
    }
    dist[i] = {d2, i};
    if (d2 == 0.0) {
      exact[index_of(labels[i])] += 1.0;
      any_exact = true;
    }
  }
  if (any_exact) return argmax_class(exact);

  const std::size_t take = std::min(k, points.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(take), dist.end());
  std::array<double, kClassCount> votes{};
  for (std::size_t i = 0; i < take; ++i) votes[index_of(labels[dist[i].second])] += 1.0 / dist[i].first;
  return argmax_class(votes);
}

TrainedModel train_knn(const LabeledDataset& data, const KnnParams& params) {
  require_rows(data);
  if (params.k == 0) throw Error(ErrorKind::invalid_argument, "k must be positive");
  Scaler scaler = Scaler::fit(data.features);
  KnnModel model;
  model.k = params.k;
  model.labels = data.labels;
  model.points.reserve(data.rows());
  for (const auto& row : data.features) model.points.push_back(scaler.apply(row));
  return TrainedModel(Algorithm::knn, data.arity(), std::move(scaler), std::move(model));
}

// ---------------------------------------------------------------------------
// Support vector machine

double poly2_kernel(std::span<const double> x, std::span<const double> y) {
  double dot = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * y[i];
  return dot * dot;
}

double BinarySvm::decision(std::span<const double> x) const {
  double sum = -rho;
  for (std::size_t i = 0; i < support.size(); ++i) sum += coef[i] * poly2_kernel(support[i], x);
  return sum;
}

SvmSolution solve_svm_dual(std::span<const FeatureVector> x, std::span<const int> y, const SvmParams& params) {
  const std::size_t n = x.size();
  if (n == 0 || y.size() != n) throw Error(ErrorKind::invalid_argument, "SVM needs matching non-empty x and y");
  if (params.c <= 0.0) throw Error(ErrorKind::invalid_argument, "SVM C must be positive");
  constexpr double kTau = 1e-12;
  const double c = params.c;

  std::vector<double> q(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double v = y[i] * y[j] * poly2_kernel(x[i], x[j]);
      q[i * n + j] = v;
      q[j * n + i] = v;
    }
  }
  auto qd = [&](std::size_t i) { return q[i * n + i]; };

  SvmSolution sol;
  sol.alpha.assign(n, 0.0);
  std::vector<double> grad(n, -1.0);
  auto upper = [&](std::size_t t) { return sol.alpha[t] >= c; };
  auto lower = [&](std::size_t t) { return sol.alpha[t] <= 0.0; };

  for (;;) {
    // Maximal violating index i, then second-order choice of j.
    double gmax = -std::numeric_limits<double>::infinity();
    double gmax2 = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t i_sel = -1, j_sel = -1;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] == +1) {
        if (!upper(t) && -grad[t] >= gmax) { gmax = -grad[t]; i_sel = static_cast<std::ptrdiff_t>(t); }
      } else {
        if (!lower(t) && grad[t] >= gmax) { gmax = grad[t]; i_sel = static_cast<std::ptrdiff_t>(t); }
      }
    }
    double best_obj = std::numeric_limits<double>::infinity();
    if (i_sel >= 0) {
      const auto i = static_cast<std::size_t>(i_sel);
      for (std::size_t t = 0; t < n; ++t) {
        double grad_diff;
        double quad;
        if (y[t] == +1) {
          if (lower(t)) continue;
          gmax2 = std::max(gmax2, grad[t]);
          grad_diff = gmax + grad[t];
          quad = qd(i) + qd(t) - 2.0 * y[i] * q[i * n + t];
        } else {
          if (upper(t)) continue;
          gmax2 = std::max(gmax2, -grad[t]);
          grad_diff = gmax - grad[t];
          quad = qd(i) + qd(t) + 2.0 * y[i] * q[i * n + t];
        }
        if (grad_diff <= 0.0) continue;
        const double obj = -(grad_diff * grad_diff) / (quad > 0.0 ? quad : kTau);
        if (obj <= best_obj) { best_obj = obj; j_sel = static_cast<std::ptrdiff_t>(t); }
      }
    }
    if (i_sel < 0 || j_sel < 0 || gmax + gmax2 < params.tolerance) break;
    if (sol.iterations >= params.max_iterations) {
      throw Error(ErrorKind::training_failure,
                  "SMO did not converge within " + std::to_string(params.max_iterations) + " iterations");
    }
    ++sol.iterations;

    const auto i = static_cast<std::size_t>(i_sel);
    const auto j = static_cast<std::size_t>(j_sel);
    const double old_i = sol.alpha[i];
    const double old_j = sol.alpha[j];
    double& ai = sol.alpha[i];
    double& aj = sol.alpha[j];
    if (y[i] != y[j]) {
      double quad = qd(i) + qd(j) + 2.0 * q[i * n + j];
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0) {
        if (aj < 0) { aj = 0; ai = diff; }
      } else {
        if (ai < 0) { ai = 0; aj = -diff; }
      }
      if (diff > 0) {
        if (ai > c) { ai = c; aj = c - diff; }
      } else {
        if (aj > c) { aj = c; ai = c + diff; }
      }
    } else {
      double quad = qd(i) + qd(j) - 2.0 * q[i * n + j];
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > c) {
        if (ai > c) { ai = c; aj = sum - c; }
      } else {
        if (aj < 0) { aj = 0; ai = sum; }
      }
      if (sum > c) {
        if (aj > c) { aj = c; ai = sum - c; }
      } else {
        if (ai < 0) { ai = 0; aj = sum; }
      }
    }
    const double di = ai - old_i;
    const double dj = aj - old_j;
    for (std::size_t t = 0; t < n; ++t) grad[t] += q[i * n + t] * di + q[j * n + t] * dj;
  }

  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (upper(t)) {
      if (y[t] == -1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (lower(t)) {
      if (y[t] == +1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++free_count;
      free_sum += yg;
    }
  }
  if (free_count > 0) {
    sol.rho = free_sum / static_cast<double>(free_count);
  } else if (std::isfinite(ub) && std::isfinite(lb)) {
    sol.rho = 0.5 * (ub + lb);
  } else {
    sol.rho = std::isfinite(ub) ? ub : (std::isfinite(lb) ? lb : 0.0);
  }
  for (std::size_t t = 0; t < n; ++t) sol.objective += 0.5 * sol.alpha[t] * (grad[t] - 1.0);
  return sol;
}

TrainedModel train_svm(const LabeledDataset& data, const SvmParams& params) {
  require_rows(data);
  Scaler scaler = Scaler::fit(data.features);
  std::vector<FeatureVector> scaled;
  scaled.reserve(data.rows());
  for (const auto& row : data.features) scaled.push_back(scaler.apply(row));

  SvmModel model;
  const auto counts = data.class_counts();
  for (GalaxyClass c : kAllClasses) {
    if (counts[index_of(c)] > 0) model.present.push_back(c);
  }
  for (std::size_t a = 0; a < model.present.size(); ++a) {
    for (std::size_t b = a + 1; b < model.present.size(); ++b) {
      BinarySvm machine;
      machine.positive = model.present[a];
      machine.negative = model.present[b];
      std::vector<FeatureVector> xs;
      std::vector<int> ys;
      for (std::size_t r = 0; r < data.rows(); ++r) {
        if (data.labels[r] == machine.positive || data.labels[r] == machine.negative) {
          xs.push_back(scaled[r]);
          ys.push_back(data.labels[r] == machine.positive ? +1 : -1);
        }
      }
      const SvmSolution sol = solve_svm_dual(xs, ys, params);
      for (std::size_t t = 0; t < xs.size(); ++t) {
        if (sol.alpha[t] > 0.0) {
          machine.support.push_back(xs[t]);
          machine.coef.push_back(sol.alpha[t] * ys[t]);
        }
      }
      machine.rho = sol.rho;
      model.machines.push_back(std::move(machine));
    }
  }
  return TrainedModel(Algorithm::svm, data.arity(), std::move(scaler), std::move(model));
}

TrainedModel train_majority(const LabeledDataset& data) {
  require_rows(data);
  const auto counts = data.class_counts();
  std::array<double, kClassCount> votes{};
  for (std::size_t c = 0; c < kClassCount; ++c) votes[c] = static_cast<double>(counts[c]);
  return TrainedModel(Algorithm::majority, data.arity(), Scaler{}, MajorityModel{argmax_class(votes)});
}

TrainedModel train(const LabeledDataset& data, const AlgorithmConfig& config, std::uint64_t seed) {
  switch (config.algorithm) {
    case Algorithm::c45: return train_c45(data, config.tree);
    case Algorithm::knn: return train_knn(data, config.knn);
    case Algorithm::forest: {
      ForestParams params = config.forest;
      params.seed = seed;
      return train_forest(data, params);
    }
    case Algorithm::svm: return train_svm(data, config.svm);
    case Algorithm::majority: return train_majority(data);
  }
  throw Error(ErrorKind::invalid_argument, "unknown algorithm");
}

// ---------------------------------------------------------------------------
// Prediction and serialization

TrainedModel::TrainedModel(Algorithm algorithm, std::size_t arity, Scaler scaler, Body body)
    : algorithm_(algorithm), arity_(arity), scaler_(std::move(scaler)), body_(std::move(body)) {}

GalaxyClass TrainedModel::predict(std::span<const double> features) const {
  if (features.size() != arity_) {
    throw Error(ErrorKind::invalid_argument, "feature arity " + std::to_string(features.size()) +
                                                 " does not match model arity " + std::to_string(arity_));
  }
  for (double v : features) {
    if (!std::isfinite(v)) throw Error(ErrorKind::invalid_argument, "non-finite feature value");
  }
  const FeatureVector x = scaler_.apply(features);
  struct Visitor {
    const FeatureVector& x;
    GalaxyClass operator()(const DecisionTree& t) const { return t.predict(x); }
    GalaxyClass operator()(const KnnModel& m) const { return knn_vote(m.points, m.labels, x, m.k); }
    GalaxyClass operator()(const ForestModel& f) const {
      std::array<double, kClassCount> votes{};
      for (const auto& t : f.trees) votes[index_of(t.predict(x))] += 1.0;
      return argmax_class(votes);
    }
    GalaxyClass operator()(const SvmModel& m) const {
      if (m.present.size() == 1) return m.present.front();
      std::array<double, kClassCount> votes{};
      for (const auto& machine : m.machines) {
        votes[index_of(machine.decision(x) > 0.0 ? machine.positive : machine.negative)] += 1.0;
      }
      return argmax_class(votes);
    }
    GalaxyClass operator()(const MajorityModel& m) const { return m.label; }
  };
  return std::visit(Visitor{x}, body_);
}

namespace {

using nlohmann::json;

json tree_to_json(const DecisionTree& tree) {
  json nodes = json::array();
  for (const auto& n : tree.nodes) {
    nodes.push_back({{"feature", n.feature},
                     {"threshold", n.threshold},
                     {"left", n.left},
                     {"right", n.right},
                     {"label", to_string(n.label)},
                     {"counts", n.counts}});
  }
  return nodes;
}

GalaxyClass class_from_json(const json& j) {
  const auto c = parse_class(j.get<std::string>());
  if (!c) throw Error(ErrorKind::format, "unknown class label in model: " + j.get<std::string>());
  return *c;
}

DecisionTree tree_from_json(const json& j) {
  DecisionTree tree;
  for (const auto& n : j) {
    TreeNode node;
    node.feature = n.at("feature").get<int>();
    node.threshold = n.at("threshold").get<double>();
    node.left = n.at("left").get<int>();
    node.right = n.at("right").get<int>();
    node.label = class_from_json(n.at("label"));
    node.counts = n.at("counts").get<std::array<double, kClassCount>>();
    tree.nodes.push_back(node);
  }
  const auto size = static_cast<int>(tree.nodes.size());
  if (size == 0) throw Error(ErrorKind::format, "empty decision tree");
  for (const auto& n : tree.nodes) {
    if (n.feature >= 0 && (n.left <= 0 || n.right <= 0 || n.left >= size || n.right >= size)) {
      throw Error(ErrorKind::format, "decision tree child index out of range");
    }
  }
  return tree;
}

}  // namespace

std::string TrainedModel::to_json() const {
  json j;
  j["format_version"] = kModelFormatVersion;
  j["algorithm"] = to_string(algorithm_);
  j["arity"] = arity_;
  j["scaler"] = {{"mean", scaler_.mean}, {"scale", scaler_.scale}};
  struct Visitor {
    json operator()(const DecisionTree& t) const { return {{"nodes", tree_to_json(t)}}; }
    json operator()(const KnnModel& m) const {
      json labels = json::array();
      for (GalaxyClass c : m.labels) labels.push_back(to_string(c));
      return {{"k", m.k}, {"points", m.points}, {"labels", labels}};
    }
    json operator()(const ForestModel& f) const {
      json trees = json::array();
      for (const auto& t : f.trees) trees.push_back(tree_to_json(t));
      return {{"trees", trees}};
    }
    json operator()(const SvmModel& m) const {
      json machines = json::array();
      for (const auto& machine : m.machines) {
        machines.push_back({{"positive", to_string(machine.positive)},
                            {"negative", to_string(machine.negative)},
                            {"support", machine.support},
                            {"coef", machine.coef},
                            {"rho", machine.rho}});
      }
      json present = json::array();
      for (GalaxyClass c : m.present) present.push_back(to_string(c));
      return {{"machines", machines}, {"present", present}};
    }
    json operator()(const MajorityModel& m) const { return {{"label", to_string(m.label)}}; }
  };
  j["model"] = std::visit(Visitor{}, body_);
  return j.dump();
}

TrainedModel TrainedModel::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::format, std::string("model is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format_version").get<int>() != kModelFormatVersion) {
      throw Error(ErrorKind::format, "unsupported model format version");
    }
    const Algorithm algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
    const auto arity = j.at("arity").get<std::size_t>();
    Scaler scaler;
    scaler.mean = j.at("scaler").at("mean").get<std::vector<double>>();
    scaler.scale = j.at("scaler").at("scale").get<std::vector<double>>();
    if (!scaler.mean.empty() && (scaler.mean.size() != arity || scaler.scale.size() != arity)) {
      throw Error(ErrorKind::format, "scaler length does not match model arity");
    }
    const json& m = j.at("model");
    switch (algorithm) {
      case Algorithm::c45:
        return TrainedModel(algorithm, arity, std::move(scaler), tree_from_json(m.at("nodes")));
      case Algorithm::knn: {
        KnnModel knn;
        knn.k = m.at("k").get<std::size_t>();
        knn.points = m.at("points").get<std::vector<FeatureVector>>();
        for (const auto& c : m.at("labels")) knn.labels.push_back(class_from_json(c));
        if (knn.points.size() != knn.labels.size()) throw Error(ErrorKind::format, "k-NN points/labels mismatch");
        return TrainedModel(algorithm, arity, std::move(scaler), std::move(knn));
      }
      case Algorithm::forest: {
        ForestModel forest;
        for (const auto& t : m.at("trees")) forest.trees.push_back(tree_from_json(t));
        return TrainedModel(algorithm, arity, std::move(scaler), std::move(forest));
      }
      case Algorithm::svm: {
        SvmModel svm;
        for (const auto& c : m.at("present")) svm.present.push_back(class_from_json(c));
        for (const auto& mj : m.at("machines")) {
          BinarySvm machine;
          machine.positive = class_from_json(mj.at("positive"));
          machine.negative = class_from_json(mj.at("negative"));
          machine.support = mj.at("support").get<std::vector<FeatureVector>>();
          machine.coef = mj.at("coef").get<std::vector<double>>();
          machine.rho = mj.at("rho").get<double>();
          svm.machines.push_back(std::move(machine));
        }
        return TrainedModel(algorithm, arity, std::move(scaler), std::move(svm));
      }
      case Algorithm::majority:
        return TrainedModel(algorithm, arity, std::move(scaler), MajorityModel{class_from_json(m.at("label"))});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::format, std::string("malformed model: ") + e.what());
  }
  throw Error(ErrorKind::format, "unknown algorithm in model");
}

}  // namespace galaxy
