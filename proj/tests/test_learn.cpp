#include <cmath>
#include <limits>

#include "galaxy/learn.hpp"
#include "galaxy/random.hpp"
#include "support/testing.hpp"

using namespace galaxy;

namespace {

constexpr GalaxyClass E = GalaxyClass::elliptical;
constexpr GalaxyClass S = GalaxyClass::spiral;
constexpr GalaxyClass I = GalaxyClass::irregular;

LabeledDataset make(std::vector<FeatureVector> x, std::vector<GalaxyClass> y) {
  LabeledDataset d;
  d.features = std::move(x);
  d.labels = std::move(y);
  for (std::size_t f = 0; f < d.features.front().size(); ++f) d.feature_names.push_back("f" + std::to_string(f));
  return d;
}

double training_accuracy(const TrainedModel& m, const LabeledDataset& d) {
  std::size_t ok = 0;
  for (std::size_t r = 0; r < d.rows(); ++r) ok += m.predict(d.features[r]) == d.labels[r];
  return static_cast<double>(ok) / static_cast<double>(d.rows());
}

LabeledDataset two_moons(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<FeatureVector> x;
  std::vector<GalaxyClass> y;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = rng.uniform(0.0, 3.141592653589793);
    const bool upper = i % 2 == 0;
    const double px = upper ? std::cos(t) : 1.0 - std::cos(t);
    const double py = upper ? std::sin(t) : 0.5 - std::sin(t);
    x.push_back({px + 0.25 * rng.normal(), py + 0.25 * rng.normal()});
    y.push_back(upper ? E : S);
  }
  return make(std::move(x), std::move(y));
}

// Three-class blobs in `dims` dimensions with some overlap.
LabeledDataset blobs(std::size_t n, std::size_t dims, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<FeatureVector> x;
  std::vector<GalaxyClass> y;
  for (std::size_t i = 0; i < n; ++i) {
    const GalaxyClass c = kAllClasses[rng.index(3)];
    FeatureVector row(dims);
    for (std::size_t f = 0; f < dims; ++f) row[f] = rng.normal() + (f % 3 == index_of(c) ? 1.5 : 0.0);
    x.push_back(row);
    y.push_back(c);
  }
  return make(std::move(x), std::move(y));
}

std::vector<AlgorithmConfig> all_configs() {
  std::vector<AlgorithmConfig> out;
  for (Algorithm a : {Algorithm::c45, Algorithm::knn, Algorithm::forest, Algorithm::svm, Algorithm::majority}) {
    AlgorithmConfig c;
    c.algorithm = a;
    c.forest.trees = 25;
    out.push_back(c);
  }
  return out;
}

double entropy2(double a, double b) {
  double h = 0;
  for (double v : {a, b})
    if (v > 0) h -= v / (a + b) * std::log2(v / (a + b));
  return h;
}

}  // namespace

TEST(Algorithms, NamesRoundTrip) {
  for (Algorithm a : {Algorithm::c45, Algorithm::knn, Algorithm::forest, Algorithm::svm, Algorithm::majority}) {
    EXPECT_EQ(parse_algorithm(to_string(a)), a);
  }
  EXPECT_EQ(parse_algorithm("rf"), Algorithm::forest);
  EXPECT_GALAXY_ERROR(parse_algorithm("boost"), ErrorKind::invalid_argument, "unknown algorithm 'boost'");
}

TEST(Dataset, Validation) {
  LabeledDataset d = make({{1, 2}, {3, 4}}, {E, S});
  EXPECT_NO_THROW(d.validate());
  d.features[1].pop_back();
  EXPECT_GALAXY_ERROR(d.validate(), ErrorKind::invalid_argument, "row 1");
  LabeledDataset nan = make({{std::nan(""), 1}, {std::nan(""), 2}}, {E, S});
  EXPECT_GALAXY_ERROR(nan.validate(), ErrorKind::invalid_argument, "'f0' has no finite value");
  LabeledDataset short_labels = make({{1}, {2}}, {E});
  EXPECT_GALAXY_ERROR(short_labels.validate(), ErrorKind::invalid_argument, "rows");
}

TEST(C45, SeparableSingleFeatureIsDepthOne) {
  std::vector<FeatureVector> x;
  std::vector<GalaxyClass> y;
  for (int i = 0; i < 20; ++i) {
    const double v = i / 19.0;
    x.push_back({v});
    y.push_back(v > 0.5 ? S : E);
  }
  const LabeledDataset d = make(x, y);
  const TrainedModel m = train_c45(d);
  const auto& tree = std::get<DecisionTree>(m.body());
  EXPECT_EQ(tree.depth(), 1u);
  EXPECT_EQ(tree.leaf_count(), 2u);
  EXPECT_EQ(training_accuracy(m, d), 1.0);
}

TEST(C45, SingleClassIsOneLeaf) {
  const LabeledDataset d = make({{1, 2}, {3, 1}, {0, 0}}, {I, I, I});
  const TrainedModel m = train_c45(d);
  const auto& tree = std::get<DecisionTree>(m.body());
  EXPECT_EQ(tree.nodes.size(), 1u);
  EXPECT_EQ(m.predict(std::vector<double>{9, 9}), I);
}

TEST(C45, ZeroRowsRejected) {
  LabeledDataset d;
  d.feature_names = {"a"};
  EXPECT_GALAXY_ERROR(train_c45(d), ErrorKind::invalid_argument, "zero rows");
}

TEST(C45, FourPointThresholdIsMidpoint) {
  const LabeledDataset d = make({{0}, {1}, {2}, {3}}, {E, E, S, S});
  // Oracle: gain ratio of every candidate cut, entropies by hand.
  double best_ratio = -1, best_cut = 0;
  for (int cut = 1; cut < 4; ++cut) {
    const double nl = cut, nr = 4 - cut;
    const double el = std::min(cut, 2), sl = cut - el;
    const double er = 2 - el, sr = 2 - sl;
    const double gain = 1.0 - nl / 4 * entropy2(el, sl) - nr / 4 * entropy2(er, sr);
    const double ratio = gain / entropy2(nl, nr);
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best_cut = cut - 0.5;
    }
  }
  EXPECT_EQ(best_cut, 1.5);
  TreeParams params;
  params.min_leaf = 1;  // let every candidate compete
  for (const TreeParams& p : {TreeParams{}, params}) {
    const TrainedModel m = train_c45(d, p);
    const auto& tree = std::get<DecisionTree>(m.body());
    ASSERT_EQ(tree.nodes[0].feature, 0);
    EXPECT_EQ(tree.nodes[0].threshold, best_cut);
  }
}

TEST(C45, TiesGoToLowestFeature) {
  // Both features separate the classes identically.
  const LabeledDataset d = make({{0, 10}, {1, 11}, {2, 12}, {3, 13}}, {E, E, S, S});
  const TrainedModel m = train_c45(d);
  EXPECT_EQ(std::get<DecisionTree>(m.body()).nodes[0].feature, 0);
}

TEST(C45, PessimisticEstimate) {
  EXPECT_NEAR(pessimistic_extra_errors(6, 0, 0.25), 6 * (1 - std::pow(0.25, 1.0 / 6)), 1e-12);
  EXPECT_NEAR(pessimistic_extra_errors(16, 1, 0.25), 1.47573, 1e-4);  // normal-approximation bound, by hand
  EXPECT_GT(pessimistic_extra_errors(16, 1, 0.1), pessimistic_extra_errors(16, 1, 0.25));
  EXPECT_EQ(pessimistic_extra_errors(4, 4, 0.25), 0.0);
}

TEST(C45, PruningShrinksNoisyTrees) {
  Rng rng(5);
  std::vector<FeatureVector> x;
  std::vector<GalaxyClass> y;
  for (int i = 0; i < 200; ++i) {
    const double v = rng.uniform();
    x.push_back({v, rng.uniform()});
    y.push_back((v > 0.5) != (rng.uniform() < 0.15) ? S : E);  // 15% label noise
  }
  const LabeledDataset d = make(x, y);
  TreeParams unpruned;
  unpruned.prune = false;
  const auto full = std::get<DecisionTree>(train_c45(d, unpruned).body());
  const auto pruned = std::get<DecisionTree>(train_c45(d).body());
  EXPECT_LT(pruned.leaf_count(), full.leaf_count());
  EXPECT_EQ(pruned.nodes[0].feature, 0);
  EXPECT_NEAR(pruned.nodes[0].threshold, 0.5, 0.1);
}

TEST(C45, ConfidenceValidated) {
  TreeParams p;
  p.confidence = 0;
  EXPECT_GALAXY_ERROR(train_c45(make({{0}, {1}}, {E, S}), p), ErrorKind::invalid_argument, "confidence");
}

TEST(Knn, ExactMatchShortCircuits) {
  const std::vector<FeatureVector> pts = {{0, 0}, {5, 5}, {5.1, 5}, {5, 5.1}};
  const std::vector<GalaxyClass> labels = {I, S, S, S};
  EXPECT_EQ(knn_vote(pts, labels, std::vector<double>{0, 0}, 3), I);
  const LabeledDataset d = make(pts, labels);
  EXPECT_EQ(train_knn(d).predict(std::vector<double>{0, 0}), I);
}

TEST(Knn, ZeroDistanceTiesUseMajorityThenClassOrder) {
  const std::vector<FeatureVector> pts = {{1}, {1}, {1}, {2}};
  EXPECT_EQ(knn_vote(pts, std::vector<GalaxyClass>{S, I, I, E}, std::vector<double>{1}, 3), I);
  EXPECT_EQ(knn_vote(pts, std::vector<GalaxyClass>{S, E, I, E}, std::vector<double>{1}, 3), E);
}

TEST(Knn, InverseSquareWeights) {
  const std::vector<FeatureVector> pts = {{0, 0}, {1, 0}, {2, 0}};
  const std::vector<GalaxyClass> labels = {E, S, S};
  // 1/0.16 = 6.25 against 1/0.36 + 1/2.56 = 3.17.
  EXPECT_EQ(knn_vote(pts, labels, std::vector<double>{0.4, 0}, 3), E);
  EXPECT_EQ(train_knn(make(pts, labels)).predict(std::vector<double>{0.4, 0}), E);
  // Unweighted majority would say S; the weights matter.
  EXPECT_EQ(knn_vote(pts, labels, std::vector<double>{0.8, 0}, 3), S);
}

TEST(Knn, KEqualsMDominantClass) {
  const std::vector<FeatureVector> pts = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  EXPECT_EQ(knn_vote(pts, std::vector<GalaxyClass>{E, S, S, S}, std::vector<double>{0, 0}, 4), S);
}

TEST(Knn, OneNearestNeighbourMemorizesDistinctPoints) {
  Rng rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const LabeledDataset d = blobs(60, 4, 100 + trial);
    KnnParams p;
    p.k = 1;
    EXPECT_EQ(training_accuracy(train_knn(d, p), d), 1.0);
  }
}

TEST(Knn, EmptyOrZeroK) {
  EXPECT_GALAXY_ERROR(knn_vote(std::vector<FeatureVector>{}, std::vector<GalaxyClass>{}, std::vector<double>{1}, 3),
                      ErrorKind::invalid_argument, "empty");
  KnnParams p;
  p.k = 0;
  EXPECT_GALAXY_ERROR(train_knn(make({{0}}, {E}), p), ErrorKind::invalid_argument, "k must be positive");
}

TEST(Scaler, PopulationStatisticsAndConstantColumns) {
  const Scaler s = Scaler::fit({{1, 5}, {3, 5}});
  EXPECT_EQ(s.mean, (std::vector<double>{2, 5}));
  EXPECT_EQ(s.scale, (std::vector<double>{1, 1}));
  EXPECT_EQ(s.apply(std::vector<double>{4, 7}), (std::vector<double>{2, 2}));
}

TEST(Forest, SingleTreeHookEqualsUnprunedTree) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const LabeledDataset d = blobs(80, 5, 200 + seed);
    ForestParams fp;
    fp.trees = 1;
    fp.features_per_split = d.arity();
    fp.bootstrap = false;
    fp.min_leaf = 1;
    TreeParams tp;
    tp.prune = false;
    tp.min_leaf = 1;
    const TrainedModel forest = train_forest(d, fp);
    const TrainedModel tree = train_c45(d, tp);
    EXPECT_EQ(std::get<ForestModel>(forest.body()).trees.front().nodes.size(),
              std::get<DecisionTree>(tree.body()).nodes.size());
    Rng rng(seed);
    for (int q = 0; q < 500; ++q) {
      FeatureVector x(d.arity());
      for (double& v : x) v = rng.uniform(-3, 4);
      ASSERT_EQ(forest.predict(x), tree.predict(x));
    }
  }
}

TEST(Forest, SameSeedSameForest) {
  const LabeledDataset d = blobs(100, 6, 7);
  ForestParams p;
  p.trees = 30;
  p.seed = 99;
  EXPECT_EQ(train_forest(d, p).to_json(), train_forest(d, p).to_json());
  ForestParams other = p;
  other.seed = 100;
  EXPECT_NE(train_forest(d, other).to_json(), train_forest(d, p).to_json());
}

TEST(Forest, SelfConsistentAcrossCalls) {
  const LabeledDataset d = blobs(100, 6, 8);
  const TrainedModel m = train_forest(d);
  Rng rng(1);
  for (int q = 0; q < 100; ++q) {
    FeatureVector x(6);
    for (double& v : x) v = rng.uniform(-3, 4);
    const GalaxyClass first = m.predict(x);
    EXPECT_EQ(m.predict(x), first);
  }
}

TEST(Forest, BeatsPrunedTreeOnTwoMoons) {
  const LabeledDataset d = two_moons(200, 3);
  const double forest = training_accuracy(train_forest(d), d);
  const double tree = training_accuracy(train_c45(d), d);
  EXPECT_GE(forest, tree);
}

TEST(Forest, TrainSeedOverridesConfig) {
  const LabeledDataset d = blobs(60, 4, 9);
  AlgorithmConfig c;
  c.algorithm = Algorithm::forest;
  c.forest.trees = 10;
  ForestParams p = c.forest;
  p.seed = 1234;
  EXPECT_EQ(train(d, c, 1234).to_json(), train_forest(d, p).to_json());
}

TEST(TreesAndForests, InvariantUnderMonotoneTransforms) {
  // Integer-valued features: every learned threshold falls strictly between
  // lattice points, so predictions on the lattice depend only on order.
  Rng rng(77);
  std::vector<FeatureVector> raw;
  std::vector<GalaxyClass> y;
  for (int i = 0; i < 120; ++i) {
    const double a = static_cast<double>(rng.index(10)), b = static_cast<double>(rng.index(10));
    raw.push_back({a, b});
    const double score = a + 0.5 * b + rng.normal();
    y.push_back(score < 5 ? E : (score < 9 ? S : I));
  }
  auto transform = [](FeatureVector v) {
    v[0] = std::exp(v[0]);
    v[1] = v[1] * v[1] * v[1] - 40.0;
    return v;
  };
  std::vector<FeatureVector> moved;
  for (const auto& r : raw) moved.push_back(transform(r));
  const LabeledDataset d1 = make(raw, y);
  const LabeledDataset d2 = make(moved, y);
  TreeParams unpruned;
  unpruned.prune = false;
  ForestParams fp;
  fp.trees = 15;
  const std::vector<std::pair<TrainedModel, TrainedModel>> pairs = {
      {train_c45(d1), train_c45(d2)},
      {train_c45(d1, unpruned), train_c45(d2, unpruned)},
      {train_forest(d1, fp), train_forest(d2, fp)},
  };
  for (const auto& [m1, m2] : pairs) {
    for (int a = 0; a < 10; ++a)
      for (int b = 0; b < 10; ++b) {
        const FeatureVector q = {double(a), double(b)};
        ASSERT_EQ(m1.predict(q), m2.predict(transform(q))) << a << "," << b;
      }
  }
}

TEST(Svm, SeparableSetFitsPerfectly) {
  const LabeledDataset d = make({{0, 0}, {0, 1}, {3, 0}, {3, 1}}, {E, E, S, S});
  EXPECT_EQ(training_accuracy(train_svm(d), d), 1.0);
}

TEST(Svm, ContradictoryDuplicatesTrain) {
  const LabeledDataset d = make({{1, 1}, {1, 1}, {0, 3}, {2, 0}}, {E, S, E, S});
  const TrainedModel m = train_svm(d);
  const GalaxyClass p = m.predict(std::vector<double>{1, 1});
  EXPECT_TRUE(p == E || p == S);
  const auto& svm = std::get<SvmModel>(m.body());
  EXPECT_TRUE(std::isfinite(svm.machines.front().rho));
}

TEST(Svm, XorWithQuadraticKernel) {
  const std::vector<FeatureVector> x = {{0, 0}, {1, 1}, {0, 1}, {1, 0}};
  const std::vector<int> y = {1, 1, -1, -1};
  SvmParams params;
  const SvmSolution sol = solve_svm_dual(x, y, params);
  // Feasibility.
  double balance = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_GE(sol.alpha[i], 0.0);
    EXPECT_LE(sol.alpha[i], params.c);
    balance += sol.alpha[i] * y[i];
  }
  EXPECT_LE(std::abs(balance), 1e-6);
  // Exhaustive grid over the feasible set: alpha3 = alpha0 + alpha1 - alpha2.
  auto objective = [&](const std::array<double, 4>& a) {
    double v = 0;
    for (std::size_t i = 0; i < 4; ++i) {
      v -= a[i];
      for (std::size_t j = 0; j < 4; ++j) v += 0.5 * a[i] * a[j] * y[i] * y[j] * poly2_kernel(x[i], x[j]);
    }
    return v;
  };
  double grid_best = std::numeric_limits<double>::infinity();
  const int steps = 100;
  for (int i0 = 0; i0 <= steps; ++i0)
    for (int i1 = 0; i1 <= steps; ++i1)
      for (int i2 = 0; i2 <= steps; ++i2) {
        const double a0 = params.c * i0 / steps, a1 = params.c * i1 / steps, a2 = params.c * i2 / steps;
        const double a3 = a0 + a1 - a2;
        if (a3 < 0 || a3 > params.c) continue;
        grid_best = std::min(grid_best, objective({a0, a1, a2, a3}));
      }
  const double smo = objective({sol.alpha[0], sol.alpha[1], sol.alpha[2], sol.alpha[3]});
  EXPECT_NEAR(sol.objective, smo, 1e-9);
  EXPECT_LE(smo, grid_best + 1e-3);
  EXPECT_GE(smo, grid_best - 0.05);  // the grid is fine enough to land near the optimum

  const LabeledDataset d = make(x, {E, E, S, S});
  EXPECT_EQ(training_accuracy(train_svm(d), d), 1.0);
}

TEST(Svm, DualFeasibilityAndKktOnRandomProblems) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    Rng rng(seed);
    std::vector<FeatureVector> x;
    std::vector<int> y;
    for (int i = 0; i < 60; ++i) {
      const int label = i % 2 ? 1 : -1;
      x.push_back({rng.normal() + 0.8 * label, rng.normal(), rng.normal()});
      y.push_back(label);
    }
    SvmParams params;
    params.c = 0.5 + seed;
    const SvmSolution sol = solve_svm_dual(x, y, params);
    double balance = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      ASSERT_GE(sol.alpha[i], 0.0);
      ASSERT_LE(sol.alpha[i], params.c);
      balance += sol.alpha[i] * y[i];
    }
    EXPECT_LE(std::abs(balance), 1e-6);
    // KKT: y_i f(x_i) >= 1 at alpha 0, <= 1 at C, == 1 between, within tolerance.
    for (std::size_t i = 0; i < x.size(); ++i) {
      double f = -sol.rho;
      for (std::size_t j = 0; j < x.size(); ++j) f += sol.alpha[j] * y[j] * poly2_kernel(x[j], x[i]);
      const double margin = y[i] * f;
      if (sol.alpha[i] <= 0) EXPECT_GE(margin, 1 - 2 * params.tolerance) << i;
      else if (sol.alpha[i] >= params.c) EXPECT_LE(margin, 1 + 2 * params.tolerance) << i;
      else EXPECT_NEAR(margin, 1.0, 2 * params.tolerance) << i;
    }
  }
}

TEST(Svm, NonConvergenceIsTrainingFailure) {
  const LabeledDataset d = blobs(80, 3, 21);
  SvmParams p;
  p.max_iterations = 2;
  EXPECT_GALAXY_ERROR(train_svm(d, p), ErrorKind::training_failure, "did not converge");
}

TEST(Majority, PredictsMostFrequentWithClassOrderTies) {
  EXPECT_EQ(train_majority(make({{0}, {1}, {2}}, {I, S, S})).predict(std::vector<double>{5}), S);
  EXPECT_EQ(train_majority(make({{0}, {1}}, {I, E})).predict(std::vector<double>{5}), E);
}

TEST(Models, AtLeastMajorityAccuracyOnTrainingSet) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const LabeledDataset d = blobs(90, 4, 300 + seed);
    const auto counts = d.class_counts();
    const double majority =
        static_cast<double>(*std::max_element(counts.begin(), counts.end())) / static_cast<double>(d.rows());
    for (const AlgorithmConfig& c : all_configs()) {
      EXPECT_GE(training_accuracy(train(d, c, seed), d), majority - 1e-12) << to_string(c.algorithm);
    }
  }
}

TEST(Models, PredictRejectsBadInput) {
  const LabeledDataset d = blobs(30, 3, 1);
  for (const AlgorithmConfig& c : all_configs()) {
    const TrainedModel m = train(d, c, 1);
    EXPECT_GALAXY_ERROR(m.predict(std::vector<double>{1, 2}), ErrorKind::invalid_argument, "arity");
    EXPECT_GALAXY_ERROR(m.predict(std::vector<double>{1, std::nan(""), 2}), ErrorKind::invalid_argument,
                        "non-finite");
    EXPECT_GALAXY_ERROR(m.predict(std::vector<double>{1, std::numeric_limits<double>::infinity(), 2}),
                        ErrorKind::invalid_argument, "non-finite");
  }
}

TEST(Models, SerializationRoundTrip) {
  const LabeledDataset d = blobs(120, 5, 55);
  Rng rng(56);
  for (const AlgorithmConfig& c : all_configs()) {
    const TrainedModel m = train(d, c, 3);
    const std::string text = m.to_json();
    const TrainedModel back = TrainedModel::from_json(text);
    EXPECT_EQ(back.algorithm(), m.algorithm());
    EXPECT_EQ(back.to_json(), text);
    for (int q = 0; q < 1000; ++q) {
      FeatureVector x(5);
      for (double& v : x) v = rng.uniform(-4, 5);
      ASSERT_EQ(back.predict(x), m.predict(x)) << to_string(c.algorithm);
    }
  }
}

TEST(Models, MalformedJsonRejected) {
  EXPECT_GALAXY_ERROR(TrainedModel::from_json("[1, 2"), ErrorKind::format, "not valid JSON");
  EXPECT_GALAXY_ERROR(TrainedModel::from_json(R"({"format_version": 99})"), ErrorKind::format, "format version");
  EXPECT_GALAXY_ERROR(TrainedModel::from_json(R"({"format_version": 1, "algorithm": "c45"})"), ErrorKind::format,
                      "malformed");
}
