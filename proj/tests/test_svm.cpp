#include <random>

#include "aist/error.hpp"
#include "aist/svm.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace aist;
using aist::testing::benchmark_system;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector x(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double e : v) x[i++] = e;
  return x;
}

MulticlassModel manual(SvmMode mode, FeatureMap map, Matrix W, Vector b, int classes) {
  MulticlassModel m;
  m.mode = mode;
  m.feature_map = map;
  m.state_dim = 2;
  m.W = std::move(W);
  m.b = std::move(b);
  m.zeta = 1.0;
  std::vector<Label> labels;
  for (int c = 1; c <= classes; ++c) labels.push_back({c});
  m.label_table = LabelTable(labels);
  return m;
}

// Two cones split by sign(x₁² − x₂²), leaving out a thin band around the
// boundary so a margin exists.
ScenarioSet hyperbola_set(std::size_t n, std::uint64_t seed) {
  ScenarioSet set;
  set.ell = 1;
  set.label_table = LabelTable({{1}, {2}});
  for (const auto& x : sample_states(2, 4 * n, seed)) {
    const double q = x[0] * x[0] - x[1] * x[1];
    if (std::abs(q) < 0.1) continue;
    set.samples.push_back({x, {q > 0 ? 1 : 2}});
    if (set.size() == n) break;
  }
  return set;
}

}  // namespace

TEST_CASE("veronese map") {
  CHECK(veronese2(vec({1, 0})) == vec({1, 0, 0}));
  CHECK(veronese2(vec({2, 3})) == vec({4, 6, 9}));
  CHECK(veronese2(vec({1, 2, 3, 4})).size() == 10);
  CHECK(veronese2(vec({1, 2, 3})) == vec({1, 2, 3, 4, 6, 9}));
  CHECK(feature_dim(FeatureMap::veronese2, 4) == 10);
  CHECK(feature_dim(FeatureMap::raw, 4) == 4);
}

TEST_CASE("g value arithmetic") {
  Matrix W(2, 2);
  W << 1, 0, 0, 0;
  const auto flat = manual(SvmMode::flat, FeatureMap::raw, W, Vector::Zero(2), 2);
  CHECK(g_value(flat, {vec({5, 0}), {1}}) == doctest::Approx(-4.0));
  CHECK(g_value(flat, {vec({5, 0}), {2}}) == doctest::Approx(6.0));
  CHECK_THROWS_AS(g_value(flat, {vec({5, 0}), {7}}), ClassificationDomainError);

  Matrix Wc(1, 3);
  Wc << 1, 0, -1;
  auto conic = manual(SvmMode::conic, FeatureMap::veronese2, Wc, Vector::Zero(1), 1);
  conic.label_table = LabelTable(std::vector<Label>{Label{1}});
  // A one-class model has no competing constraint.
  CHECK(g_value(conic, {vec({2, 1}), {1}}) == 0.0);

  Matrix Wc2(2, 3);
  Wc2 << 1, 0, -1, 0, 0, 1;
  const auto conic2 = manual(SvmMode::conic, FeatureMap::veronese2, Wc2, Vector::Zero(2), 2);
  CHECK(g_value(conic2, {vec({2, 1}), {1}}) == doctest::Approx(-2.0));
  // Class 2 must stay below zero on W₁ and above ζ on W₂.
  CHECK(g_value(conic2, {vec({2, 1}), {2}}) == doctest::Approx(4.0));
}

TEST_CASE("predict rules") {
  Matrix W(2, 2);
  W << 3, 0, 5, 0;
  const auto flat = manual(SvmMode::flat, FeatureMap::raw, W, Vector::Zero(2), 2);
  CHECK(predict(flat, vec({1, 0})) == 1);
  CHECK(predict_label(flat, vec({1, 0})) == Label{2});

  Matrix Wc(2, 3);
  Wc << -1, 0, 0, 2, 0, 0;
  const auto conic = manual(SvmMode::conic, FeatureMap::veronese2, Wc, Vector::Zero(2), 2);
  CHECK(predict(conic, vec({1, 0})) == 1);
  Matrix Wn(2, 3);
  Wn << -1, 0, 0, -1, 0, 0;
  CHECK(predict(manual(SvmMode::conic, FeatureMap::veronese2, Wn, Vector::Zero(2), 2), vec({1, 0})) == 1);
  Wn << 1, 0, 0, 1, 0, 0;
  CHECK(predict(manual(SvmMode::conic, FeatureMap::veronese2, Wn, Vector::Zero(2), 2), vec({1, 0})) == 0);
}

TEST_CASE("all-zero model violates every constraint") {
  const auto set = generate_dataset(benchmark_system(), 1, 200, 2);
  auto m = manual(SvmMode::flat, FeatureMap::veronese2, Matrix::Zero(3, 3), Vector::Zero(3), 3);
  m.label_table = set.label_table;
  CHECK(count_violations(m, set) == set.size());
}

TEST_CASE("single-class training gives the trivial model") {
  const auto set = generate_dataset(benchmark_system(1), 2, 50, 2);
  for (auto mode : {SvmMode::flat, SvmMode::conic}) {
    TrainOptions opts;
    opts.allow_conic_sequences = true;
    const auto m = train(set, mode, 1000.0, 1.0, opts);
    CHECK(m.classes() == 1);
    for (const auto& s : set.samples) CHECK(predict_label(m, s.x) == Label{1, 1});
    CHECK(count_violations(m, set) == 0);
  }
}

TEST_CASE("conic training recovers a known quadratic separator") {
  const auto set = hyperbola_set(400, 31);
  const auto m = train(set, SvmMode::conic, 1000.0, 1.0);
  REQUIRE(m.classes() == 2);
  const Vector w1 = m.W.row(0).transpose();
  const Vector truth = vec({1, 0, -1}).normalized();
  CHECK(w1.normalized().dot(truth) > 0.99);
  CHECK(m.b.isZero(0.0));
  for (const auto& s : set.samples) CHECK(predict_label(m, s.x) == s.label);
  CHECK(m.training.converged);
}

TEST_CASE("conic decisions ignore scale and sign") {
  const auto set = generate_dataset(benchmark_system(), 1, 500, 4);
  const auto m = train(set, SvmMode::conic, 100.0, 1.0);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> c(-5.0, 5.0);
  for (const auto& x : sample_states(2, 200, 5)) {
    double k = c(rng);
    if (k == 0.0) k = 1.0;
    CHECK(predict(m, k * x) == predict(m, x));
  }
}

TEST_CASE("conic mode refuses sequence labels by default") {
  const auto set = generate_dataset(benchmark_system(), 2, 100, 4);
  CHECK_THROWS_AS(train(set, SvmMode::conic, 10.0, 1.0), UnsupportedConfiguration);
  TrainOptions opts;
  opts.allow_conic_sequences = true;
  CHECK_NOTHROW(train(set, SvmMode::conic, 10.0, 1.0, opts));
  CHECK_THROWS_AS(train(set, SvmMode::flat, 0.0, 1.0), DomainError);
}

TEST_CASE("flat decisions are invariant to a common shift") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd;
  for (int rep = 0; rep < 20; ++rep) {
    Matrix W(4, 3);
    Vector b(4);
    for (int i = 0; i < W.size(); ++i) W.data()[i] = nd(rng);
    for (int i = 0; i < 4; ++i) b[i] = nd(rng);
    const auto m = manual(SvmMode::flat, FeatureMap::veronese2, W, b, 4);
    auto shifted = m;
    Vector shift(3);
    shift << nd(rng), nd(rng), nd(rng);
    const double s = nd(rng);
    for (int j = 0; j < 4; ++j) {
      shifted.W.row(j) += shift.transpose();
      shifted.b[j] += s;
    }
    for (const auto& x : sample_states(2, 100, static_cast<std::uint64_t>(rep)))
      CHECK(predict(shifted, x) == predict(m, x));
  }
}

TEST_CASE("misclassification implies a violated constraint") {
  const auto sys = benchmark_system();
  const auto train_set = generate_dataset(sys, 2, 600, 41);
  const auto m = train(train_set, SvmMode::flat, 100.0, 1.0);
  const auto test_set = generate_dataset(sys, 2, 2000, 42);
  std::size_t wrong = 0;
  for (const auto& s : test_set.samples) {
    if (!m.label_table.find(s.label)) continue;
    if (predict_label(m, s.x) != s.label) {
      ++wrong;
      CHECK(g_value(m, s) > 0.0);
    }
  }
  // Random models misclassify plenty, exercising the implication.
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  auto r = m;
  for (int i = 0; i < r.W.size(); ++i) r.W.data()[i] = nd(rng);
  for (int i = 0; i < r.b.size(); ++i) r.b[i] = nd(rng);
  for (const auto& s : test_set.samples) {
    if (!r.label_table.find(s.label)) continue;
    if (predict_label(r, s.x) != s.label) {
      ++wrong;
      CHECK(g_value(r, s) > 0.0);
    }
  }
  CHECK(wrong > 0);
}

TEST_CASE("more slack weight never increases total slack") {
  const auto set = generate_dataset(benchmark_system(), 1, 300, 77);
  TrainOptions opts;
  opts.tolerance = 1e-10;
  opts.stall_tolerance = 1e-13;
  for (auto mode : {SvmMode::flat, SvmMode::conic}) {
    double previous = std::numeric_limits<double>::infinity();
    for (double rho : {0.1, 1.0, 10.0, 100.0}) {
      const auto m = train(set, mode, rho, 1.0, opts);
      CHECK(m.training.relative_gap <= 1e-6);
      CHECK(m.training.total_slack <= previous + 1e-6 * std::max(1.0, previous));
      previous = m.training.total_slack;
    }
  }
}

TEST_CASE("training certificate brackets the objective") {
  const auto set = generate_dataset(benchmark_system(), 3, 400, 5);
  const auto m = train(set, SvmMode::flat, 50.0, 1.0);
  CHECK(m.training.dual_bound <= m.training.objective);
  CHECK(m.training.relative_gap >= 0.0);
  double slack = 0.0;
  for (const auto& s : set.samples) slack += std::max(0.0, g_value(m, s));
  CHECK(slack == doctest::Approx(m.training.total_slack).epsilon(1e-9));
  const double objective = m.W.squaredNorm() + m.b.squaredNorm() + m.rho * slack;
  CHECK(objective == doctest::Approx(m.training.objective).epsilon(1e-9));
}

TEST_CASE("training is deterministic and batch paths agree") {
  const auto set = generate_dataset(benchmark_system(), 2, 300, 6);
  const auto a = train(set, SvmMode::flat, 100.0, 1.0);
  const auto b = train(set, SvmMode::flat, 100.0, 1.0);
  CHECK(a.W == b.W);
  CHECK(a.b == b.b);

  std::vector<Vector> xs;
  std::vector<int> cls;
  for (const auto& s : set.samples) {
    xs.push_back(s.x);
    cls.push_back(*a.label_table.find(s.label));
  }
  const auto soa = to_soa(xs);
  const auto pred = predict_batch(a, soa, xs.size());
  const auto g = g_values_batch(a, soa, cls);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    CHECK(pred[i] == predict(a, xs[i]));
    CHECK(g[i] == doctest::Approx(g_value(a, set.samples[i])).epsilon(1e-12));
  }
}

TEST_CASE("model JSON round trip") {
  const auto set = generate_dataset(benchmark_system(), 1, 200, 9);
  const auto m = train(set, SvmMode::conic, 100.0, 1.0);
  const auto back = MulticlassModel::from_json(m.to_json());
  CHECK(back.W == m.W);
  CHECK(back.label_table == m.label_table);
  CHECK(back.mode == SvmMode::conic);
  CHECK(back.to_json().dump() == m.to_json().dump());

  auto j = m.to_json();
  j["b"][0] = 1.0;
  CHECK_THROWS_AS(MulticlassModel::from_json(j), DomainError);
}
