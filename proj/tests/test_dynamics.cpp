#include <random>

#include "aist/error.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace aist;
using aist::testing::benchmark_system;

namespace {

double rel_err(const Matrix& a, const Matrix& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

Vector unit(double theta) {
  Vector x(2);
  x << std::cos(theta), std::sin(theta);
  return x;
}

}  // namespace

TEST_CASE("matrix exponential matches the series reference") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  for (int n : {1, 2, 3, 5}) {
    for (int rep = 0; rep < 20; ++rep) {
      Matrix m(n, n);
      for (int i = 0; i < n * n; ++i) m.data()[i] = nd(rng);
      const double t = 0.7;
      CHECK(rel_err(matrix_exponential(m, t), aist::testing::series_exponential(m, t)) <= 1e-10);
    }
  }
}

TEST_CASE("matrix exponential closed forms") {
  Matrix rot(2, 2);
  rot << 0, -1, 1, 0;
  Matrix expected(2, 2);
  const double t = 25.0;  // large enough to need squaring
  expected << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
  CHECK(rel_err(matrix_exponential(rot, t), expected) <= 1e-10);

  Matrix diag = Matrix::Zero(3, 3);
  diag.diagonal() << -4.0, 0.5, 2.0;
  const Matrix e = matrix_exponential(diag, 1.5);
  CHECK(e(0, 0) == doctest::Approx(std::exp(-6.0)).epsilon(1e-12));
  CHECK(e(2, 2) == doctest::Approx(std::exp(3.0)).epsilon(1e-12));
  CHECK(std::abs(e(0, 1)) == 0.0);

  CHECK(matrix_exponential(Matrix::Zero(2, 2), 3.0).isApprox(Matrix::Identity(2, 2)));
  CHECK_THROWS_AS(matrix_exponential(Matrix::Zero(2, 3), 1.0), ShapeError);
}

TEST_CASE("hold transition equals the exponential plus the held-input integral") {
  const auto sys = benchmark_system(6, 0.05);
  for (int k = 1; k <= 6; ++k) {
    const double T = k * sys.h();
    // Composite Simpson quadrature of ∫₀^T e^{As} ds.
    const int m = 400;
    Matrix integral = Matrix::Zero(2, 2);
    for (int i = 0; i <= m; ++i) {
      const double w = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      integral += w * aist::testing::series_exponential(sys.A(), T * i / m);
    }
    integral *= T / (3.0 * m);
    const Matrix expected = aist::testing::series_exponential(sys.A(), T) + integral * sys.B() * sys.K();
    CHECK(rel_err(hold_transition(sys, k), expected) <= 1e-8);

    // Independent check by integrating the ODE.
    for (double th : {0.1, 1.3, 2.9}) {
      const Vector x = unit(th);
      const Vector sim = aist::testing::rk4_hold(sys, x, T, 2000);
      CHECK((hold_transition(sys, k) * x - sim).norm() <= 1e-8);
    }
  }
  CHECK_THROWS_AS(hold_transition(sys, 0), DomainError);
  CHECK_THROWS_AS(hold_transition(sys, 7), DomainError);
}

TEST_CASE("cone forms reproduce the stacked trigger") {
  const auto sys = benchmark_system();
  const auto cones = trigger_cones(sys);
  REQUIRE(cones.N.size() == 4);
  REQUIRE(cones.M.size() == 4);
  const Matrix R = sys.triggering_matrix();
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  for (int rep = 0; rep < 200; ++rep) {
    Vector x(2);
    x << nd(rng), nd(rng);
    for (int k = 0; k < 4; ++k) {
      CHECK(cones.N[k].isApprox(cones.N[k].transpose(), 0.0));
      Vector z(4);
      z << cones.M[k] * x, x;
      const double direct = z.dot(R * z);
      const double folded = x.dot(cones.N[k] * x);
      CHECK(folded == doctest::Approx(direct).epsilon(1e-9).scale(x.squaredNorm()));
    }
  }
}

TEST_CASE("sigma trigger expands to the stacked matrix") {
  const auto sys = benchmark_system();
  const Matrix R = sys.triggering_matrix();
  Matrix expected(4, 4);
  expected << 0.99, 0, -1, 0, 0, 0.99, 0, -1, -1, 0, 1, 0, 0, -1, 0, 1;
  CHECK(R.isApprox(expected, 1e-15));
}

TEST_CASE("exact IST agrees with direct simulation") {
  const auto sys = benchmark_system();
  const auto cones = trigger_cones(sys);
  const auto xs = sample_states(2, 300, 5);
  for (const auto& x : xs) CHECK(exact_ist(cones, x) == aist::testing::simulated_ist(sys, x));
}

TEST_CASE("IST is invariant under scaling and sign") {
  const auto cones = trigger_cones(benchmark_system());
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> logc(-3.0, 3.0);
  for (const auto& x : sample_states(2, 300, 6)) {
    const double c = std::pow(10.0, logc(rng)) * (rng() % 2 ? -1.0 : 1.0);
    CHECK(exact_ist(cones, c * x) == exact_ist(cones, x));
  }
  CHECK_THROWS_AS(exact_ist(cones, Vector::Zero(2)), DomainError);
}

TEST_CASE("batch IST and sequences match the per-state path") {
  const auto cones = trigger_cones(benchmark_system());
  const auto xs = sample_states(2, 257, 12);
  const auto soa = to_soa(xs);
  const auto batch = exact_ist_batch(cones, soa, xs.size());
  const auto seqs = ist_sequences_batch(cones, soa, xs.size(), 6);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    CHECK(batch[i] == exact_ist(cones, xs[i]));
    CHECK(seqs[i] == ist_sequence(cones, xs[i], 6));
  }
}

TEST_CASE("heartbeat one always samples every period") {
  const auto sys = benchmark_system(1);
  const auto cones = trigger_cones(sys);
  for (const auto& x : sample_states(2, 50, 1)) {
    CHECK(exact_ist(cones, x) == 1);
    CHECK(ist_sequence(cones, x, 5) == std::vector<int>(5, 1));
    CHECK(empirical_aist(cones, x, 100) == doctest::Approx(sys.h()));
  }
}

TEST_CASE("empirical AIST averages the IST sequence") {
  const auto sys = benchmark_system();
  const auto cones = trigger_cones(sys);
  const Vector x = unit(0.4);
  const auto seq = ist_sequence(cones, x, 51);
  double mean = 0.0;
  for (int t : seq) mean += t;
  mean /= 51.0;
  CHECK(empirical_aist(cones, x, 50) == doctest::Approx(mean * sys.h()).epsilon(1e-12));
}

TEST_CASE("heartbeat calibration on the benchmark") {
  const auto sys = benchmark_system(40);
  const auto probes = to_soa(sample_states(2, 10000, 1));
  const auto cal = calibrate_kappa_bar(sys, probes, 10000);
  CHECK(cal.kappa_bar == 4);
  CHECK(cal.below_fraction >= 0.999);
}

TEST_CASE("system validation and config round trip") {
  Matrix A(2, 2), B(2, 1), K(1, 2);
  A << 0, 1, -2, 3;
  B << 0, 1;
  K << 0, -5;
  CHECK_THROWS_AS(LtiPetcSystem(A, B, K, SigmaTrigger{1.5}, 0.05, 4), DomainError);
  CHECK_THROWS_AS(LtiPetcSystem(A, B, K, SigmaTrigger{0.1}, 0.0, 4), DomainError);
  CHECK_THROWS_AS(LtiPetcSystem(A, B, K, SigmaTrigger{0.1}, 0.05, 0), DomainError);
  CHECK_THROWS_AS(LtiPetcSystem(A, B, Matrix::Zero(1, 3), SigmaTrigger{0.1}, 0.05, 4), ShapeError);
  Matrix R = Matrix::Identity(4, 4);
  R(0, 1) = 1.0;
  CHECK_THROWS_AS(LtiPetcSystem(A, B, K, MatrixTrigger{R}, 0.05, 4), DomainError);

  const auto sys = benchmark_system();
  const auto back = LtiPetcSystem::from_json(sys.to_json());
  CHECK(back.fingerprint() == sys.fingerprint());
  CHECK(back.A() == sys.A());
  CHECK(back.with_kappa_bar(7).kappa_bar() == 7);
  CHECK(back.with_kappa_bar(7).fingerprint() != sys.fingerprint());

  auto j = sys.to_json();
  j["trigger"] = {{"type", "matrix"}, {"R", io::matrix_to_json(sys.triggering_matrix())}};
  const auto explicit_r = LtiPetcSystem::from_json(j);
  CHECK(explicit_r.triggering_matrix() == sys.triggering_matrix());
  j.erase("A");
  CHECK_THROWS_AS(LtiPetcSystem::from_json(j), DomainError);
}
