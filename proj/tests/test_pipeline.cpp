#include <set>

#include "aist/error.hpp"
#include "aist/pipeline.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace aist;
using aist::testing::benchmark_system;

namespace {

PipelineConfig small_config(int ell, std::size_t N) {
  PipelineConfig c;
  c.ell = ell;
  c.N = N;
  c.holdout = 500;
  c.queries = 20;
  c.rho = 100.0;
  return c;
}

}  // namespace

TEST_CASE("heartbeat-one pipeline collapses to the period") {
  const auto sys = benchmark_system(1);
  const auto r = run_pipeline(sys, small_config(3, 400));
  CHECK(r.abstraction.size() == 1);
  CHECK(r.report.eac == Rational(0));
  for (const auto& rec : r.report.records) {
    CHECK(rec.sac_seconds(sys.h()) == doctest::Approx(sys.h()));
    CHECK(rec.lac_seconds(sys.h()) == doctest::Approx(sys.h()));
  }
  CHECK(r.certification.certificate.s_star == 0);
  CHECK(r.certification.certificate.eps_hi == epsilon_bounds(400, 0, 1e-6).hi);
}

TEST_CASE("pipeline output is a pure function of config and seed") {
  const auto sys = benchmark_system();
  const auto a = run_pipeline(sys, small_config(2, 300));
  const auto b = run_pipeline(sys, small_config(2, 300));
  CHECK(a.report_json().dump() == b.report_json().dump());
  auto other = small_config(2, 300);
  other.seed = 2;
  CHECK(run_pipeline(sys, other).report_json().dump() != a.report_json().dump());
}

TEST_CASE("mode selection and config validation") {
  CHECK(resolve_mode("auto", 1) == SvmMode::conic);
  CHECK(resolve_mode("auto", 4) == SvmMode::flat);
  CHECK(resolve_mode("flat", 1) == SvmMode::flat);
  auto c = small_config(1, 10);
  c.beta = 1.0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = small_config(1, 10);
  c.rho = -1.0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = small_config(1, 10);
  c.mode = "spiral";
  CHECK_THROWS_AS(c.validate(), DomainError);
}

TEST_CASE("sweep states cover the sphere deterministically") {
  const auto planar = sweep_states(2, 1000);
  CHECK(planar.size() == 1000);
  for (const auto& x : planar) CHECK(std::abs(x.norm() - 1.0) < 1e-12);
  // Opposite points are both present for an even count.
  CHECK((planar[0] + planar[500]).norm() < 1e-12);
  const auto spatial = sweep_states(3, 5000);
  Vector mean = Vector::Zero(3);
  for (const auto& x : spatial) mean += x;
  CHECK((mean / 5000.0).norm() < 0.02);
  CHECK(sweep_states(3, 10)[3] == spatial[3]);
  CHECK(default_sweep_size(2) == 100000);
  CHECK(default_sweep_size(4) == 1000000);
}

TEST_CASE("heartbeat-one comparison finds identical abstractions") {
  const auto r = run_compare(benchmark_system(1), small_config(2, 200), 1000, 2);
  CHECK(r.report.data_driven.states == r.report.oracle.states);
  CHECK(r.report.data_driven.edges == r.report.oracle.edges);
  CHECK(r.report.states_only_data.empty());
  CHECK(r.report.states_only_oracle.empty());
  CHECK(r.report.edges_only_data == 0);
  CHECK(r.report.edges_only_oracle == 0);
}

TEST_CASE("region plot") {
  const auto flat = render_regions(benchmark_system(1), 1, 40);
  CHECK(flat.region_count == 1);
  CHECK(flat.symmetric);

  const auto sys = benchmark_system();
  const auto plot = render_regions(sys, 2, 60);
  CHECK(plot.symmetric);
  const auto cones = trigger_cones(sys);
  std::set<Label> labels;
  for (int j = 0; j < 60; ++j)
    for (int i = 0; i < 60; ++i) {
      Vector p(2);
      p << -1.0 + (i + 0.5) / 30.0, -1.0 + (j + 0.5) / 30.0;
      if (p.squaredNorm() > 1.0) continue;
      labels.insert(ist_sequence(cones, p, 2));
    }
  CHECK(plot.region_count == static_cast<int>(labels.size()));
  CHECK(plot.svg.rfind("<svg", 0) == 0);

  const auto data = generate_dataset(sys, 2, 300, 1);
  const auto model = train(data, SvmMode::flat, 100.0, 1.0);
  const auto overlay = render_regions(sys, 2, 60, &model);
  CHECK(overlay.svg.find("<line") != std::string::npos);

  Matrix A = Matrix::Zero(3, 3), B = Matrix::Zero(3, 1), K = Matrix::Zero(1, 3);
  const LtiPetcSystem cube(A, B, K, SigmaTrigger{0.1}, 0.1, 2);
  CHECK_THROWS_AS(render_regions(cube, 1, 20), UnsupportedConfiguration);
}
