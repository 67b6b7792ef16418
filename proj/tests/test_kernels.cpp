#include <cstring>
#include <random>

#include "aist/error.hpp"
#include "aist/simd.hpp"
#include "doctest.h"

using namespace aist::simd;

namespace {

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  std::vector<double> v(n);
  for (auto& x : v) x = nd(rng);
  return v;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

std::vector<Isa> vector_variants() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::avx2, Isa::neon})
    if (isa_available(isa)) out.push_back(isa);
  return out;
}

}  // namespace

TEST_CASE("scalar kernels compute the documented quantities") {
  // S = [[1,2],[2,-1]], x = (3,4): 9 + 48 − 16 = 41.
  const std::vector<double> S{1, 2, 2, -1};
  const std::vector<double> soa{3, 1, 4, 0};
  std::vector<double> out(2);
  quadratic_forms(S, 2, soa, out, Isa::scalar);
  CHECK(out[0] == 41.0);
  CHECK(out[1] == 1.0);

  std::vector<double> ver(6);
  veronese2(soa, 2, ver, Isa::scalar);
  CHECK(ver == std::vector<double>{9, 1, 12, 0, 16, 0});

  const std::vector<double> W{1, 2, 0, -1};
  const std::vector<double> b{0.5, 0};
  std::vector<double> scores(4);
  affine_scores(W, b, 2, 2, soa, scores, Isa::scalar);
  CHECK(scores == std::vector<double>{11.5, 1.5, -4, 0});

  CHECK_THROWS_AS(quadratic_forms(S, 2, soa, std::span<double>(out.data(), 1), Isa::scalar), aist::ShapeError);
}

TEST_CASE("vector kernels are bit-identical to the scalar reference") {
  std::mt19937_64 rng(99);
  const auto variants = vector_variants();
  if (variants.empty()) MESSAGE("no vector variant on this machine; only the scalar path is exercised");
  for (Isa isa : variants) {
    CAPTURE(isa_name(isa));
    for (std::size_t n : {1, 2, 3, 4, 6}) {
      for (std::size_t count : {1, 3, 4, 5, 8, 17, 64, 1001}) {
        const auto sym_half = random_vec(n * n, rng);
        std::vector<double> sym(n * n);
        for (std::size_t r = 0; r < n; ++r)
          for (std::size_t c = 0; c < n; ++c) sym[r * n + c] = sym_half[std::min(r, c) * n + std::max(r, c)];
        const auto soa = random_vec(n * count, rng);

        std::vector<double> a(count), b(count);
        quadratic_forms(sym, n, soa, a, Isa::scalar);
        quadratic_forms(sym, n, soa, b, isa);
        CHECK(bit_equal(a, b));

        const std::size_t d = n * (n + 1) / 2;
        std::vector<double> va(d * count), vb(d * count);
        veronese2(soa, n, va, Isa::scalar);
        veronese2(soa, n, vb, isa);
        CHECK(bit_equal(va, vb));

        for (std::size_t classes : {1, 3, 7}) {
          const auto W = random_vec(classes * n, rng);
          const auto bias = random_vec(classes, rng);
          std::vector<double> sa(classes * count), sb(classes * count);
          affine_scores(W, bias, classes, n, soa, sa, Isa::scalar);
          affine_scores(W, bias, classes, n, soa, sb, isa);
          CHECK(bit_equal(sa, sb));
        }
      }
    }
  }
}

TEST_CASE("dispatch reports a usable variant") {
  CHECK(isa_available(Isa::scalar));
  CHECK(isa_available(detected_isa()));
  CHECK(isa_available(active_isa()));
  CHECK(isa_name(Isa::scalar) == "scalar");
  for (Isa isa : {Isa::avx2, Isa::neon})
    if (!isa_available(isa)) CHECK_THROWS_AS(kernels(isa), aist::UnsupportedConfiguration);
}
