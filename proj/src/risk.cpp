#include "aist/risk.hpp"

#include <algorithm>
#include <boost/math/distributions/binomial.hpp>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <vector>

#include "aist/error.hpp"

namespace aist {
namespace {

constexpr double kRootTolerance = 1e-12;

double log_binomial(std::size_t n, std::size_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

// log Σ_j exp(log_coef[j] + power[j]·log t)
struct LogPolynomial {
  std::vector<double> log_coef;
  std::vector<double> power;

  double operator()(double log_t) const {
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < log_coef.size(); ++j) peak = std::max(peak, log_coef[j] + power[j] * log_t);
    if (!std::isfinite(peak)) return peak;
    double acc = 0.0;
    for (std::size_t j = 0; j < log_coef.size(); ++j) acc += std::exp(log_coef[j] + power[j] * log_t - peak);
    return peak + std::log(acc);
  }
};

// Bisection on [a, b] for a sign change of f; f(a) and f(b) must differ in sign.
double bisect(const std::function<double(double)>& f, double a, double b) {
  const bool a_positive = f(a) > 0.0;
  while (b - a > kRootTolerance) {
    const double m = 0.5 * (a + b);
    if ((f(m) > 0.0) == a_positive) a = m; else b = m;
  }
  return 0.5 * (a + b);
}

[[noreturn]] void bracket_failure(std::size_t N, std::size_t k, double beta, const char* what) {
  std::ostringstream os;
  os << "epsilon_bounds: " << what << " (N=" << N << ", k=" << k << ", beta=" << beta << ")";
  throw NumericError(os.str());
}

}  // namespace

EpsilonBounds epsilon_bounds(std::size_t N, std::size_t k, double beta) {
  if (N == 0) throw DomainError("epsilon_bounds: N must be positive");
  if (k > N) throw DomainError("epsilon_bounds: violated count exceeds N");
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("epsilon_bounds: beta must lie in (0, 1)");

  const double n = static_cast<double>(N);
  LogPolynomial negative;
  negative.log_coef.reserve(4 * N);
  negative.power.reserve(4 * N);
  if (k < N) {
    const double c1 = std::log(beta / (2.0 * n));
    for (std::size_t i = k; i < N; ++i) {
      negative.log_coef.push_back(c1 + log_binomial(i, k));
      negative.power.push_back(static_cast<double>(i - k));
    }
  }
  const double c2 = std::log(beta / (6.0 * n));
  for (std::size_t i = N + 1; i <= 4 * N; ++i) {
    negative.log_coef.push_back(c2 + log_binomial(i, k));
    negative.power.push_back(static_cast<double>(i - k));
  }

  // Upper bracket: past the larger root the negative part dominates.
  const double lead = k < N ? log_binomial(N, k) : 0.0;
  const double lead_power = static_cast<double>(N - k);
  auto sign_fn = [&](double t) { return lead + lead_power * std::log(t) - negative(std::log(t)); };
  double t_max = 2.0;
  while (sign_fn(t_max) > 0.0) {
    t_max *= 2.0;
    if (t_max > 1e6) bracket_failure(N, k, beta, "no upper bracket for the larger root");
  }

  if (k == N) {
    // 1 − (β/6N) Σ ... is decreasing in t and equals 1 at t → 0.
    const double t_hi = bisect(sign_fn, std::numeric_limits<double>::min(), t_max);
    return {std::max(0.0, 1.0 - t_hi), 1.0};
  }

  // Locate a point where the polynomial is positive: coarse grid, then zoom.
  double best_t = 0.0, best_v = -std::numeric_limits<double>::infinity();
  double lo = 0.0, hi = t_max;
  for (int round = 0; round < 8 && best_v <= 0.0; ++round) {
    constexpr int kGrid = 256;
    for (int g = 1; g < kGrid; ++g) {
      const double t = lo + (hi - lo) * g / kGrid;
      if (t <= 0.0) continue;
      const double v = sign_fn(t);
      if (v > best_v) {
        best_v = v;
        best_t = t;
      }
    }
    const double span = (hi - lo) / kGrid;
    lo = std::max(0.0, best_t - span);
    hi = best_t + span;
  }
  if (!(best_v > 0.0)) bracket_failure(N, k, beta, "polynomial is never positive");

  const double t_lo = bisect(sign_fn, std::numeric_limits<double>::min(), best_t);
  const double t_hi = bisect(sign_fn, best_t, t_max);
  return {std::max(0.0, 1.0 - t_hi), std::min(1.0, 1.0 - t_lo)};
}

// ------------------------------------------------------------ certificate

io::json RiskCertificate::to_json() const {
  return {{"N", N}, {"s_star", s_star}, {"beta", beta},
          {"eps_lo", eps_lo}, {"eps_hi", eps_hi}, {"confidence", confidence}};
}

RiskCertificate RiskCertificate::from_json(const io::json& j) {
  RiskCertificate c;
  try {
    c.N = j.at("N").get<std::size_t>();
    c.s_star = j.at("s_star").get<std::size_t>();
    c.beta = j.at("beta").get<double>();
    c.eps_lo = j.at("eps_lo").get<double>();
    c.eps_hi = j.at("eps_hi").get<double>();
    c.confidence = j.at("confidence").get<double>();
  } catch (const io::json::exception& e) {
    throw DomainError(std::string("malformed certificate: ") + e.what());
  }
  return c;
}

RateEstimate estimate_rate(std::size_t hits, std::size_t count) {
  using boost::math::binomial_distribution;
  RateEstimate r;
  r.count = count;
  r.hits = hits;
  if (count == 0) return r;
  const auto trials = static_cast<double>(count);
  const auto successes = static_cast<double>(hits);
  r.rate = successes / trials;
  r.lo95 = binomial_distribution<>::find_lower_bound_on_p(trials, successes, 0.025);
  r.hi95 = binomial_distribution<>::find_upper_bound_on_p(trials, successes, 0.025);
  return r;
}

io::json HoldoutStats::to_json() const {
  auto rate = [](const RateEstimate& r) {
    return io::json{{"count", r.count}, {"hits", r.hits}, {"rate", r.rate}, {"lo95", r.lo95}, {"hi95", r.hi95}};
  };
  return {{"violation", rate(violation)}, {"misclassification", rate(misclassification)}, {"unseen", unseen}};
}

HoldoutStats evaluate_holdout(const MulticlassModel& model, const ScenarioSet& holdout) {
  std::vector<Vector> xs;
  std::vector<int> cls;
  std::size_t unseen = 0;
  for (const auto& s : holdout.samples) {
    if (auto c = model.label_table.find(s.label)) {
      xs.push_back(s.x);
      cls.push_back(*c);
    } else {
      ++unseen;
    }
  }
  std::size_t violations = unseen, misclassified = unseen;
  if (!xs.empty()) {
    const auto soa = to_soa(xs);
    const auto g = g_values_batch(model, soa, cls);
    const auto pred = predict_batch(model, soa, xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      violations += g[i] > kViolationTieTolerance ? 1 : 0;
      misclassified += pred[i] != cls[i] ? 1 : 0;
    }
  }
  HoldoutStats out;
  out.unseen = unseen;
  out.violation = estimate_rate(violations, holdout.size());
  out.misclassification = estimate_rate(misclassified, holdout.size());
  return out;
}

Certification certify(const MulticlassModel& model, const ScenarioSet& train,
                      const ScenarioSet* holdout, double beta, std::size_t unseen_count) {
  Certification out;
  out.training_violations = count_violations(model, train);
  auto& c = out.certificate;
  c.N = train.size() + unseen_count;
  c.s_star = out.training_violations + unseen_count;
  c.beta = beta;
  const auto eps = epsilon_bounds(c.N, c.s_star, beta);
  c.eps_lo = eps.lo;
  c.eps_hi = eps.hi;
  c.confidence = 1.0 - 3.0 * beta;
  if (holdout) out.holdout = evaluate_holdout(model, *holdout);
  return out;
}

HoldoutStats monte_carlo_risk(const MulticlassModel& model, const LtiPetcSystem& sys, int ell,
                              std::size_t M, std::uint64_t seed) {
  if (M == 0) throw DomainError("monte_carlo_risk: M must be positive");
  return evaluate_holdout(model, generate_dataset(sys, ell, M, seed));
}

}  // namespace aist
