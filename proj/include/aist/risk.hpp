#pragma once

// Scenario-approach risk certificates for the trained classifier.
//
// With s* violated constraints among N samples, the risk R (probability that
// a fresh sample violates its margin constraint, hence an upper bound on the
// probability of misclassification or of an unseen label) satisfies
// ε̲(s*, N, β) ≤ R ≤ ε̄(s*, N, β) with confidence 1 − 3β.
//
// ε̲ and ε̄ come from the two roots of
//
//   C(N,k) t^{N−k} − β/(2N) Σ_{i=k}^{N−1} C(i,k) t^{i−k}
//                  − β/(6N) Σ_{i=N+1}^{4N} C(i,k) t^{i−k} = 0,
//
// ε̄ = 1 − t̲ and ε̲ = max(0, 1 − t̄). For k = N, ε̄ = 1 and t̄ solves
// 1 − β/(6N) Σ_{i=N+1}^{4N} C(i,N) t^{i−N} = 0.

#include <cstdint>
#include <optional>

#include "aist/json_io.hpp"
#include "aist/scenario.hpp"
#include "aist/svm.hpp"

namespace aist {

struct EpsilonBounds {
  double lo = 0.0;
  double hi = 1.0;
};

/// Both roots located by bisection on t (tolerance 1e-12) with every sum
/// evaluated in the log domain. Throws DomainError for k > N, N = 0 or
/// β ∉ (0,1); NumericError if a root cannot be bracketed.
EpsilonBounds epsilon_bounds(std::size_t N, std::size_t k, double beta);

struct RiskCertificate {
  std::size_t N = 0;
  std::size_t s_star = 0;
  double beta = 0.0;
  double eps_lo = 0.0;
  double eps_hi = 1.0;
  double confidence = 0.0;  ///< 1 − 3β

  io::json to_json() const;
  static RiskCertificate from_json(const io::json& j);
};

/// Clopper–Pearson 95% interval around an empirical rate.
struct RateEstimate {
  std::size_t count = 0;
  std::size_t hits = 0;
  double rate = 0.0;
  double lo95 = 0.0;
  double hi95 = 1.0;
};

RateEstimate estimate_rate(std::size_t hits, std::size_t count);

/// Fresh-sample behaviour of a classifier. Samples whose label the
/// classifier never saw count both as violations and as misclassifications.
struct HoldoutStats {
  RateEstimate violation;
  RateEstimate misclassification;
  std::size_t unseen = 0;

  io::json to_json() const;
};

HoldoutStats evaluate_holdout(const MulticlassModel& model, const ScenarioSet& holdout);

struct Certification {
  RiskCertificate certificate;
  std::size_t training_violations = 0;
  std::optional<HoldoutStats> holdout;
};

/// s* = count_violations(model, train) + unseen_count, where unseen_count
/// is the number of collected samples deliberately left out of `train`
/// because their class was dropped; those samples also count towards N.
Certification certify(const MulticlassModel& model, const ScenarioSet& train,
                      const ScenarioSet* holdout, double beta, std::size_t unseen_count = 0);

/// Violation and misclassification rates on M fresh samples of the system.
HoldoutStats monte_carlo_risk(const MulticlassModel& model, const LtiPetcSystem& sys, int ell,
                              std::size_t M, std::uint64_t seed);

}  // namespace aist
