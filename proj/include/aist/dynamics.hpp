#pragma once

// Periodic event-triggered control loop: an LTI plant under sample-and-hold
// state feedback, with a quadratic triggering condition checked every h
// seconds and a heartbeat κ̄ that forces a sample after κ̄ checks.
//
// The inter-sample time (IST) of a sampled state x is the first k for which
// [M(k)x; x]ᵀ R [M(k)x; x] > 0, where M(k) maps the sampled state to the
// plant state k checking periods later. Every quadratic form here is
// homogeneous, so IST regions are cones through the origin.

#include <Eigen/Dense>
#include <cstdint>
#include "json.hpp"
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace aist {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// |ξ(kh) − ξ(t_i)|² > σ² |ξ(kh)|²
struct SigmaTrigger {
  double sigma = 0.1;
};

/// Explicit symmetric 2n×2n matrix acting on [ξ(kh); ξ(t_i)].
struct MatrixTrigger {
  Matrix R;
};

using Trigger = std::variant<SigmaTrigger, MatrixTrigger>;

class LtiPetcSystem {
 public:
  /// Validates shapes, R symmetry, h > 0, κ̄ ≥ 1 and σ ∈ (0,1). Throws
  /// ShapeError / DomainError.
  LtiPetcSystem(Matrix A, Matrix B, Matrix K, Trigger trigger, double h, int kappa_bar);

  const Matrix& A() const { return a_; }
  const Matrix& B() const { return b_; }
  const Matrix& K() const { return k_; }
  const Trigger& trigger() const { return trigger_; }
  double h() const { return h_; }
  int kappa_bar() const { return kappa_bar_; }
  Eigen::Index state_dim() const { return a_.rows(); }

  /// The triggering matrix R, built from σ for the relative trigger.
  Matrix triggering_matrix() const;

  /// Same plant and trigger with a different heartbeat.
  LtiPetcSystem with_kappa_bar(int kappa_bar) const;

  nlohmann::json to_json() const;
  static LtiPetcSystem from_json(const nlohmann::json& j);
  static LtiPetcSystem load(const std::string& path);

  /// 16 hex digits identifying the configuration (FNV-1a of the canonical
  /// JSON form).
  std::string fingerprint() const;

 private:
  Matrix a_, b_, k_;
  Trigger trigger_;
  double h_;
  int kappa_bar_;
};

/// N_k and M(k) for k = 1..κ̄ (stored at index k−1).
struct TriggerCones {
  std::vector<Matrix> N;
  std::vector<Matrix> M;
  double h = 1.0;
  int kappa_bar = 1;
  /// N_k flattened row-major, for the batch kernels.
  std::vector<std::vector<double>> N_flat;

  Eigen::Index state_dim() const { return N.empty() ? 0 : N.front().rows(); }
};

/// exp(M·t) by scaling and squaring of a truncated Taylor series.
Matrix matrix_exponential(const Matrix& m, double t);

/// Plant state after k checking periods with the input held at K·x:
/// M(k) = e^{Akh} + (∫₀^{kh} e^{As} ds) B K, via the exponential of the
/// augmented matrix [[A, BK], [0, 0]].
Matrix hold_transition(const LtiPetcSystem& sys, int k);

TriggerCones trigger_cones(const LtiPetcSystem& sys);

/// Smallest k with xᵀ N_k x > 0, or κ̄ when no earlier check fires.
/// Throws DomainError on the zero vector.
int exact_ist(const TriggerCones& cones, const Vector& x);

/// exact_ist over an SoA batch of `count` states (component r of state i at
/// soa[r * count + i]).
std::vector<int> exact_ist_batch(const TriggerCones& cones, std::span<const double> soa,
                                 std::size_t count);

/// Next sampled state x ↦ M(τ) x, rescaled to unit norm. The rescaling does
/// not change any IST since every trigger is homogeneous. Throws
/// DegeneracyError if the image vanishes.
Vector next_sample(const TriggerCones& cones, const Vector& x, int ist);

/// (τ_0, …, τ_{ℓ−1}) along the sampled trajectory from x0.
std::vector<int> ist_sequence(const TriggerCones& cones, const Vector& x0, int ell);

/// IST sequences of length ℓ for an SoA batch of states; row i is the
/// sequence of state i. Agrees element-wise with ist_sequence.
std::vector<std::vector<int>> ist_sequences_batch(const TriggerCones& cones,
                                                  std::span<const double> soa,
                                                  std::size_t count, int ell);

/// (1/(n+1)) Σ_{i=0..n} τ_i · h: the finite-n estimate of the average
/// inter-sample time (seconds) along the trajectory from x0.
double empirical_aist(const TriggerCones& cones, const Vector& x0, int n);

struct HeartbeatCalibration {
  int kappa_bar = 1;
  double below_fraction = 0.0;  ///< share of probes whose IST is < κ̄
};

/// Smallest κ̄ ≤ max_kappa_bar for which at least `coverage` of the unit
/// vectors in `probes` (SoA) trigger strictly before the heartbeat.
HeartbeatCalibration calibrate_kappa_bar(const LtiPetcSystem& sys, std::span<const double> probes,
                                         std::size_t count, double coverage = 0.999,
                                         int max_kappa_bar = 64);

}  // namespace aist
