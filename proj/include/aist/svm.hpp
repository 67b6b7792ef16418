#pragma once

// Multiclass separation of states by IST label.
//
// Flat mode is the Crammer–Singer one-vs-all machine with a winner-takes-all
// decision. Conic mode fits the encapsulation chain of the triggering cones:
// class j is appointed to the first j with W_j·𝒱₂(x) > 0, so the constraints
// of a sample of class y are W_i·𝒱₂(x) ≤ −ζ for i < y and W_y·𝒱₂(x) ≥ ζ.
// Both are trained on the primal program
//
//     min Σ_j ‖W_j‖² + ρ Σ_i θ_i   s.t.  g(X_i) ≤ θ_i, θ_i ≥ 0.

#include <string>
#include <vector>

#include "aist/dynamics.hpp"
#include "aist/json_io.hpp"
#include "aist/scenario.hpp"

namespace aist {

enum class SvmMode { flat, conic };
enum class FeatureMap { raw, veronese2 };

std::string to_string(SvmMode mode);
std::string to_string(FeatureMap map);
SvmMode parse_mode(const std::string& s);
FeatureMap parse_feature_map(const std::string& s);

/// All degree-2 monomials x_i x_j (i ≤ j) in lexicographic (i, j) order.
Vector veronese2(const Vector& x);
Vector map_features(FeatureMap map, const Vector& x);
Eigen::Index feature_dim(FeatureMap map, Eigen::Index state_dim);

struct TrainingSummary {
  double objective = 0.0;   ///< Σ‖W_j‖² + Σ b_j² + ρ Σ θ_i (flat offsets are regularized)
  double dual_bound = 0.0;  ///< lower bound on the optimum (regularized-bias program)
  double relative_gap = 0.0;
  double total_slack = 0.0;  ///< Σ θ_i
  int epochs = 0;
  bool converged = false;
  std::string stop_reason;
};

struct MulticlassModel {
  SvmMode mode = SvmMode::flat;
  FeatureMap feature_map = FeatureMap::veronese2;
  Eigen::Index state_dim = 0;
  Matrix W;  ///< L × d, one hyperplane normal per row
  Vector b;  ///< L offsets, identically zero in conic mode
  double zeta = 1.0;
  double rho = 1000.0;
  /// Class order of W's rows. In conic mode this is the encapsulation order.
  LabelTable label_table;
  TrainingSummary training;

  int classes() const { return static_cast<int>(W.rows()); }

  io::json to_json() const;
  static MulticlassModel from_json(const io::json& j);
  void save(const std::string& path) const;
  static MulticlassModel load(const std::string& path);
};

/// f_j(x) = W_j·φ(x) + b_j for every class.
Vector class_scores(const MulticlassModel& model, const Vector& x);

/// Worst margin violation of the sample's constraints (positive means
/// violated). Zero for a single-class model, which has no competing class.
/// Throws ClassificationDomainError for a label unknown to the model.
double g_value(const MulticlassModel& model, const LabeledSample& sample);
double g_value_for_class(const MulticlassModel& model, const Vector& x, int cls);

/// Class index (row of W) appointed to x.
int predict(const MulticlassModel& model, const Vector& x);
const Label& predict_label(const MulticlassModel& model, const Vector& x);

/// Batched forms over an SoA state batch; these run on the SIMD kernels.
std::vector<int> predict_batch(const MulticlassModel& model, std::span<const double> soa,
                               std::size_t count);
std::vector<double> g_values_batch(const MulticlassModel& model, std::span<const double> soa,
                                   std::span<const int> classes);

inline constexpr double kViolationTieTolerance = 1e-9;

/// #{i : g(X_i) > 1e-9}. Throws ClassificationDomainError if a sample label is
/// unknown to the model.
std::size_t count_violations(const MulticlassModel& model, const ScenarioSet& data);

struct TrainOptions {
  FeatureMap feature_map = FeatureMap::veronese2;
  int max_epochs = 50000;
  double tolerance = 1e-6;        ///< relative duality gap
  int stall_window = 100;         ///< epochs
  double stall_tolerance = 1e-8;  ///< stop once neither the best objective nor the dual improves by more
  /// Flat mode appends a constant feature of this value to carry the offsets.
  double bias_scale = 1.0;
  /// Conic mode on ℓ > 1 labels, ordered lexicographically.
  bool allow_conic_sequences = false;
};

/// Throws DomainError on an empty dataset or non-positive ρ, ζ, and
/// UnsupportedConfiguration for conic mode with ℓ > 1 unless allowed.
MulticlassModel train(const ScenarioSet& data, SvmMode mode, double rho, double zeta,
                      const TrainOptions& opts = {});

namespace detail {

/// Dual coordinate ascent for the shared-slack program behind both modes.
/// Exposed for the solver tests.
struct SolverProblem {
  SvmMode mode = SvmMode::flat;
  int classes = 1;
  Eigen::Index dim = 0;
  std::vector<double> features;  ///< N × dim, row-major
  std::vector<int> y;            ///< class per sample
  double zeta = 1.0;
  double rho = 1000.0;
  double bias_scale = 0.0;       ///< 0 disables offsets
};

struct SolverResult {
  Matrix W;
  Vector b;
  TrainingSummary summary;
};

SolverResult solve_shared_slack(const SolverProblem& problem, const TrainOptions& opts);

}  // namespace detail

}  // namespace aist
