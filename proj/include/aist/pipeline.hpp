#pragma once

// End-to-end analysis: generate → train → certify → abstract → analyze, and
// the comparison against an abstraction built from exact IST labels.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aist/dynamics.hpp"
#include "aist/json_io.hpp"
#include "aist/risk.hpp"
#include "aist/scenario.hpp"
#include "aist/svm.hpp"
#include "aist/traffic.hpp"

namespace aist {

struct PipelineConfig {
  std::string system_path;
  int ell = 1;
  std::size_t N = 10000;
  double beta = 1e-6;
  double rho = 1e3;
  double zeta = 1.0;
  std::uint64_t seed = 1;
  /// "flat", "conic" or "auto" (conic for ℓ = 1, flat otherwise).
  std::string mode = "auto";
  FeatureMap feature_map = FeatureMap::veronese2;
  /// Fresh samples drawn with a derived seed for the empirical violation rate.
  std::size_t holdout = 10000;
  /// Random initial states whose AIST bounds are reported.
  std::size_t queries = 100;
  std::string output_dir = ".";

  /// Throws DomainError for non-positive hyper-parameters or β ∉ (0,1).
  void validate() const;
  io::json to_json() const;
};

SvmMode resolve_mode(const std::string& mode, int ell);

/// Seed of the holdout set and of the query states, derived from the
/// training seed so that one seed pins the whole run.
std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t stream);

struct PipelineResult {
  PipelineConfig config;
  std::string system_fingerprint;
  double h = 1.0;
  int kappa_bar = 1;
  /// Share of training states whose first IST is below the heartbeat.
  double heartbeat_coverage = 0.0;
  ScenarioSet train;
  ScenarioSet holdout;
  MulticlassModel model;
  Certification certification;
  TrafficAbstraction abstraction;
  AistBoundsReport report;

  io::json report_json() const;
};

PipelineResult run_pipeline(const LtiPetcSystem& sys, const PipelineConfig& config);

/// Writes dataset.jsonl, holdout.jsonl, model.json, certificate.json,
/// abstraction.json, abstraction.dot and report.json into `dir`.
void write_pipeline(const PipelineResult& result, const std::string& dir);

// ---------------------------------------------------------------- compare

/// Deterministic unit vectors covering the sphere: equally spaced angles in
/// the plane, Halton points pushed through the inverse normal CDF otherwise.
std::vector<Vector> sweep_states(int n_x, std::size_t count);

/// Default sweep size: 10⁵ points for n_x ≤ 3, 10⁶ beyond.
std::size_t default_sweep_size(int n_x);

/// Every ℓ-window of the `horizon`-long exact IST sequence of each state.
std::vector<Label> oracle_sequences(const TriggerCones& cones, const std::vector<Vector>& states,
                                    int ell, int horizon);

struct AbstractionSummary {
  int states = 0;
  std::size_t edges = 0;
  Rational eac;
  std::size_t patched = 0;

  io::json to_json() const;
};

AbstractionSummary summarize(const TrafficAbstraction& abs);

struct ComparisonReport {
  int ell = 1;
  double h = 1.0;
  std::size_t sweep = 0;
  AbstractionSummary data_driven;
  AbstractionSummary oracle;
  std::vector<Label> states_only_data;
  std::vector<Label> states_only_oracle;
  std::size_t edges_only_data = 0;
  std::size_t edges_only_oracle = 0;

  io::json to_json() const;
};

ComparisonReport compare_abstractions(const TrafficAbstraction& data_driven,
                                      const TrafficAbstraction& oracle, std::size_t sweep);

struct CompareResult {
  PipelineResult pipeline;
  TrafficAbstraction oracle;
  ComparisonReport report;
};

/// Runs the pipeline, then builds the oracle abstraction from the training
/// states plus a sweep of `sweep` points (0 picks the default size), each
/// simulated for ℓ + `extra_steps` samples.
CompareResult run_compare(const LtiPetcSystem& sys, const PipelineConfig& config, std::size_t sweep = 0,
                          int extra_steps = 10);

// ---------------------------------------------------------------- regions

struct RegionPlot {
  std::string svg;
  int region_count = 0;  ///< distinct oracle labels on the grid
  bool symmetric = true; ///< label(p) = label(−p) at every grid point
  std::size_t points = 0;
};

/// Colours a resolution×resolution grid over the unit disk by exact
/// ℓ-sequence and, given a model, marks cells where its prediction changes.
/// Throws UnsupportedConfiguration unless n_x = 2.
RegionPlot render_regions(const LtiPetcSystem& sys, int ell, int resolution,
                          const MulticlassModel* model = nullptr);

}  // namespace aist
