#pragma once

// Labeled scenario datasets: states on the unit sphere, each paired with the
// ℓ-sequence of inter-sample times generated from it.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aist/dynamics.hpp"

namespace aist {

/// An ℓ-sequence of inter-sample times, in units of h.
using Label = std::vector<int>;

std::string label_to_string(const Label& label);

/// Bijection between observed labels and class indices. Indices are 0-based
/// and assigned in order of first insertion.
class LabelTable {
 public:
  LabelTable() = default;
  explicit LabelTable(std::vector<Label> labels);

  /// Index of `label`, inserting it if new.
  int intern(const Label& label);
  std::optional<int> find(const Label& label) const;
  const Label& at(int index) const { return labels_.at(static_cast<std::size_t>(index)); }
  int size() const { return static_cast<int>(labels_.size()); }
  const std::vector<Label>& labels() const { return labels_; }

  friend bool operator==(const LabelTable& a, const LabelTable& b) { return a.labels_ == b.labels_; }

 private:
  std::vector<Label> labels_;
  std::map<Label, int> index_;
};

struct LabeledSample {
  Vector x;
  Label label;
};

struct ScenarioSet {
  std::vector<LabeledSample> samples;
  int ell = 1;
  std::uint64_t seed = 0;
  std::string system_fingerprint;
  LabelTable label_table;
  /// Carried along so abstractions can be built from a dataset file alone.
  double h = 1.0;
  int kappa_bar = 1;

  std::size_t size() const { return samples.size(); }
  Eigen::Index state_dim() const { return samples.empty() ? 0 : samples.front().x.size(); }
  /// Class index of each sample under label_table.
  std::vector<int> classes() const;
};

/// N independent draws, uniform on the unit sphere of ℝ^{n_x} (normalized
/// Gaussian vectors), reproducible from `seed`.
std::vector<Vector> sample_states(int n_x, std::size_t count, std::uint64_t seed);

/// Packs states into the SoA layout used by the batch kernels.
std::vector<double> to_soa(const std::vector<Vector>& states);

/// Labels sampled states with their ℓ-sequences of ISTs.
ScenarioSet generate_dataset(const LtiPetcSystem& sys, int ell, std::size_t count, std::uint64_t seed);

/// Disjoint random partition: round(fraction·N) samples go to the first
/// part. Both parts keep the parent label table and original sample order.
std::pair<ScenarioSet, ScenarioSet> split(const ScenarioSet& set, double fraction, std::uint64_t seed);

/// JSON-lines: a header object, then one {"x": [...], "label": [...]} per sample.
std::string dataset_to_jsonl(const ScenarioSet& set);
ScenarioSet dataset_from_jsonl(const std::string& text);
void save_dataset(const std::string& path, const ScenarioSet& set);
ScenarioSet load_dataset(const std::string& path);

}  // namespace aist
