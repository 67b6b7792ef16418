#pragma once

// Traffic abstractions: the strongest ℓ-complete abstraction built from
// observed ℓ-sequences of inter-sample times, and min/max cycle-mean
// analysis on it.
//
// States are ℓ-sequences; (kσ) → (σk′) is an edge whenever both sequences
// were observed (domino rule). The output of a state is its first IST and
// every edge leaving it weighs that IST, so the long-run average weight of
// a run is the average inter-sample time of the matching trace. Weights and
// cycle means are exact rationals in units of h.

#include <boost/rational.hpp>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aist/json_io.hpp"
#include "aist/risk.hpp"
#include "aist/scenario.hpp"
#include "aist/svm.hpp"

namespace aist {

using Rational = boost::rational<long long>;

double to_double(const Rational& r);
/// "p/q", or "p" when q = 1.
std::string to_string(const Rational& r);

/// Directed graph with integer edge weights.
struct WeightedDigraph {
  struct Edge {
    int to;
    long long weight;
  };
  std::vector<std::vector<Edge>> adj;

  int size() const { return static_cast<int>(adj.size()); }
};

/// Minimum cycle mean over cycles that stay inside `restrict` (Karp's
/// recurrence per strongly connected component). nullopt when the induced
/// subgraph is acyclic.
std::optional<Rational> min_mean_cycle(const WeightedDigraph& g, const std::vector<int>& restrict);
std::optional<Rational> max_mean_cycle(const WeightedDigraph& g, const std::vector<int>& restrict);

/// Vertices reachable from `start` (including it), ascending.
std::vector<int> reachable_from(const WeightedDigraph& g, int start);

class TrafficAbstraction {
 public:
  int ell() const { return ell_; }
  double h() const { return h_; }
  int size() const { return static_cast<int>(states_.size()); }
  std::size_t edge_count() const;

  const std::vector<Label>& states() const { return states_; }
  const Label& state(int s) const { return states_.at(static_cast<std::size_t>(s)); }
  std::optional<int> find(const Label& label) const;
  const std::vector<int>& successors(int s) const { return successors_.at(static_cast<std::size_t>(s)); }
  bool has_edge(int from, int to) const;

  /// First IST of the state's sequence; also the weight of its out-edges.
  int output(int s) const { return state(s).front(); }
  /// States that had no domino successor among the observations.
  const std::vector<int>& patched() const { return patched_; }

  WeightedDigraph graph() const;

  io::json to_json() const;
  static TrafficAbstraction from_json(const io::json& j);
  /// GraphViz text for inspection.
  std::string to_dot() const;

  friend TrafficAbstraction build_slca(const std::vector<Label>& sequences, double h);

 private:
  int ell_ = 1;
  double h_ = 1.0;
  std::vector<Label> states_;
  std::map<Label, int> index_;
  std::vector<std::vector<int>> successors_;
  std::vector<int> patched_;
};

/// States are the distinct sequences in order of first appearance; edges are
/// every domino-compatible pair. A state without a domino successor is linked
/// to every state whose first ℓ−2 entries equal its last ℓ−2 (or to itself
/// when there is none) and flagged as patched. Throws DomainError on an empty
/// set or mixed lengths.
TrafficAbstraction build_slca(const std::vector<Label>& sequences, double h);

std::optional<Rational> min_mean_cycle(const TrafficAbstraction& abs, const std::vector<int>& restrict);
std::optional<Rational> max_mean_cycle(const TrafficAbstraction& abs, const std::vector<int>& restrict);

struct CycleBounds {
  Rational sac;  ///< smallest average cycle reachable from the state
  Rational lac;  ///< largest average cycle reachable from the state
  Rational delta() const { return lac - sac; }
};

/// Throws DomainError for a state index outside the abstraction.
CycleBounds sac_lac_from(const TrafficAbstraction& abs, int state);
CycleBounds sac_lac_from(const TrafficAbstraction& abs, const Label& state);

/// Mean of LAC − SAC over all states.
Rational eac(const TrafficAbstraction& abs);

struct BoundsRecord {
  Vector x0;
  Label predicted;
  int state = 0;
  CycleBounds bounds;  ///< units of h

  double sac_seconds(double h) const { return to_double(bounds.sac) * h; }
  double lac_seconds(double h) const { return to_double(bounds.lac) * h; }
};

/// Classifies x0, locates its abstract state and reports the reachable
/// SAC/LAC. Throws InconsistencyError when the predicted label is not a
/// state of the abstraction.
BoundsRecord aist_bounds(const TrafficAbstraction& abs, const MulticlassModel& model, const Vector& x0);

struct AistBoundsReport {
  std::vector<BoundsRecord> records;
  Rational min_sac;  ///< lower bound on the smallest AIST
  Rational max_lac;  ///< upper bound on the largest AIST
  Rational eac;
  double h = 1.0;
  std::optional<RiskCertificate> certificate;
  std::vector<int> patched;

  io::json to_json() const;
};

AistBoundsReport analyze(const TrafficAbstraction& abs, const MulticlassModel& model,
                         const std::vector<Vector>& queries,
                         const std::optional<RiskCertificate>& certificate);

}  // namespace aist
