#include "aist/traffic.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <sstream>

#include "aist/error.hpp"

namespace aist {

double to_double(const Rational& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

std::string to_string(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

// ------------------------------------------------------------ cycle means

namespace {

constexpr long long kInf = std::numeric_limits<long long>::max() / 4;

// Strongly connected components of the subgraph induced by `in_set`.
std::vector<std::vector<int>> components(const WeightedDigraph& g, const std::vector<char>& in_set) {
  const int n = g.size();
  std::vector<int> index(n, -1), low(n, 0), stack;
  std::vector<char> on_stack(n, 0);
  std::vector<std::vector<int>> out;
  int counter = 0;
  std::function<void(int)> strong = [&](int v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = 1;
    for (const auto& e : g.adj[v]) {
      if (!in_set[e.to]) continue;
      if (index[e.to] < 0) {
        strong(e.to);
        low[v] = std::min(low[v], low[e.to]);
      } else if (on_stack[e.to]) {
        low[v] = std::min(low[v], index[e.to]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<int> comp;
      int w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = 0;
        comp.push_back(w);
      } while (w != v);
      std::sort(comp.begin(), comp.end());
      out.push_back(std::move(comp));
    }
  };
  for (int v = 0; v < n; ++v)
    if (in_set[v] && index[v] < 0) strong(v);
  return out;
}

// Karp's minimum cycle mean of one strongly connected component, with the
// sign of every weight multiplied by `sign`.
std::optional<Rational> karp(const WeightedDigraph& g, const std::vector<int>& comp, long long sign) {
  const int m = static_cast<int>(comp.size());
  std::vector<int> local(static_cast<std::size_t>(g.size()), -1);
  for (int i = 0; i < m; ++i) local[comp[i]] = i;

  bool cyclic = m > 1;
  if (!cyclic)
    for (const auto& e : g.adj[comp[0]]) cyclic |= e.to == comp[0];
  if (!cyclic) return std::nullopt;

  // dist[k][v]: minimum weight of a walk of exactly k edges from comp[0] to v.
  std::vector<std::vector<long long>> dist(static_cast<std::size_t>(m + 1),
                                           std::vector<long long>(static_cast<std::size_t>(m), kInf));
  dist[0][0] = 0;
  for (int k = 1; k <= m; ++k) {
    for (int u = 0; u < m; ++u) {
      const long long du = dist[k - 1][u];
      if (du == kInf) continue;
      for (const auto& e : g.adj[comp[u]]) {
        const int v = local[e.to];
        if (v < 0) continue;
        dist[k][v] = std::min(dist[k][v], du + sign * e.weight);
      }
    }
  }

  std::optional<Rational> best;
  for (int v = 0; v < m; ++v) {
    if (dist[m][v] == kInf) continue;
    std::optional<Rational> worst;
    for (int k = 0; k < m; ++k) {
      if (dist[k][v] == kInf) continue;
      const Rational r(dist[m][v] - dist[k][v], m - k);
      if (!worst || r > *worst) worst = r;
    }
    if (worst && (!best || *worst < *best)) best = worst;
  }
  return best;
}

std::optional<Rational> extreme_mean_cycle(const WeightedDigraph& g, const std::vector<int>& restrict,
                                           long long sign) {
  if (restrict.empty()) throw DomainError("mean cycle: the state subset is empty");
  std::vector<char> in_set(static_cast<std::size_t>(g.size()), 0);
  for (int v : restrict) {
    if (v < 0 || v >= g.size()) throw DomainError("mean cycle: state index out of range");
    in_set[v] = 1;
  }
  std::optional<Rational> best;
  for (const auto& comp : components(g, in_set)) {
    const auto r = karp(g, comp, sign);
    if (r && (!best || *r < *best)) best = r;
  }
  if (best) best = *best * Rational(sign);
  return best;
}

}  // namespace

std::optional<Rational> min_mean_cycle(const WeightedDigraph& g, const std::vector<int>& restrict) {
  return extreme_mean_cycle(g, restrict, 1);
}

std::optional<Rational> max_mean_cycle(const WeightedDigraph& g, const std::vector<int>& restrict) {
  return extreme_mean_cycle(g, restrict, -1);
}

std::vector<int> reachable_from(const WeightedDigraph& g, int start) {
  if (start < 0 || start >= g.size()) throw DomainError("reachable_from: state index out of range");
  std::vector<char> seen(static_cast<std::size_t>(g.size()), 0);
  std::vector<int> todo{start};
  seen[start] = 1;
  while (!todo.empty()) {
    const int v = todo.back();
    todo.pop_back();
    for (const auto& e : g.adj[v])
      if (!seen[e.to]) {
        seen[e.to] = 1;
        todo.push_back(e.to);
      }
  }
  std::vector<int> out;
  for (int v = 0; v < g.size(); ++v)
    if (seen[v]) out.push_back(v);
  return out;
}

// ------------------------------------------------------------ abstraction

std::size_t TrafficAbstraction::edge_count() const {
  std::size_t n = 0;
  for (const auto& s : successors_) n += s.size();
  return n;
}

std::optional<int> TrafficAbstraction::find(const Label& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool TrafficAbstraction::has_edge(int from, int to) const {
  const auto& s = successors(from);
  return std::binary_search(s.begin(), s.end(), to);
}

WeightedDigraph TrafficAbstraction::graph() const {
  WeightedDigraph g;
  g.adj.resize(states_.size());
  for (int u = 0; u < size(); ++u)
    for (int v : successors_[static_cast<std::size_t>(u)]) g.adj[static_cast<std::size_t>(u)].push_back({v, output(u)});
  return g;
}

TrafficAbstraction build_slca(const std::vector<Label>& sequences, double h) {
  if (sequences.empty()) throw DomainError("build_slca: no sequences");
  if (!(h > 0.0)) throw DomainError("build_slca: h must be positive");
  TrafficAbstraction abs;
  abs.ell_ = static_cast<int>(sequences.front().size());
  abs.h_ = h;
  if (abs.ell_ < 1) throw DomainError("build_slca: empty sequence");
  for (const auto& s : sequences) {
    if (static_cast<int>(s.size()) != abs.ell_) throw DomainError("build_slca: sequences of mixed lengths");
    if (abs.index_.emplace(s, static_cast<int>(abs.states_.size())).second) abs.states_.push_back(s);
  }

  const int n = abs.size();
  const auto ell = static_cast<std::size_t>(abs.ell_);
  // Last `len` entries of u against the first `len` entries of v.
  auto overlaps = [](const Label& u, const Label& v, std::size_t len) {
    return std::equal(u.end() - static_cast<std::ptrdiff_t>(len), u.end(), v.begin());
  };
  abs.successors_.assign(static_cast<std::size_t>(n), {});
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v)
      if (overlaps(abs.states_[u], abs.states_[v], ell - 1)) abs.successors_[u].push_back(v);

  for (int u = 0; u < n; ++u) {
    if (!abs.successors_[u].empty()) continue;
    abs.patched_.push_back(u);
    const std::size_t relaxed = ell >= 2 ? ell - 2 : 0;
    for (int v = 0; v < n; ++v)
      if (overlaps(abs.states_[u], abs.states_[v], relaxed)) abs.successors_[u].push_back(v);
    if (abs.successors_[u].empty()) abs.successors_[u].push_back(u);
  }
  return abs;
}

io::json TrafficAbstraction::to_json() const {
  io::json edges = io::json::array(), weights = io::json::array();
  for (int u = 0; u < size(); ++u)
    for (int v : successors_[static_cast<std::size_t>(u)]) {
      edges.push_back({u, v});
      weights.push_back(output(u));
    }
  return {{"ell", ell_}, {"h", h_}, {"states", states_}, {"edges", edges},
          {"weights", weights}, {"flags", patched_}};
}

TrafficAbstraction TrafficAbstraction::from_json(const io::json& j) {
  TrafficAbstraction abs;
  try {
    abs.ell_ = j.at("ell").get<int>();
    abs.h_ = j.at("h").get<double>();
    abs.states_ = j.at("states").get<std::vector<Label>>();
    abs.patched_ = j.at("flags").get<std::vector<int>>();
    const int n = static_cast<int>(abs.states_.size());
    for (int s = 0; s < n; ++s) {
      if (static_cast<int>(abs.states_[s].size()) != abs.ell_) throw DomainError("abstraction: state length differs from ell");
      abs.index_.emplace(abs.states_[s], s);
    }
    abs.successors_.assign(static_cast<std::size_t>(n), {});
    for (const auto& e : j.at("edges")) {
      const int u = e.at(0).get<int>(), v = e.at(1).get<int>();
      if (u < 0 || u >= n || v < 0 || v >= n) throw DomainError("abstraction: edge endpoint out of range");
      abs.successors_[u].push_back(v);
    }
  } catch (const io::json::exception& e) {
    throw DomainError(std::string("malformed abstraction: ") + e.what());
  }
  for (auto& s : abs.successors_) {
    std::sort(s.begin(), s.end());
    if (s.empty()) throw DomainError("abstraction: blocking state");
  }
  return abs;
}

std::string TrafficAbstraction::to_dot() const {
  std::ostringstream os;
  os << "digraph slca {\n  rankdir=LR;\n";
  const std::vector<char> flagged = [&] {
    std::vector<char> f(states_.size(), 0);
    for (int p : patched_) f[static_cast<std::size_t>(p)] = 1;
    return f;
  }();
  for (int s = 0; s < size(); ++s) {
    os << "  s" << s << " [label=\"" << label_to_string(states_[static_cast<std::size_t>(s)]) << "\"";
    if (flagged[static_cast<std::size_t>(s)]) os << ", style=dashed";
    os << "];\n";
  }
  for (int u = 0; u < size(); ++u)
    for (int v : successors_[static_cast<std::size_t>(u)])
      os << "  s" << u << " -> s" << v << " [label=\"" << output(u) << "\"];\n";
  os << "}\n";
  return os.str();
}

std::optional<Rational> min_mean_cycle(const TrafficAbstraction& abs, const std::vector<int>& restrict) {
  return min_mean_cycle(abs.graph(), restrict);
}

std::optional<Rational> max_mean_cycle(const TrafficAbstraction& abs, const std::vector<int>& restrict) {
  return max_mean_cycle(abs.graph(), restrict);
}

CycleBounds sac_lac_from(const TrafficAbstraction& abs, int state) {
  if (state < 0 || state >= abs.size()) throw DomainError("sac_lac_from: unknown state");
  const auto g = abs.graph();
  const auto reach = reachable_from(g, state);
  const auto lo = min_mean_cycle(g, reach);
  const auto hi = max_mean_cycle(g, reach);
  // A non-blocking finite graph always reaches a cycle.
  if (!lo || !hi) throw InconsistencyError("sac_lac_from: no cycle reachable from a state");
  return {*lo, *hi};
}

CycleBounds sac_lac_from(const TrafficAbstraction& abs, const Label& state) {
  const auto s = abs.find(state);
  if (!s) throw DomainError("sac_lac_from: " + label_to_string(state) + " is not a state of the abstraction");
  return sac_lac_from(abs, *s);
}

Rational eac(const TrafficAbstraction& abs) {
  Rational total(0);
  for (int s = 0; s < abs.size(); ++s) total += sac_lac_from(abs, s).delta();
  return total / Rational(abs.size());
}

// ------------------------------------------------------------------ bounds

BoundsRecord aist_bounds(const TrafficAbstraction& abs, const MulticlassModel& model, const Vector& x0) {
  BoundsRecord r;
  r.x0 = x0;
  r.predicted = predict_label(model, x0);
  const auto s = abs.find(r.predicted);
  if (!s)
    throw InconsistencyError("predicted label " + label_to_string(r.predicted) +
                             " is not a state of the abstraction");
  r.state = *s;
  r.bounds = sac_lac_from(abs, *s);
  return r;
}

AistBoundsReport analyze(const TrafficAbstraction& abs, const MulticlassModel& model,
                         const std::vector<Vector>& queries,
                         const std::optional<RiskCertificate>& certificate) {
  for (const auto& l : model.label_table.labels())
    if (!abs.find(l))
      throw InconsistencyError("classifier label " + label_to_string(l) + " is not a state of the abstraction");
  AistBoundsReport rep;
  rep.h = abs.h();
  rep.certificate = certificate;
  rep.patched = abs.patched();
  std::vector<CycleBounds> per_state;
  Rational total(0);
  for (int s = 0; s < abs.size(); ++s) {
    per_state.push_back(sac_lac_from(abs, s));
    total += per_state.back().delta();
  }
  rep.eac = total / Rational(abs.size());
  rep.min_sac = per_state.front().sac;
  rep.max_lac = per_state.front().lac;
  for (const auto& b : per_state) {
    rep.min_sac = std::min(rep.min_sac, b.sac);
    rep.max_lac = std::max(rep.max_lac, b.lac);
  }
  for (const auto& x : queries) {
    BoundsRecord r;
    r.x0 = x;
    r.predicted = predict_label(model, x);
    r.state = *abs.find(r.predicted);
    r.bounds = per_state[static_cast<std::size_t>(r.state)];
    rep.records.push_back(std::move(r));
  }
  return rep;
}

io::json AistBoundsReport::to_json() const {
  auto rational = [&](const Rational& r) {
    return io::json{{"value", to_string(r)}, {"ist_units", to_double(r)}, {"seconds", to_double(r) * h}};
  };
  io::json records = io::json::array();
  for (const auto& r : this->records) {
    records.push_back({{"x0", std::vector<double>(r.x0.data(), r.x0.data() + r.x0.size())},
                       {"predicted_label", r.predicted},
                       {"abstract_state", r.state},
                       {"sac", rational(r.bounds.sac)},
                       {"lac", rational(r.bounds.lac)},
                       {"delta_aist", rational(r.bounds.delta())}});
  }
  io::json j;
  j["h"] = h;
  j["records"] = records;
  j["global"] = {{"min_sac", rational(min_sac)}, {"max_lac", rational(max_lac)}, {"eac", rational(eac)}};
  j["patched_states"] = patched;
  j["certificate"] = certificate ? certificate->to_json() : io::json(nullptr);
  return j;
}

}  // namespace aist
