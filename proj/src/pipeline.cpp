#include "aist/pipeline.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>

#include "aist/error.hpp"

namespace aist {

void PipelineConfig::validate() const {
  if (ell < 1) throw DomainError("ell must be at least 1");
  if (N == 0) throw DomainError("N must be positive");
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("beta must lie in (0,1)");
  if (!(rho > 0.0)) throw DomainError("rho must be positive");
  if (!(zeta > 0.0)) throw DomainError("zeta must be positive");
  if (mode != "auto" && mode != "flat" && mode != "conic") throw DomainError("unknown mode '" + mode + "'");
}

io::json PipelineConfig::to_json() const {
  return {{"ell", ell}, {"N", N}, {"beta", beta}, {"rho", rho}, {"zeta", zeta}, {"seed", seed},
          {"mode", mode}, {"feature_map", to_string(feature_map)}, {"holdout", holdout}, {"queries", queries}};
}

SvmMode resolve_mode(const std::string& mode, int ell) {
  if (mode == "auto") return ell == 1 ? SvmMode::conic : SvmMode::flat;
  return parse_mode(mode);
}

std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

io::json PipelineResult::report_json() const {
  io::json j;
  j["system"] = {{"fingerprint", system_fingerprint}, {"h", h}, {"kappa_bar", kappa_bar},
                 {"heartbeat_coverage", heartbeat_coverage}};
  j["config"] = config.to_json();
  j["dataset"] = {{"N", train.size()}, {"ell", train.ell}, {"classes", train.label_table.size()}};
  const auto& t = model.training;
  j["training"] = {{"mode", to_string(model.mode)}, {"objective", t.objective}, {"dual_bound", t.dual_bound},
                   {"relative_gap", t.relative_gap}, {"total_slack", t.total_slack}, {"epochs", t.epochs},
                   {"converged", t.converged}, {"stop_reason", t.stop_reason},
                   {"violations", certification.training_violations}};
  j["certificate"] = certification.certificate.to_json();
  j["holdout"] = certification.holdout ? certification.holdout->to_json() : io::json(nullptr);
  j["abstraction"] = summarize(abstraction).to_json();
  j["bounds"] = report.to_json();
  return j;
}

PipelineResult run_pipeline(const LtiPetcSystem& sys, const PipelineConfig& config) {
  config.validate();
  PipelineResult r;
  r.config = config;
  r.system_fingerprint = sys.fingerprint();
  r.h = sys.h();
  r.kappa_bar = sys.kappa_bar();

  r.train = generate_dataset(sys, config.ell, config.N, config.seed);
  std::size_t below = 0;
  for (const auto& s : r.train.samples) below += s.label.front() < sys.kappa_bar();
  r.heartbeat_coverage = static_cast<double>(below) / static_cast<double>(r.train.size());

  TrainOptions opts;
  opts.feature_map = config.feature_map;
  r.model = train(r.train, resolve_mode(config.mode, config.ell), config.rho, config.zeta, opts);

  const ScenarioSet* holdout = nullptr;
  if (config.holdout > 0) {
    r.holdout = generate_dataset(sys, config.ell, config.holdout, derived_seed(config.seed, 1));
    holdout = &r.holdout;
  }
  r.certification = certify(r.model, r.train, holdout, config.beta);

  r.abstraction = build_slca(r.model.label_table.labels(), sys.h());
  std::vector<Vector> queries;
  if (config.queries > 0)
    queries = sample_states(static_cast<int>(sys.state_dim()), config.queries, derived_seed(config.seed, 2));
  r.report = analyze(r.abstraction, r.model, queries, r.certification.certificate);
  return r;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

void write_pipeline(const PipelineResult& r, const std::string& dir) {
  const std::filesystem::path base(dir);
  std::error_code ec;
  std::filesystem::create_directories(base, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
  save_dataset((base / "dataset.jsonl").string(), r.train);
  if (r.holdout.size() > 0) save_dataset((base / "holdout.jsonl").string(), r.holdout);
  r.model.save((base / "model.json").string());
  io::write_json_file((base / "certificate.json").string(), r.certification.certificate.to_json());
  io::write_json_file((base / "abstraction.json").string(), r.abstraction.to_json());
  write_text(base / "abstraction.dot", r.abstraction.to_dot());
  io::write_json_file((base / "report.json").string(), r.report_json());
}

// ------------------------------------------------------------------ compare

std::size_t default_sweep_size(int n_x) { return n_x <= 3 ? 100000 : 1000000; }

std::vector<Vector> sweep_states(int n_x, std::size_t count) {
  if (n_x < 1) throw DomainError("sweep_states: dimension must be positive");
  std::vector<Vector> out;
  out.reserve(count);
  if (n_x == 1) {
    for (std::size_t i = 0; i < count; ++i) out.push_back(Vector::Constant(1, i % 2 ? -1.0 : 1.0));
    return out;
  }
  if (n_x == 2) {
    for (std::size_t j = 0; j < count; ++j) {
      const double theta = 2.0 * std::numbers::pi * (static_cast<double>(j) + 0.5) / static_cast<double>(count);
      Vector x(2);
      x << std::cos(theta), std::sin(theta);
      out.push_back(x);
    }
    return out;
  }
  static constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
  if (n_x > static_cast<int>(std::size(kPrimes))) throw UnsupportedConfiguration("sweep_states: dimension above 16");
  const boost::math::normal_distribution<double> normal;
  for (std::size_t i = 0; i < count; ++i) {
    Vector x(n_x);
    for (int d = 0; d < n_x; ++d) {
      double f = 1.0, u = 0.0;
      for (std::size_t k = i + 1; k > 0; k /= static_cast<std::size_t>(kPrimes[d])) {
        f /= kPrimes[d];
        u += f * static_cast<double>(k % static_cast<std::size_t>(kPrimes[d]));
      }
      x[d] = boost::math::quantile(normal, u);
    }
    const double n = x.norm();
    if (n == 0.0) continue;
    out.push_back(x / n);
  }
  return out;
}

std::vector<Label> oracle_sequences(const TriggerCones& cones, const std::vector<Vector>& states, int ell,
                                    int horizon) {
  if (ell < 1 || horizon < ell) throw DomainError("oracle_sequences: need 1 <= ell <= horizon");
  std::vector<Label> out;
  std::set<Label> seen;
  constexpr std::size_t kChunk = 4096;
  for (std::size_t start = 0; start < states.size(); start += kChunk) {
    const std::size_t end = std::min(states.size(), start + kChunk);
    const std::vector<Vector> chunk(states.begin() + static_cast<std::ptrdiff_t>(start),
                                    states.begin() + static_cast<std::ptrdiff_t>(end));
    const auto soa = to_soa(chunk);
    for (const auto& seq : ist_sequences_batch(cones, soa, chunk.size(), horizon)) {
      for (int w = 0; w + ell <= horizon; ++w) {
        Label window(seq.begin() + w, seq.begin() + w + ell);
        if (seen.insert(window).second) out.push_back(std::move(window));
      }
    }
  }
  return out;
}

io::json AbstractionSummary::to_json() const {
  return {{"states", states}, {"edges", edges}, {"eac", to_string(eac)}, {"eac_value", to_double(eac)},
          {"patched", patched}};
}

AbstractionSummary summarize(const TrafficAbstraction& abs) {
  return {abs.size(), abs.edge_count(), eac(abs), abs.patched().size()};
}

namespace {

std::set<std::pair<Label, Label>> labelled_edges(const TrafficAbstraction& abs) {
  std::set<std::pair<Label, Label>> out;
  for (int u = 0; u < abs.size(); ++u)
    for (int v : abs.successors(u)) out.emplace(abs.state(u), abs.state(v));
  return out;
}

}  // namespace

ComparisonReport compare_abstractions(const TrafficAbstraction& data, const TrafficAbstraction& oracle,
                                      std::size_t sweep) {
  ComparisonReport rep;
  rep.ell = data.ell();
  rep.h = data.h();
  rep.sweep = sweep;
  rep.data_driven = summarize(data);
  rep.oracle = summarize(oracle);
  for (const auto& s : data.states())
    if (!oracle.find(s)) rep.states_only_data.push_back(s);
  for (const auto& s : oracle.states())
    if (!data.find(s)) rep.states_only_oracle.push_back(s);
  std::sort(rep.states_only_data.begin(), rep.states_only_data.end());
  std::sort(rep.states_only_oracle.begin(), rep.states_only_oracle.end());
  const auto de = labelled_edges(data), oe = labelled_edges(oracle);
  for (const auto& e : de) rep.edges_only_data += !oe.count(e);
  for (const auto& e : oe) rep.edges_only_oracle += !de.count(e);
  return rep;
}

io::json ComparisonReport::to_json() const {
  return {{"ell", ell},
          {"h", h},
          {"sweep_points", sweep},
          {"data_driven", data_driven.to_json()},
          {"oracle", oracle.to_json()},
          {"states_only_data", states_only_data},
          {"states_only_oracle", states_only_oracle},
          {"edges_only_data", edges_only_data},
          {"edges_only_oracle", edges_only_oracle}};
}

CompareResult run_compare(const LtiPetcSystem& sys, const PipelineConfig& config, std::size_t sweep,
                          int extra_steps) {
  if (extra_steps < 0) throw DomainError("extra_steps must be non-negative");
  CompareResult r;
  r.pipeline = run_pipeline(sys, config);
  const int n_x = static_cast<int>(sys.state_dim());
  if (sweep == 0) sweep = default_sweep_size(n_x);
  std::vector<Vector> states;
  states.reserve(r.pipeline.train.size() + sweep);
  for (const auto& s : r.pipeline.train.samples) states.push_back(s.x);
  for (auto& x : sweep_states(n_x, sweep)) states.push_back(std::move(x));
  const auto cones = trigger_cones(sys);
  r.oracle = build_slca(oracle_sequences(cones, states, config.ell, config.ell + extra_steps), sys.h());
  r.report = compare_abstractions(r.pipeline.abstraction, r.oracle, sweep);
  return r;
}

}  // namespace aist
