#include "aist/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "aist/error.hpp"
#include "aist/json_io.hpp"

namespace aist {

std::string label_to_string(const Label& label) {
  std::string s = "(";
  for (std::size_t i = 0; i < label.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(label[i]);
  }
  return s + ")";
}

LabelTable::LabelTable(std::vector<Label> labels) {
  for (auto& l : labels) {
    if (index_.count(l)) throw DomainError("label table contains a duplicate label");
    intern(l);
  }
}

int LabelTable::intern(const Label& label) {
  auto [it, inserted] = index_.emplace(label, size());
  if (inserted) labels_.push_back(label);
  return it->second;
}

std::optional<int> LabelTable::find(const Label& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<int> ScenarioSet::classes() const {
  std::vector<int> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    auto c = label_table.find(s.label);
    if (!c) throw ClassificationDomainError("sample label " + label_to_string(s.label) + " is not in the label table");
    out.push_back(*c);
  }
  return out;
}

std::vector<Vector> sample_states(int n_x, std::size_t count, std::uint64_t seed) {
  if (n_x <= 0) throw DomainError("sample_states: dimension must be positive");
  if (count == 0) throw DomainError("sample_states: count must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Vector> out;
  out.reserve(count);
  while (out.size() < count) {
    Vector x(n_x);
    for (int r = 0; r < n_x; ++r) x(r) = gauss(rng);
    const double norm = x.norm();
    if (norm < 1e-300) continue;
    out.push_back(x / norm);
  }
  return out;
}

std::vector<double> to_soa(const std::vector<Vector>& states) {
  if (states.empty()) return {};
  const auto n = static_cast<std::size_t>(states.front().size());
  const std::size_t count = states.size();
  std::vector<double> soa(n * count);
  for (std::size_t i = 0; i < count; ++i) {
    if (static_cast<std::size_t>(states[i].size()) != n) throw ShapeError("to_soa: mixed state dimensions");
    for (std::size_t r = 0; r < n; ++r) soa[r * count + i] = states[i](static_cast<Eigen::Index>(r));
  }
  return soa;
}

ScenarioSet generate_dataset(const LtiPetcSystem& sys, int ell, std::size_t count, std::uint64_t seed) {
  if (ell < 1) throw DomainError("generate_dataset: ell must be positive");
  const auto cones = trigger_cones(sys);
  auto states = sample_states(static_cast<int>(sys.state_dim()), count, seed);
  const auto labels = ist_sequences_batch(cones, to_soa(states), count, ell);

  ScenarioSet set;
  set.ell = ell;
  set.seed = seed;
  set.system_fingerprint = sys.fingerprint();
  set.h = sys.h();
  set.kappa_bar = sys.kappa_bar();
  set.samples.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    set.label_table.intern(labels[i]);
    set.samples.push_back({std::move(states[i]), labels[i]});
  }
  return set;
}

std::pair<ScenarioSet, ScenarioSet> split(const ScenarioSet& set, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw DomainError("split: fraction must lie in (0, 1)");
  const std::size_t n = set.size();
  const auto first = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  if (first == 0 || first == n) throw DomainError("split: one side of the partition would be empty");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<bool> in_first(n, false);
  for (std::size_t i = 0; i < first; ++i) in_first[order[i]] = true;

  ScenarioSet a = set, b = set;
  a.samples.clear();
  b.samples.clear();
  for (std::size_t i = 0; i < n; ++i) (in_first[i] ? a : b).samples.push_back(set.samples[i]);
  return {std::move(a), std::move(b)};
}

// ------------------------------------------------------------- jsonl files

std::string dataset_to_jsonl(const ScenarioSet& set) {
  io::json header;
  header["ell"] = set.ell;
  header["seed"] = set.seed;
  header["system_fingerprint"] = set.system_fingerprint;
  header["label_table"] = set.label_table.labels();
  header["h"] = set.h;
  header["kappa_bar"] = set.kappa_bar;
  header["state_dim"] = set.state_dim();
  header["count"] = set.size();

  std::string out = header.dump() + "\n";
  for (const auto& s : set.samples) {
    io::json line;
    line["x"] = std::vector<double>(s.x.data(), s.x.data() + s.x.size());
    line["label"] = s.label;
    out += line.dump();
    out += '\n';
  }
  return out;
}

ScenarioSet dataset_from_jsonl(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw IoError("dataset: missing header line");
  ScenarioSet set;
  try {
    const auto header = io::json::parse(line);
    set.ell = header.at("ell").get<int>();
    set.seed = header.at("seed").get<std::uint64_t>();
    set.system_fingerprint = header.at("system_fingerprint").get<std::string>();
    set.label_table = LabelTable(header.at("label_table").get<std::vector<Label>>());
    set.h = header.value("h", 1.0);
    set.kappa_bar = header.value("kappa_bar", 0);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto j = io::json::parse(line);
      const auto xs = j.at("x").get<std::vector<double>>();
      LabeledSample s{Eigen::Map<const Vector>(xs.data(), static_cast<Eigen::Index>(xs.size())),
                      j.at("label").get<Label>()};
      set.samples.push_back(std::move(s));
    }
  } catch (const io::json::exception& e) {
    throw IoError(std::string("dataset: ") + e.what());
  }
  if (set.samples.empty()) throw DomainError("dataset: no samples");
  for (const auto& s : set.samples) {
    if (static_cast<int>(s.label.size()) != set.ell) throw DomainError("dataset: label length differs from ell");
    if (!set.label_table.find(s.label)) throw DomainError("dataset: label missing from label_table");
    if (s.x.size() != set.state_dim()) throw ShapeError("dataset: mixed state dimensions");
    for (int t : s.label)
      if (t < 1 || (set.kappa_bar > 0 && t > set.kappa_bar)) throw DomainError("dataset: IST outside 1..kappa_bar");
  }
  return set;
}

void save_dataset(const std::string& path, const ScenarioSet& set) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << dataset_to_jsonl(set);
}

ScenarioSet load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return dataset_from_jsonl(buf.str());
}

}  // namespace aist
