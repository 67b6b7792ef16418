#include "aist/svm.hpp"

#include <algorithm>
#include <fstream>
#include <limits>

#include "aist/error.hpp"
#include "aist/simd.hpp"

namespace aist {

std::string to_string(SvmMode mode) { return mode == SvmMode::flat ? "flat" : "conic"; }
std::string to_string(FeatureMap map) { return map == FeatureMap::raw ? "raw" : "veronese2"; }

SvmMode parse_mode(const std::string& s) {
  if (s == "flat") return SvmMode::flat;
  if (s == "conic") return SvmMode::conic;
  throw DomainError("unknown classifier mode '" + s + "'");
}

FeatureMap parse_feature_map(const std::string& s) {
  if (s == "raw") return FeatureMap::raw;
  if (s == "veronese2") return FeatureMap::veronese2;
  throw DomainError("unknown feature map '" + s + "'");
}

Vector veronese2(const Vector& x) {
  const auto n = x.size();
  Vector v(n * (n + 1) / 2);
  Eigen::Index p = 0;
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = a; b < n; ++b) v(p++) = x(a) * x(b);
  return v;
}

Vector map_features(FeatureMap map, const Vector& x) {
  return map == FeatureMap::raw ? x : veronese2(x);
}

Eigen::Index feature_dim(FeatureMap map, Eigen::Index n) {
  return map == FeatureMap::raw ? n : n * (n + 1) / 2;
}

// ------------------------------------------------------------- evaluation

Vector class_scores(const MulticlassModel& model, const Vector& x) {
  if (x.size() != model.state_dim) throw ShapeError("classifier: state dimension mismatch");
  return model.W * map_features(model.feature_map, x) + model.b;
}

namespace {

// g from the class scores; `y` is the sample's class.
double g_from_scores(const MulticlassModel& model, const double* s, std::size_t stride, int y) {
  const int L = model.classes();
  if (L == 1) return 0.0;
  double g = -std::numeric_limits<double>::infinity();
  if (model.mode == SvmMode::flat) {
    for (int j = 0; j < L; ++j)
      if (j != y) g = std::max(g, model.zeta - (s[static_cast<std::size_t>(y) * stride] - s[static_cast<std::size_t>(j) * stride]));
  } else {
    for (int j = 0; j < y; ++j) g = std::max(g, model.zeta + s[static_cast<std::size_t>(j) * stride]);
    g = std::max(g, model.zeta - s[static_cast<std::size_t>(y) * stride]);
  }
  return g;
}

int decide_from_scores(const MulticlassModel& model, const double* s, std::size_t stride) {
  const int L = model.classes();
  if (model.mode == SvmMode::flat) {
    int best = 0;
    for (int j = 1; j < L; ++j)
      if (s[static_cast<std::size_t>(j) * stride] > s[static_cast<std::size_t>(best) * stride]) best = j;
    return best;
  }
  for (int j = 0; j < L; ++j)
    if (s[static_cast<std::size_t>(j) * stride] > 0.0) return j;
  return L - 1;
}

int class_of(const MulticlassModel& model, const Label& label) {
  auto c = model.label_table.find(label);
  if (!c) throw ClassificationDomainError("label " + label_to_string(label) + " is unknown to the classifier");
  return *c;
}

std::vector<double> batch_scores(const MulticlassModel& model, std::span<const double> soa,
                                 std::size_t count) {
  const auto n = static_cast<std::size_t>(model.state_dim);
  if (soa.size() != n * count) throw ShapeError("classifier: batch shape mismatch");
  const auto d = static_cast<std::size_t>(model.W.cols());
  std::vector<double> features;
  std::span<const double> feat = soa;
  if (model.feature_map == FeatureMap::veronese2) {
    features.resize(d * count);
    simd::veronese2(soa, n, features);
    feat = features;
  }
  const auto L = static_cast<std::size_t>(model.classes());
  std::vector<double> w(L * d);
  for (std::size_t j = 0; j < L; ++j)
    for (std::size_t k = 0; k < d; ++k) w[j * d + k] = model.W(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
  std::vector<double> b(model.b.data(), model.b.data() + L);
  std::vector<double> scores(L * count);
  simd::affine_scores(w, b, L, d, feat, scores);
  return scores;
}

}  // namespace

double g_value_for_class(const MulticlassModel& model, const Vector& x, int cls) {
  if (cls < 0 || cls >= model.classes()) throw ClassificationDomainError("class index out of range");
  const Vector s = class_scores(model, x);
  return g_from_scores(model, s.data(), 1, cls);
}

double g_value(const MulticlassModel& model, const LabeledSample& sample) {
  return g_value_for_class(model, sample.x, class_of(model, sample.label));
}

int predict(const MulticlassModel& model, const Vector& x) {
  const Vector s = class_scores(model, x);
  return decide_from_scores(model, s.data(), 1);
}

const Label& predict_label(const MulticlassModel& model, const Vector& x) {
  return model.label_table.at(predict(model, x));
}

std::vector<int> predict_batch(const MulticlassModel& model, std::span<const double> soa,
                               std::size_t count) {
  const auto scores = batch_scores(model, soa, count);
  std::vector<int> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = decide_from_scores(model, scores.data() + i, count);
  return out;
}

std::vector<double> g_values_batch(const MulticlassModel& model, std::span<const double> soa,
                                   std::span<const int> classes) {
  const std::size_t count = classes.size();
  const auto scores = batch_scores(model, soa, count);
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (classes[i] < 0 || classes[i] >= model.classes()) throw ClassificationDomainError("class index out of range");
    out[i] = g_from_scores(model, scores.data() + i, count, classes[i]);
  }
  return out;
}

std::size_t count_violations(const MulticlassModel& model, const ScenarioSet& data) {
  std::vector<int> cls;
  std::vector<Vector> xs;
  cls.reserve(data.size());
  xs.reserve(data.size());
  for (const auto& s : data.samples) {
    cls.push_back(class_of(model, s.label));
    xs.push_back(s.x);
  }
  if (xs.empty()) return 0;
  const auto g = g_values_batch(model, to_soa(xs), cls);
  return static_cast<std::size_t>(std::count_if(g.begin(), g.end(), [](double v) { return v > kViolationTieTolerance; }));
}

// --------------------------------------------------------------- training

MulticlassModel train(const ScenarioSet& data, SvmMode mode, double rho, double zeta,
                      const TrainOptions& opts) {
  if (data.samples.empty()) throw DomainError("train: empty dataset");
  if (!(rho > 0.0) || !(zeta > 0.0)) throw DomainError("train: rho and zeta must be positive");

  MulticlassModel model;
  model.mode = mode;
  model.feature_map = opts.feature_map;
  model.state_dim = data.state_dim();
  model.zeta = zeta;
  model.rho = rho;

  if (mode == SvmMode::conic) {
    if (data.ell > 1 && !opts.allow_conic_sequences)
      throw UnsupportedConfiguration(
          "conic mode defines its first-violation order only for single-IST labels (ell = 1); "
          "use flat mode for ell > 1");
    auto labels = data.label_table.labels();
    std::sort(labels.begin(), labels.end());
    model.label_table = LabelTable(std::move(labels));
  } else {
    model.label_table = data.label_table;
  }

  const auto d = feature_dim(model.feature_map, model.state_dim);
  const int L = model.label_table.size();
  if (L == 1) {
    model.W = Matrix::Zero(1, d);
    model.b = Vector::Zero(1);
    model.training.converged = true;
    model.training.stop_reason = "single class";
    return model;
  }

  detail::SolverProblem problem;
  problem.mode = mode;
  problem.classes = L;
  problem.dim = d;
  problem.zeta = zeta;
  problem.rho = rho;
  problem.bias_scale = mode == SvmMode::flat ? opts.bias_scale : 0.0;
  problem.features.reserve(data.size() * static_cast<std::size_t>(d));
  for (const auto& s : data.samples) {
    const Vector f = map_features(model.feature_map, s.x);
    problem.features.insert(problem.features.end(), f.data(), f.data() + f.size());
    problem.y.push_back(class_of(model, s.label));
  }
  auto result = detail::solve_shared_slack(problem, opts);
  model.W = std::move(result.W);
  model.b = std::move(result.b);
  model.training = result.summary;
  return model;
}

// -------------------------------------------------------------------- json

io::json MulticlassModel::to_json() const {
  io::json j;
  j["mode"] = to_string(mode);
  j["feature_map"] = to_string(feature_map);
  j["state_dim"] = state_dim;
  j["zeta"] = zeta;
  j["rho"] = rho;
  j["label_table"] = label_table.labels();
  j["W"] = io::matrix_to_json(W);
  j["b"] = std::vector<double>(b.data(), b.data() + b.size());
  j["training"] = {{"objective", training.objective},
                   {"dual_bound", training.dual_bound},
                   {"relative_gap", training.relative_gap},
                   {"total_slack", training.total_slack},
                   {"epochs", training.epochs},
                   {"converged", training.converged},
                   {"stop_reason", training.stop_reason}};
  return j;
}

MulticlassModel MulticlassModel::from_json(const io::json& j) {
  MulticlassModel m;
  try {
    m.mode = parse_mode(j.at("mode").get<std::string>());
    m.feature_map = parse_feature_map(j.at("feature_map").get<std::string>());
    m.zeta = j.at("zeta").get<double>();
    m.rho = j.at("rho").get<double>();
    m.label_table = LabelTable(j.at("label_table").get<std::vector<Label>>());
    m.W = io::matrix_from_json(j.at("W"), "W");
    const auto b = j.at("b").get<std::vector<double>>();
    m.b = Eigen::Map<const Vector>(b.data(), static_cast<Eigen::Index>(b.size()));
    m.state_dim = j.value("state_dim", m.feature_map == FeatureMap::raw ? m.W.cols() : Eigen::Index{0});
    if (j.contains("training")) {
      const auto& t = j.at("training");
      m.training.objective = t.value("objective", 0.0);
      m.training.dual_bound = t.value("dual_bound", 0.0);
      m.training.relative_gap = t.value("relative_gap", 0.0);
      m.training.total_slack = t.value("total_slack", 0.0);
      m.training.epochs = t.value("epochs", 0);
      m.training.converged = t.value("converged", false);
      m.training.stop_reason = t.value("stop_reason", std::string{});
    }
  } catch (const io::json::exception& e) {
    throw DomainError(std::string("malformed model file: ") + e.what());
  }
  if (m.W.rows() != m.label_table.size() || m.b.size() != m.W.rows())
    throw ShapeError("model: W, b and label_table disagree on the class count");
  if (feature_dim(m.feature_map, m.state_dim) != m.W.cols())
    throw ShapeError("model: W columns do not match the feature map");
  if (m.mode == SvmMode::conic && m.b.cwiseAbs().maxCoeff() != 0.0)
    throw DomainError("model: conic mode requires zero offsets");
  return m;
}

void MulticlassModel::save(const std::string& path) const { io::write_json_file(path, to_json()); }

MulticlassModel MulticlassModel::load(const std::string& path) {
  return from_json(io::read_json_file(path));
}

}  // namespace aist
