#include "aist/dynamics.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "aist/error.hpp"
#include "aist/json_io.hpp"
#include "aist/simd.hpp"

namespace aist {

// ---------------------------------------------------------------- json io

namespace io {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, std::string_view what) {
  if (!j.is_array() || j.empty() || !j.front().is_array())
    throw ShapeError(std::string(what) + ": expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw ShapeError(std::string(what) + ": ragged rows");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError("'" + path + "': " + e.what());
  }
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

}  // namespace io

// ----------------------------------------------------------------- system

namespace {

bool is_symmetric(const Matrix& r) {
  const double scale = std::max(1.0, r.cwiseAbs().maxCoeff());
  return (r - r.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

}  // namespace

LtiPetcSystem::LtiPetcSystem(Matrix A, Matrix B, Matrix K, Trigger trigger, double h,
                             int kappa_bar)
    : a_(std::move(A)), b_(std::move(B)), k_(std::move(K)), trigger_(std::move(trigger)),
      h_(h), kappa_bar_(kappa_bar) {
  const auto n = a_.rows();
  if (n == 0 || a_.cols() != n) throw ShapeError("A must be a non-empty square matrix");
  if (b_.rows() != n) throw ShapeError("B must have as many rows as A");
  if (k_.rows() != b_.cols()) throw ShapeError("K row count must equal B column count");
  if (k_.cols() != n) throw ShapeError("K column count must equal the state dimension");
  if (!(h_ > 0.0) || !std::isfinite(h_)) throw DomainError("checking period h must be positive");
  if (kappa_bar_ < 1) throw DomainError("heartbeat kappa_bar must be at least 1");
  if (const auto* s = std::get_if<SigmaTrigger>(&trigger_)) {
    if (!(s->sigma > 0.0 && s->sigma < 1.0)) throw DomainError("sigma must lie in (0, 1)");
  } else {
    const auto& r = std::get<MatrixTrigger>(trigger_).R;
    if (r.rows() != 2 * n || r.cols() != 2 * n) throw ShapeError("R must be 2n x 2n");
    if (!is_symmetric(r)) throw DomainError("R must be symmetric");
  }
}

Matrix LtiPetcSystem::triggering_matrix() const {
  if (const auto* m = std::get_if<MatrixTrigger>(&trigger_)) return m->R;
  const double s = std::get<SigmaTrigger>(trigger_).sigma;
  const auto n = state_dim();
  const Matrix eye = Matrix::Identity(n, n);
  Matrix r(2 * n, 2 * n);
  r << (1.0 - s * s) * eye, -eye, -eye, eye;
  return r;
}

LtiPetcSystem LtiPetcSystem::with_kappa_bar(int kappa_bar) const {
  return LtiPetcSystem(a_, b_, k_, trigger_, h_, kappa_bar);
}

io::json LtiPetcSystem::to_json() const {
  io::json j;
  j["A"] = io::matrix_to_json(a_);
  j["B"] = io::matrix_to_json(b_);
  j["K"] = io::matrix_to_json(k_);
  j["h"] = h_;
  j["kappa_bar"] = kappa_bar_;
  if (const auto* s = std::get_if<SigmaTrigger>(&trigger_))
    j["trigger"] = {{"type", "sigma"}, {"sigma", s->sigma}};
  else
    j["trigger"] = {{"type", "matrix"}, {"R", io::matrix_to_json(std::get<MatrixTrigger>(trigger_).R)}};
  return j;
}

LtiPetcSystem LtiPetcSystem::from_json(const io::json& j) {
  try {
    for (const char* key : {"A", "B", "K", "kappa_bar", "trigger"})
      if (!j.contains(key)) throw DomainError(std::string("system config is missing '") + key + "'");
    const auto& t = j.at("trigger");
    const auto type = t.at("type").get<std::string>();
    Trigger trigger;
    if (type == "sigma")
      trigger = SigmaTrigger{t.at("sigma").get<double>()};
    else if (type == "matrix")
      trigger = MatrixTrigger{io::matrix_from_json(t.at("R"), "R")};
    else
      throw DomainError("unknown trigger type '" + type + "'");
    return LtiPetcSystem(io::matrix_from_json(j.at("A"), "A"), io::matrix_from_json(j.at("B"), "B"),
                         io::matrix_from_json(j.at("K"), "K"), std::move(trigger),
                         j.value("h", 1.0), j.at("kappa_bar").get<int>());
  } catch (const io::json::exception& e) {
    throw DomainError(std::string("malformed system config: ") + e.what());
  }
}

LtiPetcSystem LtiPetcSystem::load(const std::string& path) {
  return from_json(io::read_json_file(path));
}

std::string LtiPetcSystem::fingerprint() const {
  return io::hex64(io::fnv1a64(to_json().dump()));
}

// --------------------------------------------------------------- dynamics

Matrix matrix_exponential(const Matrix& m, double t) {
  if (m.rows() != m.cols()) throw ShapeError("matrix_exponential: matrix must be square");
  if (!std::isfinite(t)) throw DomainError("matrix_exponential: t must be finite");
  const auto n = m.rows();
  Matrix a = m * t;
  const double norm = a.cwiseAbs().colwise().sum().maxCoeff();  // 1-norm
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  a /= std::ldexp(1.0, squarings);

  // ‖a‖₁ ≤ 1/2: the Taylor remainder after 20 terms is below 1e-25.
  Matrix result = Matrix::Identity(n, n);
  Matrix term = Matrix::Identity(n, n);
  for (int k = 1; k <= 20; ++k) {
    term = term * a / static_cast<double>(k);
    result += term;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

Matrix hold_transition(const LtiPetcSystem& sys, int k) {
  if (k < 1 || k > sys.kappa_bar())
    throw DomainError("hold_transition: k must lie in 1..kappa_bar");
  const auto n = sys.state_dim();
  Matrix aug = Matrix::Zero(2 * n, 2 * n);
  aug.topLeftCorner(n, n) = sys.A();
  aug.topRightCorner(n, n) = sys.B() * sys.K();
  const Matrix e = matrix_exponential(aug, k * sys.h());
  return e.topLeftCorner(n, n) + e.topRightCorner(n, n);
}

TriggerCones trigger_cones(const LtiPetcSystem& sys) {
  const auto n = sys.state_dim();
  const Matrix r = sys.triggering_matrix();
  TriggerCones cones;
  cones.h = sys.h();
  cones.kappa_bar = sys.kappa_bar();
  for (int k = 1; k <= sys.kappa_bar(); ++k) {
    Matrix m = hold_transition(sys, k);
    Matrix stacked(2 * n, n);
    stacked << m, Matrix::Identity(n, n);
    Matrix nk = stacked.transpose() * r * stacked;
    nk = 0.5 * (nk + nk.transpose()).eval();
    std::vector<double> flat(static_cast<std::size_t>(n * n));
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) flat[static_cast<std::size_t>(i * n + j)] = nk(i, j);
    cones.N.push_back(std::move(nk));
    cones.M.push_back(std::move(m));
    cones.N_flat.push_back(std::move(flat));
  }
  return cones;
}

std::vector<int> exact_ist_batch(const TriggerCones& cones, std::span<const double> soa,
                                 std::size_t count) {
  const auto n = static_cast<std::size_t>(cones.state_dim());
  if (soa.size() != n * count) throw ShapeError("exact_ist_batch: batch size mismatch");
  std::vector<int> ist(count, 0);
  for (std::size_t i = 0; i < count; ++i) {
    bool zero = true;
    for (std::size_t r = 0; r < n && zero; ++r) zero = soa[r * count + i] == 0.0;
    if (zero) throw DomainError("exact_ist: triggering is undefined at the origin");
  }

  // Only states that have not fired yet are evaluated at the next check.
  std::vector<std::size_t> pending(count);
  for (std::size_t i = 0; i < count; ++i) pending[i] = i;
  std::vector<double> packed, values;
  for (int k = 1; k < cones.kappa_bar && !pending.empty(); ++k) {
    const std::size_t m = pending.size();
    packed.resize(n * m);
    values.resize(m);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t p = 0; p < m; ++p) packed[r * m + p] = soa[r * count + pending[p]];
    simd::quadratic_forms(cones.N_flat[static_cast<std::size_t>(k - 1)], n, packed, values);
    std::size_t keep = 0;
    for (std::size_t p = 0; p < m; ++p) {
      if (values[p] > 0.0)
        ist[pending[p]] = k;
      else
        pending[keep++] = pending[p];
    }
    pending.resize(keep);
  }
  for (std::size_t i : pending) ist[i] = cones.kappa_bar;
  return ist;
}

int exact_ist(const TriggerCones& cones, const Vector& x) {
  if (x.size() != cones.state_dim()) throw ShapeError("exact_ist: state dimension mismatch");
  return exact_ist_batch(cones, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())), 1)
      .front();
}

Vector next_sample(const TriggerCones& cones, const Vector& x, int ist) {
  const auto& m = cones.M[static_cast<std::size_t>(ist - 1)];
  const auto n = m.rows();
  // Explicit loop so the batch and single-state paths round identically.
  Vector y(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    double acc = 0.0;
    for (Eigen::Index c = 0; c < n; ++c) acc = acc + m(r, c) * x(c);
    y(r) = acc;
  }
  double sq = 0.0;
  for (Eigen::Index r = 0; r < n; ++r) sq = sq + y(r) * y(r);
  const double norm = std::sqrt(sq);
  if (!(norm > 0.0) || !std::isfinite(norm))
    throw DegeneracyError("sampled trajectory collapsed onto the origin");
  for (Eigen::Index r = 0; r < n; ++r) y(r) = y(r) / norm;
  return y;
}

std::vector<int> ist_sequence(const TriggerCones& cones, const Vector& x0, int ell) {
  if (ell < 1) throw DomainError("ist_sequence: ell must be positive");
  std::vector<int> seq;
  seq.reserve(static_cast<std::size_t>(ell));
  Vector x = x0;
  for (int i = 0; i < ell; ++i) {
    const int tau = exact_ist(cones, x);
    seq.push_back(tau);
    if (i + 1 < ell) x = next_sample(cones, x, tau);
  }
  return seq;
}

std::vector<std::vector<int>> ist_sequences_batch(const TriggerCones& cones,
                                                  std::span<const double> soa,
                                                  std::size_t count, int ell) {
  if (ell < 1) throw DomainError("ist_sequence: ell must be positive");
  const auto n = static_cast<std::size_t>(cones.state_dim());
  if (soa.size() != n * count) throw ShapeError("ist_sequences_batch: batch size mismatch");
  std::vector<std::vector<int>> out(count);
  for (auto& s : out) s.reserve(static_cast<std::size_t>(ell));
  std::vector<double> current(soa.begin(), soa.end());
  Vector x(static_cast<Eigen::Index>(n));
  for (int step = 0; step < ell; ++step) {
    const auto ist = exact_ist_batch(cones, current, count);
    for (std::size_t i = 0; i < count; ++i) out[i].push_back(ist[i]);
    if (step + 1 == ell) break;
    for (std::size_t i = 0; i < count; ++i) {
      for (std::size_t r = 0; r < n; ++r) x(static_cast<Eigen::Index>(r)) = current[r * count + i];
      const Vector y = next_sample(cones, x, ist[i]);
      for (std::size_t r = 0; r < n; ++r) current[r * count + i] = y(static_cast<Eigen::Index>(r));
    }
  }
  return out;
}

double empirical_aist(const TriggerCones& cones, const Vector& x0, int n) {
  if (n < 1) throw DomainError("empirical_aist: n must be positive");
  long long total = 0;
  Vector x = x0;
  for (int i = 0; i <= n; ++i) {
    const int tau = exact_ist(cones, x);
    total += tau;
    if (i < n) x = next_sample(cones, x, tau);
  }
  return static_cast<double>(total) / static_cast<double>(n + 1) * cones.h;
}

HeartbeatCalibration calibrate_kappa_bar(const LtiPetcSystem& sys, std::span<const double> probes,
                                         std::size_t count, double coverage, int max_kappa_bar) {
  if (count == 0) throw DomainError("calibrate_kappa_bar: no probe states");
  HeartbeatCalibration best;
  for (int kb = 1; kb <= max_kappa_bar; ++kb) {
    const auto cones = trigger_cones(sys.with_kappa_bar(kb));
    const auto ist = exact_ist_batch(cones, probes, count);
    std::size_t below = 0;
    for (int t : ist) below += t < kb ? 1 : 0;
    best = {kb, static_cast<double>(below) / static_cast<double>(count)};
    if (best.below_fraction >= coverage) return best;
  }
  throw NumericError("calibrate_kappa_bar: no heartbeat up to " + std::to_string(max_kappa_bar) +
                     " reaches the requested coverage");
}

}  // namespace aist
