// Dual coordinate ascent for the shared-slack multiclass program.
//
// With C = ρ/2 the primal is  min ½‖w‖² + C Σ_i max(0, max_c G_ic(w)),
// G_ic(w) = ζ − a_icᵀw, where a_ic stacks ±φ(x_i) into the class blocks
// touched by constraint c. Its dual is
//
//     max ζ Σ α_ic − ½ ‖Σ α_ic a_ic‖²   s.t. α_ic ≥ 0, Σ_c α_ic ≤ C,
//
// and w = Σ α_ic a_ic. Each visit to a sample solves its block exactly up to
// a small tolerance by pairwise (SMO-style) moves on the capped simplex, with
// the unused capacity C − Σ_c α_ic acting as a zero-gradient slack
// coordinate. The duality gap certifies the returned point.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "aist/error.hpp"
#include "aist/simd.hpp"
#include "aist/svm.hpp"

namespace aist::detail {
namespace {

constexpr int kSlack = -1;
constexpr int kMaxInner = 64;
constexpr double kInnerTolerance = 1e-12;
// Primal objective and duality gap are evaluated every few epochs.
constexpr int kGapEvery = 10;
// A sample left untouched k visits in a row is skipped for 2^k − 1 epochs.
constexpr int kMaxIdleStreak = 4;
// Fixed so training is reproducible without a user-visible seed.
constexpr std::uint64_t kOrderSeed = 0x9e3779b97f4a7c15ull;

struct Coef {
  int cls;
  double value;
};

class SharedSlackSolver {
 public:
  SharedSlackSolver(const SolverProblem& p, const TrainOptions& opts)
      : p_(p), opts_(opts), n_(p.y.size()), L_(p.classes), d_(static_cast<std::size_t>(p.dim)),
        C_(p.rho / 2.0), B_(p.bias_scale) {
    W_.assign(static_cast<std::size_t>(L_) * d_, 0.0);
    wb_.assign(static_cast<std::size_t>(L_), 0.0);
    alpha_.assign(n_ * static_cast<std::size_t>(L_), 0.0);
    slack_.assign(n_, C_);
    skip_.assign(n_, 0);
    streak_.assign(n_, 0);
    sq_norm_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      double q = 0.0;
      for (std::size_t k = 0; k < d_; ++k) q += feature(i)[k] * feature(i)[k];
      sq_norm_[i] = q + B_ * B_;
    }
    features_soa_.resize(d_ * n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t k = 0; k < d_; ++k) features_soa_[k * n_ + i] = feature(i)[k];
    scores_.resize(static_cast<std::size_t>(L_));
    gradient_.resize(static_cast<std::size_t>(L_));
    batch_scores_.resize(static_cast<std::size_t>(L_) * n_);
  }

  SolverResult run() {
    std::vector<std::size_t> order(n_);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(kOrderSeed);
    TrainingSummary summary;
    summary.stop_reason = "epoch budget exhausted";

    double best_primal = std::numeric_limits<double>::infinity();
    std::vector<double> best_W, best_wb;
    struct Snapshot {
      int epoch;
      double best_primal, dual;
    };
    std::vector<Snapshot> history;

    for (int epoch = 1; epoch <= opts_.max_epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t i : order) {
        if (skip_[i] > 0) {
          --skip_[i];
          continue;
        }
        if (visit(i)) {
          streak_[i] = std::min(streak_[i] + 1, kMaxIdleStreak);
          skip_[i] = (1 << streak_[i]) - 1;
        } else {
          streak_[i] = 0;
        }
      }
      summary.epochs = epoch;
      if (epoch % kGapEvery != 0 && epoch != opts_.max_epochs) continue;

      // Full pass over every sample, skipped or not: this is the certificate.
      const Evaluation ev = evaluate();
      if (ev.primal < best_primal) {
        best_primal = ev.primal;
        best_W = W_;
        best_wb = wb_;
        summary.objective = ev.program_objective;
        summary.total_slack = ev.total_slack;
      }
      summary.dual_bound = 2.0 * ev.dual;
      summary.relative_gap = (best_primal - ev.dual) / std::max(std::abs(best_primal), 1e-300);
      if (summary.relative_gap <= opts_.tolerance) {
        summary.converged = true;
        summary.stop_reason = "duality gap below tolerance";
        break;
      }
      history.push_back({epoch, best_primal, ev.dual});
      const int window = opts_.stall_window;
      if (window > 0 && epoch > window) {
        // Neither side of the gap moved over the last window.
        auto then = std::find_if(history.rbegin(), history.rend(),
                                 [&](const Snapshot& h) { return h.epoch <= epoch - window; });
        const double tol = opts_.stall_tolerance * std::abs(best_primal);
        if (then != history.rend() && then->best_primal - best_primal <= tol && ev.dual - then->dual <= tol) {
          summary.stop_reason = "objective stalled";
          break;
        }
      }
    }

    SolverResult out;
    out.W = Matrix(L_, static_cast<Eigen::Index>(d_));
    out.b = Vector::Zero(L_);
    for (int m = 0; m < L_; ++m) {
      for (std::size_t k = 0; k < d_; ++k) out.W(m, static_cast<Eigen::Index>(k)) = best_W[m * d_ + k];
      out.b(m) = best_wb[static_cast<std::size_t>(m)] * B_;
    }
    out.summary = summary;
    return out;
  }

 private:
  struct Evaluation {
    double program_objective, primal, dual, total_slack;
  };

  const double* feature(std::size_t i) const { return p_.features.data() + i * d_; }
  double& alpha(std::size_t i, int c) { return alpha_[i * static_cast<std::size_t>(L_) + static_cast<std::size_t>(c)]; }

  // Constraints of a sample: every j != y in flat mode, every j <= y in conic mode.
  int constraint_end(int y) const { return p_.mode == SvmMode::flat ? L_ : y + 1; }
  bool is_constraint(int y, int j) const { return p_.mode == SvmMode::flat ? j != y : j <= y; }

  double score_of(int m, const double* f) const {
    double s = 0.0;
    const double* wm = W_.data() + static_cast<std::size_t>(m) * d_;
    for (std::size_t k = 0; k < d_; ++k) s += wm[k] * f[k];
    return s + wb_[static_cast<std::size_t>(m)] * B_;
  }

  double constraint_gradient(int y, int j) const {
    if (p_.mode == SvmMode::flat) return p_.zeta - (scores_[y] - scores_[j]);
    return j < y ? p_.zeta + scores_[j] : p_.zeta - scores_[y];
  }

  // Appends the class-block coefficients of constraint j, scaled by `sign`.
  void direction(int y, int j, double sign, std::array<Coef, 4>& out, int& n) const {
    auto add = [&](int cls, double v) {
      for (int k = 0; k < n; ++k)
        if (out[k].cls == cls) {
          out[k].value += v;
          return;
        }
      out[n++] = {cls, v};
    };
    if (j == kSlack) return;
    if (p_.mode == SvmMode::flat) {
      add(y, sign);
      add(j, -sign);
    } else {
      add(j, j < y ? -sign : sign);
    }
  }

  // Returns true when the sample has no active constraint and none is
  // violated, so the visit changed nothing.
  bool visit(std::size_t i) {
    const int y = p_.y[i];
    const int end = constraint_end(y);
    const double* f = feature(i);
    const int needed = p_.mode == SvmMode::flat ? L_ : end;
    for (int m = 0; m < needed; ++m) scores_[m] = score_of(m, f);

    for (int iter = 0; iter < kMaxInner; ++iter) {
      int up = kSlack, down = kSlack;
      double g_up = 0.0;
      double g_down = slack_[i] > 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
      for (int j = 0; j < end; ++j) {
        if (!is_constraint(y, j)) continue;
        const double g = constraint_gradient(y, j);
        gradient_[j] = g;
        if (g > g_up) {
          g_up = g;
          up = j;
        }
        if (alpha(i, j) > 0.0 && g < g_down) {
          g_down = g;
          down = j;
        }
      }
      if (iter == 0 && up == kSlack && slack_[i] == C_) return true;
      if (up == down || !(g_up - g_down > kInnerTolerance)) break;

      std::array<Coef, 4> dir{};
      int nd = 0;
      direction(y, up, 1.0, dir, nd);
      direction(y, down, -1.0, dir, nd);
      double curvature = 0.0;
      for (int k = 0; k < nd; ++k) curvature += dir[k].value * dir[k].value;
      curvature *= sq_norm_[i];
      if (!(curvature > 0.0)) break;

      const double cap = down == kSlack ? slack_[i] : alpha(i, down);
      const double t = std::min((g_up - g_down) / curvature, cap);
      if (!(t > 0.0)) break;
      if (up == kSlack) slack_[i] += t; else alpha(i, up) += t;
      if (down == kSlack) slack_[i] -= t; else alpha(i, down) = t == cap ? 0.0 : alpha(i, down) - t;

      for (int k = 0; k < nd; ++k) {
        const int m = dir[k].cls;
        const double step = t * dir[k].value;
        double* wm = W_.data() + static_cast<std::size_t>(m) * d_;
        for (std::size_t q = 0; q < d_; ++q) wm[q] += step * f[q];
        wb_[static_cast<std::size_t>(m)] += step * B_;
        scores_[m] += step * sq_norm_[i];
      }
    }
    return false;
  }


  Evaluation evaluate() {
    std::vector<double> bias(static_cast<std::size_t>(L_));
    for (int m = 0; m < L_; ++m) bias[static_cast<std::size_t>(m)] = wb_[static_cast<std::size_t>(m)] * B_;
    simd::affine_scores(W_, bias, static_cast<std::size_t>(L_), d_, features_soa_, batch_scores_);

    double total_slack = 0.0, alpha_sum = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const int y = p_.y[i];
      for (int m = 0; m < L_; ++m) scores_[m] = batch_scores_[static_cast<std::size_t>(m) * n_ + i];
      double theta = 0.0;
      for (int j = 0; j < constraint_end(y); ++j)
        if (is_constraint(y, j)) theta = std::max(theta, constraint_gradient(y, j));
      total_slack += theta;
      alpha_sum += C_ - slack_[i];
    }
    double w_sq = 0.0, wb_sq = 0.0;
    for (double v : W_) w_sq += v * v;
    for (double v : wb_) wb_sq += v * v;

    const double primal = 0.5 * (w_sq + wb_sq) + C_ * total_slack;
    const double dual = p_.zeta * alpha_sum - 0.5 * (w_sq + wb_sq);
    Evaluation ev;
    ev.program_objective = w_sq + wb_sq + p_.rho * total_slack;
    ev.dual = dual;
    ev.primal = primal;
    ev.total_slack = total_slack;
    return ev;
  }

  const SolverProblem& p_;
  const TrainOptions& opts_;
  std::size_t n_;
  int L_;
  std::size_t d_;
  double C_, B_;
  std::vector<double> W_, wb_, alpha_, slack_, sq_norm_, features_soa_;
  std::vector<int> skip_, streak_;
  std::vector<double> scores_, gradient_, batch_scores_;
};

}  // namespace

SolverResult solve_shared_slack(const SolverProblem& problem, const TrainOptions& opts) {
  if (problem.y.empty()) throw DomainError("solver: empty problem");
  if (opts.max_epochs < 1) throw DomainError("solver: max_epochs must be positive");
  if (problem.features.size() != problem.y.size() * static_cast<std::size_t>(problem.dim))
    throw ShapeError("solver: feature matrix does not match sample count");
  for (int y : problem.y)
    if (y < 0 || y >= problem.classes) throw DomainError("solver: class index out of range");
  return SharedSlackSolver(problem, opts).run();
}

}  // namespace aist::detail
