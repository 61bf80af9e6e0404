#include "neuropt/nlpsolve/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "neuropt/error.hpp"
#include "neuropt/nlpsolve/kkt_system.hpp"

namespace neuropt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kKappaSigma = 1e10;
constexpr double kArmijo = 1e-4;
constexpr double kBacktrack = 0.5;
constexpr double kBarrierTolFactor = 10.0;
constexpr double kDualScaleMax = 100.0;
constexpr double kMaxRegularization = 1e10;
constexpr double kMaxInitialMultiplier = 1e3;
constexpr double kDivergenceNorm = 1e20;
constexpr int kMaxBacktracks = 60;

// One residual row of the barrier formulation: sign * (g[g_row] - bound) - s[slack].
struct Row {
  int g_row;
  double sign;
  double bound;
  int slack;  // -1 for equalities
};

struct Layout {
  int n = 0;
  int m = 0;
  int p = 0;  // slack count
  std::vector<Row> rows;
  std::vector<int> slack_row;
  std::vector<char> has_lo;
  std::vector<char> has_hi;
  Vector xl;
  Vector xu;

  explicit Layout(const NlpProblem& prob) : n(prob.n()), m(prob.m()), xl(prob.x_lower()), xu(prob.x_upper()) {
    for (int i = 0; i < m; ++i) {
      const double lo = prob.constraint_lower()[i];
      const double hi = prob.constraint_upper()[i];
      if (lo == hi) {
        rows.push_back({i, 1.0, lo, -1});
        continue;
      }
      if (std::isfinite(lo)) {
        rows.push_back({i, 1.0, lo, p++});
        slack_row.push_back(static_cast<int>(rows.size()) - 1);
      }
      if (std::isfinite(hi)) {
        rows.push_back({i, -1.0, hi, p++});
        slack_row.push_back(static_cast<int>(rows.size()) - 1);
      }
    }
    has_lo.resize(static_cast<std::size_t>(n));
    has_hi.resize(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      if (xl[j] == xu[j]) {
        throw ValidationError(fmt::format("variable {} has equal bounds; fix it with an equality constraint", j));
      }
      has_lo[static_cast<std::size_t>(j)] = std::isfinite(xl[j]);
      has_hi[static_cast<std::size_t>(j)] = std::isfinite(xu[j]);
    }
  }

  int mc() const { return static_cast<int>(rows.size()); }
  bool lo(int j) const { return has_lo[static_cast<std::size_t>(j)] != 0; }
  bool hi(int j) const { return has_hi[static_cast<std::size_t>(j)] != 0; }

  Vector residual(const Vector& g, const Vector& s) const {
    Vector c(mc());
    for (int r = 0; r < mc(); ++r) {
      const Row& row = rows[static_cast<std::size_t>(r)];
      c[r] = row.sign * (g[row.g_row] - row.bound) - (row.slack >= 0 ? s[row.slack] : 0.0);
    }
    return c;
  }

  Matrix residual_jacobian(const Matrix& jac) const {
    Matrix jc(mc(), n);
    for (int r = 0; r < mc(); ++r) {
      const Row& row = rows[static_cast<std::size_t>(r)];
      jc.row(r) = row.sign * jac.row(row.g_row);
    }
    return jc;
  }

  Vector lambda(const Vector& y) const {
    Vector l = Vector::Zero(m);
    for (int r = 0; r < mc(); ++r) {
      const Row& row = rows[static_cast<std::size_t>(r)];
      l[row.g_row] += row.sign * y[r];
    }
    return l;
  }
};

struct Eval {
  double f = 0.0;
  Vector g;
  Vector grad;
  Matrix jac;
  Matrix jc;  // residual-row Jacobian
};

bool eval_values(const NlpProblem& p, const Vector& x, double& f, Vector& g, NlpWorkspace& ws) {
  try {
    p.eval_values(x, f, g, ws);
  } catch (const DomainError&) {
    return false;
  }
  return std::isfinite(f) && g.allFinite();
}

bool eval_all(const NlpProblem& p, const Layout& L, const Vector& x, Eval& ev, NlpWorkspace& ws) {
  if (!eval_values(p, x, ev.f, ev.g, ws)) return false;
  try {
    p.eval_derivatives(x, ev.grad, ev.jac, ws);
  } catch (const DomainError&) {
    return false;
  }
  if (!ev.grad.allFinite() || !ev.jac.allFinite()) return false;
  ev.jc = L.residual_jacobian(ev.jac);
  return true;
}

Vector bound_duals_full(const Layout& L, const Vector& zl, const Vector& zu) {
  Vector d = Vector::Zero(L.n);
  for (int j = 0; j < L.n; ++j) d[j] = (L.lo(j) ? -zl[j] : 0.0) + (L.hi(j) ? zu[j] : 0.0);
  return d;
}

double optimality_error(const Layout& L, const Eval& ev, const PrimalDualPoint& pt, double mu) {
  // Dual residuals.
  Vector rx = ev.grad + bound_duals_full(L, pt.zl, pt.zu);
  if (L.mc() > 0) rx += ev.jc.transpose() * pt.y;
  double dual = rx.size() ? rx.lpNorm<Eigen::Infinity>() : 0.0;
  for (int k = 0; k < L.p; ++k) dual = std::max(dual, std::abs(-pt.y[L.slack_row[static_cast<std::size_t>(k)]] - pt.v[k]));

  double dual_sum = pt.y.lpNorm<1>() + pt.v.lpNorm<1>();
  int dual_count = L.mc() + L.p;
  double comp = 0.0;
  for (int j = 0; j < L.n; ++j) {
    if (L.lo(j)) {
      dual_sum += std::abs(pt.zl[j]);
      ++dual_count;
      comp = std::max(comp, std::abs((pt.x[j] - L.xl[j]) * pt.zl[j] - mu));
    }
    if (L.hi(j)) {
      dual_sum += std::abs(pt.zu[j]);
      ++dual_count;
      comp = std::max(comp, std::abs((L.xu[j] - pt.x[j]) * pt.zu[j] - mu));
    }
  }
  for (int k = 0; k < L.p; ++k) comp = std::max(comp, std::abs(pt.s[k] * pt.v[k] - mu));
  const double mean = dual_count > 0 ? dual_sum / dual_count : 0.0;
  const double sd = std::max(kDualScaleMax, mean) / kDualScaleMax;

  const Vector c = L.residual(ev.g, pt.s);
  const double primal = c.size() ? c.lpNorm<Eigen::Infinity>() : 0.0;
  return std::max({dual / sd, primal, comp});
}

Vector interior_x(const Layout& L, Vector x) {
  for (int j = 0; j < L.n; ++j) {
    const bool lo = L.lo(j);
    const bool hi = L.hi(j);
    const double margin = 1e-2 * (lo && hi ? L.xu[j] - L.xl[j] : 1.0);
    if (lo && x[j] < L.xl[j] + margin) x[j] = L.xl[j] + margin;
    if (hi && x[j] > L.xu[j] - margin) x[j] = L.xu[j] - margin;
  }
  return x;
}

PrimalDualPoint make_initial(const Layout& L, const Vector& x_in, const Vector& g, double mu) {
  PrimalDualPoint pt;
  pt.x = interior_x(L, x_in);
  pt.s = Vector::Zero(L.p);
  pt.v = Vector::Zero(L.p);
  pt.y = Vector::Zero(L.mc());
  pt.zl = Vector::Zero(L.n);
  pt.zu = Vector::Zero(L.n);
  const double push = std::min(1e-2, mu);
  for (int r = 0; r < L.mc(); ++r) {
    const Row& row = L.rows[static_cast<std::size_t>(r)];
    if (row.slack < 0) continue;
    const double floor = push * std::max(1.0, std::abs(row.bound));
    pt.s[row.slack] = std::max(row.sign * (g[row.g_row] - row.bound), floor);
    pt.v[row.slack] = mu / pt.s[row.slack];
  }
  for (int j = 0; j < L.n; ++j) {
    if (L.lo(j)) pt.zl[j] = mu / (pt.x[j] - L.xl[j]);
    if (L.hi(j)) pt.zu[j] = mu / (L.xu[j] - pt.x[j]);
  }
  return pt;
}

// Least-squares constraint multipliers for the starting point.
void initial_multipliers(const Layout& L, const Eval& ev, PrimalDualPoint& pt) {
  const int mc = L.mc();
  if (mc == 0) return;
  const int n = L.n;
  const int p = L.p;
  const int N = n + p + mc;
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(N, N);
  K.topLeftCorner(n + p, n + p).setIdentity();
  K.block(n + p, 0, mc, n) = ev.jc;
  K.block(0, n + p, n, mc) = ev.jc.transpose();
  for (int k = 0; k < p; ++k) {
    const int r = L.slack_row[static_cast<std::size_t>(k)];
    K(n + p + r, n + k) = -1.0;
    K(n + k, n + p + r) = -1.0;
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(N);
  rhs.head(n) = -(ev.grad + bound_duals_full(L, pt.zl, pt.zu));
  rhs.segment(n, p) = pt.v;
  SymmetricFactorization fac;
  if (!fac.factor(K)) return;
  const Eigen::VectorXd sol = fac.solve(rhs);
  const Vector y = sol.tail(mc);
  if (y.allFinite() && y.lpNorm<Eigen::Infinity>() <= kMaxInitialMultiplier) pt.y = y;
}

struct Direction {
  Vector dx, ds, dy, dzl, dzu, dv;
  double delta_w = 0.0;
};

// Solves the regularized primal-dual system. Returns false when the
// regularization cap is exceeded.
bool newton_direction(const Layout& L, const Eval& ev, const Matrix& hess, const PrimalDualPoint& pt,
                      double mu, double dw_start, double reg_init, Direction& d) {
  const int n = L.n;
  const int p = L.p;
  const int mc = L.mc();
  const int N = n + p + mc;

  Vector sigma_x = Vector::Zero(n);
  Vector rx = ev.grad;
  if (mc > 0) rx += ev.jc.transpose() * pt.y;
  for (int j = 0; j < n; ++j) {
    if (L.lo(j)) {
      const double gap = pt.x[j] - L.xl[j];
      sigma_x[j] += pt.zl[j] / gap;
      rx[j] -= mu / gap;
    }
    if (L.hi(j)) {
      const double gap = L.xu[j] - pt.x[j];
      sigma_x[j] += pt.zu[j] / gap;
      rx[j] += mu / gap;
    }
  }
  Vector rs(p);
  for (int k = 0; k < p; ++k) rs[k] = -pt.y[L.slack_row[static_cast<std::size_t>(k)]] - mu / pt.s[k];
  const Vector c = L.residual(ev.g, pt.s);

  Eigen::VectorXd rhs(N);
  rhs << -rx, -rs, -c;

  auto build = [&](double dw, double dc) {
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(N, N);
    K.topLeftCorner(n, n) = hess;
    for (int j = 0; j < n; ++j) K(j, j) += sigma_x[j] + dw;
    for (int k = 0; k < p; ++k) K(n + k, n + k) = pt.v[k] / pt.s[k] + dw;
    if (mc > 0) {
      K.block(n + p, 0, mc, n) = ev.jc;
      K.block(0, n + p, n, mc) = ev.jc.transpose();
    }
    for (int k = 0; k < p; ++k) {
      const int r = L.slack_row[static_cast<std::size_t>(k)];
      K(n + p + r, n + k) = -1.0;
      K(n + k, n + p + r) = -1.0;
    }
    for (int r = 0; r < mc; ++r) K(n + p + r, n + p + r) = -dc;
    return K;
  };

  SymmetricFactorization fac;
  double dw = dw_start;
  double dc = 0.0;
  Eigen::MatrixXd K;
  for (;;) {
    K = build(dw, dc);
    const bool ok = fac.factor(K);
    const Inertia& in = fac.inertia();
    if (ok && in.positive == n + p && in.negative == mc) break;
    if (!ok && in.zero > 0 && dc == 0.0 && mc > 0) {
      dc = 1e-8 * std::pow(mu, 0.25);
      continue;
    }
    dw = dw == 0.0 ? reg_init : 10.0 * dw;
    if (dw > kMaxRegularization) return false;
  }

  Eigen::VectorXd sol = fac.solve(rhs);
  const Eigen::VectorXd residual = rhs - K * sol;
  sol += fac.solve(residual);
  if (!sol.allFinite()) return false;

  d.delta_w = dw;
  d.dx = sol.head(n);
  d.ds = sol.segment(n, p);
  d.dy = sol.tail(mc);
  d.dzl = Vector::Zero(n);
  d.dzu = Vector::Zero(n);
  for (int j = 0; j < n; ++j) {
    if (L.lo(j)) {
      const double gap = pt.x[j] - L.xl[j];
      d.dzl[j] = mu / gap - pt.zl[j] - pt.zl[j] / gap * d.dx[j];
    }
    if (L.hi(j)) {
      const double gap = L.xu[j] - pt.x[j];
      d.dzu[j] = mu / gap - pt.zu[j] + pt.zu[j] / gap * d.dx[j];
    }
  }
  d.dv = Vector(p);
  for (int k = 0; k < p; ++k) d.dv[k] = mu / pt.s[k] - pt.v[k] - pt.v[k] / pt.s[k] * d.ds[k];
  return true;
}

double max_step(const Vector& value, const Vector& step, double tau) {
  double alpha = 1.0;
  for (Eigen::Index i = 0; i < value.size(); ++i) {
    if (step[i] < 0.0) alpha = std::min(alpha, -tau * value[i] / step[i]);
  }
  return alpha;
}

// Fraction-to-boundary step limits for the primal and the dual variables.
std::pair<double, double> boundary_steps(const Layout& L, const PrimalDualPoint& pt, const Direction& d, double tau) {
  double ap = max_step(pt.s, d.ds, tau);
  double ad = max_step(pt.v, d.dv, tau);
  for (int j = 0; j < L.n; ++j) {
    if (L.lo(j)) {
      if (d.dx[j] < 0.0) ap = std::min(ap, -tau * (pt.x[j] - L.xl[j]) / d.dx[j]);
      if (d.dzl[j] < 0.0) ad = std::min(ad, -tau * pt.zl[j] / d.dzl[j]);
    }
    if (L.hi(j)) {
      if (d.dx[j] > 0.0) ap = std::min(ap, tau * (L.xu[j] - pt.x[j]) / d.dx[j]);
      if (d.dzu[j] < 0.0) ad = std::min(ad, -tau * pt.zu[j] / d.dzu[j]);
    }
  }
  return {ap, ad};
}

// Barrier objective; +inf outside the interior.
double barrier_value(const Layout& L, double f, const Vector& x, const Vector& s, double mu) {
  double phi = f;
  for (int j = 0; j < L.n; ++j) {
    if (L.lo(j)) {
      const double gap = x[j] - L.xl[j];
      if (!(gap > 0.0)) return kInf;
      phi -= mu * std::log(gap);
    }
    if (L.hi(j)) {
      const double gap = L.xu[j] - x[j];
      if (!(gap > 0.0)) return kInf;
      phi -= mu * std::log(gap);
    }
  }
  for (int k = 0; k < L.p; ++k) {
    if (!(s[k] > 0.0)) return kInf;
    phi -= mu * std::log(s[k]);
  }
  return phi;
}

double barrier_slope(const Layout& L, const Eval& ev, const PrimalDualPoint& pt, const Direction& d, double mu) {
  double slope = ev.grad.dot(d.dx);
  for (int j = 0; j < L.n; ++j) {
    if (L.lo(j)) slope -= mu * d.dx[j] / (pt.x[j] - L.xl[j]);
    if (L.hi(j)) slope += mu * d.dx[j] / (L.xu[j] - pt.x[j]);
  }
  for (int k = 0; k < L.p; ++k) slope -= mu * d.ds[k] / pt.s[k];
  return slope;
}

void clamp_duals(const Layout& L, PrimalDualPoint& pt, double mu) {
  auto clamp = [mu](double z, double gap) {
    return std::clamp(z, mu / (kKappaSigma * gap), kKappaSigma * mu / gap);
  };
  for (int j = 0; j < L.n; ++j) {
    if (L.lo(j)) pt.zl[j] = clamp(pt.zl[j], pt.x[j] - L.xl[j]);
    if (L.hi(j)) pt.zu[j] = clamp(pt.zu[j], L.xu[j] - pt.x[j]);
  }
  for (int k = 0; k < L.p; ++k) pt.v[k] = clamp(pt.v[k], pt.s[k]);
}

Solution run(const NlpProblem& p, const Vector& x_start, const SolverOptions& opts) {
  opts.validate();
  if (x_start.size() != p.n()) {
    throw ShapeError(fmt::format("start point has length {}, problem has {} variables", x_start.size(), p.n()));
  }
  const Layout L(p);
  const double mu_min = opts.effective_mu_min();
  NlpWorkspace ws;
  Solution sol;
  double mu = opts.mu_init;

  auto finish = [&](SolveStatus status, std::string message, const PrimalDualPoint& pt, const Eval* ev) {
    sol.status = status;
    sol.message = std::move(message);
    sol.point = pt;
    sol.x = pt.x;
    sol.constraint_duals = L.lambda(pt.y);
    sol.lower_bound_duals = pt.zl;
    sol.upper_bound_duals = pt.zu;
    if (ev) {
      sol.objective_value = ev->f;
      sol.constraint_violation = p.max_violation(pt.x, ev->g);
      sol.kkt_error = optimality_error(L, *ev, pt, 0.0);
    } else {
      sol.objective_value = std::numeric_limits<double>::quiet_NaN();
      sol.constraint_violation = std::numeric_limits<double>::quiet_NaN();
      sol.kkt_error = std::numeric_limits<double>::quiet_NaN();
    }
    return sol;
  };

  Eval ev;
  Vector x0 = interior_x(L, x_start);
  if (!x0.allFinite() || !eval_all(p, L, x0, ev, ws)) {
    PrimalDualPoint bare;
    bare.x = x0;
    bare.y = Vector::Zero(L.mc());
    bare.zl = Vector::Zero(L.n);
    bare.zu = Vector::Zero(L.n);
    return finish(SolveStatus::Diverged, "objective or constraints are not finite at the starting point", bare, nullptr);
  }
  PrimalDualPoint pt = make_initial(L, x0, ev.g, mu);
  initial_multipliers(L, ev, pt);

  TraceEntry pending;
  pending.mu = mu;
  double nu = 0.0;
  int iter = 0;
  Matrix hess;

  for (;;) {
    if (iter > 0 && !eval_all(p, L, pt.x, ev, ws)) {
      return finish(SolveStatus::Diverged, "derivatives are not finite at an accepted iterate", pt, nullptr);
    }
    const double e0 = optimality_error(L, ev, pt, 0.0);
    const double viol = p.max_violation(pt.x, ev.g);

    TraceEntry entry = pending;
    entry.iteration = iter;
    entry.objective = ev.f;
    entry.violation = viol;
    entry.kkt_error = e0;
    if (opts.record_iterates) entry.x = pt.x;
    sol.trace.push_back(entry);
    if (opts.log) {
      opts.log(fmt::format("iter {:4d} | {:.3e} | {: .10e} | {:.3e} | {:.3e} | {:.3e}", iter, entry.mu, ev.f, viol,
                           e0, entry.alpha_primal));
    }

    sol.iterations = iter;
    if (e0 <= opts.tol && viol <= opts.tol) return finish(SolveStatus::Converged, "", pt, &ev);
    if (pt.x.lpNorm<Eigen::Infinity>() > kDivergenceNorm) {
      return finish(SolveStatus::Diverged, "iterates diverged", pt, &ev);
    }
    if (iter >= opts.max_iter) {
      return finish(SolveStatus::MaxIterations, fmt::format("no convergence after {} iterations", iter), pt, &ev);
    }

    double e_mu = optimality_error(L, ev, pt, mu);
    while (mu > mu_min && e_mu <= kBarrierTolFactor * mu) {
      mu = std::max(mu_min, std::min(opts.kappa_mu * mu, std::pow(mu, opts.theta_mu)));
      e_mu = optimality_error(L, ev, pt, mu);
    }

    try {
      p.eval_hessian(pt.x, L.lambda(pt.y), hess, ws);
    } catch (const DomainError& e) {
      return finish(SolveStatus::Diverged, fmt::format("Hessian evaluation failed: {}", e.what()), pt, &ev);
    }
    if (!hess.allFinite()) return finish(SolveStatus::Diverged, "Hessian is not finite", pt, &ev);

    const double tau = std::max(opts.tau_min, 1.0 - mu);
    const Vector c0 = L.residual(ev.g, pt.s);
    const double c0_norm = c0.lpNorm<1>();
    const double phi0 = barrier_value(L, ev.f, pt.x, pt.s, mu);

    double dw_start = 0.0;
    bool accepted = false;
    while (!accepted) {
      Direction d;
      if (!newton_direction(L, ev, hess, pt, mu, dw_start, opts.reg_init, d)) {
        return finish(SolveStatus::RestorationFailed, "regularization limit reached without an acceptable step", pt,
                      &ev);
      }
      const auto [alpha_max, alpha_z] = boundary_steps(L, pt, d, tau);

      if (L.mc() > 0) nu = std::max(nu, 1.1 * (pt.y + d.dy).lpNorm<Eigen::Infinity>());
      const double slope = barrier_slope(L, ev, pt, d, mu);
      double D = slope - nu * c0_norm;
      if (D >= 0.0 && c0_norm > 0.0) {
        nu = std::max(nu, slope / (0.9 * c0_norm));
        D = slope - nu * c0_norm;
      }
      const double merit0 = phi0 + nu * c0_norm;

      double step_size = 0.0;
      for (int j = 0; j < L.n; ++j) step_size = std::max(step_size, std::abs(d.dx[j]) / (1.0 + std::abs(pt.x[j])));
      for (int k = 0; k < L.p; ++k) step_size = std::max(step_size, std::abs(d.ds[k]) / (1.0 + std::abs(pt.s[k])));
      const bool tiny = step_size < 10.0 * kEps;

      double alpha = alpha_max;
      int backtracks = 0;
      double merit_t = merit0;
      Vector xt;
      Vector st;
      if (tiny) {
        xt = pt.x + alpha * d.dx;
        st = pt.s + alpha * d.ds;
        accepted = true;
      } else if (D < 0.0) {
        double ft = 0.0;
        Vector gt;
        for (; backtracks <= kMaxBacktracks; ++backtracks, alpha *= kBacktrack) {
          xt = pt.x + alpha * d.dx;
          st = pt.s + alpha * d.ds;
          if (!eval_values(p, xt, ft, gt, ws)) continue;
          const double phit = barrier_value(L, ft, xt, st, mu);
          if (!std::isfinite(phit)) continue;
          merit_t = phit + nu * L.residual(gt, st).lpNorm<1>();
          if (merit_t <= merit0 + kArmijo * alpha * D + 10.0 * kEps * std::abs(merit0)) {
            accepted = true;
            break;
          }
        }
      }
      if (!accepted) {
        dw_start = std::max(opts.reg_init, 10.0 * d.delta_w);
        if (dw_start > kMaxRegularization) {
          return finish(SolveStatus::RestorationFailed, "line search failed at the regularization limit", pt, &ev);
        }
        continue;
      }

      pt.x = xt;
      pt.s = st;
      pt.y += alpha * d.dy;
      pt.zl += alpha_z * d.dzl;
      pt.zu += alpha_z * d.dzu;
      pt.v += alpha_z * d.dv;
      clamp_duals(L, pt, mu);

      pending = TraceEntry{};
      pending.mu = mu;
      pending.alpha_primal = alpha;
      pending.alpha_dual = alpha_z;
      pending.merit_before = merit0;
      pending.merit_after = tiny ? merit0 : merit_t;
      pending.penalty = nu;
      pending.delta_w = d.delta_w;
      pending.backtracks = backtracks;
    }
    ++iter;
  }
}

}  // namespace

void SolverOptions::validate() const {
  if (!(tol > 0.0)) throw ValidationError("tol must be positive");
  if (max_iter < 0) throw ValidationError("max_iter must be nonnegative");
  if (!(mu_init > 0.0)) throw ValidationError("mu_init must be positive");
  if (mu_min && !(*mu_min > 0.0)) throw ValidationError("mu_min must be positive");
  if (!(kappa_mu > 0.0 && kappa_mu < 1.0)) throw ValidationError("kappa_mu must lie in (0,1)");
  if (!(theta_mu > 1.0 && theta_mu < 2.0)) throw ValidationError("theta_mu must lie in (1,2)");
  if (!(tau_min > 0.0 && tau_min < 1.0)) throw ValidationError("tau_min must lie in (0,1)");
  if (!(reg_init > 0.0)) throw ValidationError("reg_init must be positive");
}

std::string_view status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIterations: return "max_iterations";
    case SolveStatus::Diverged: return "diverged";
    case SolveStatus::RestorationFailed: return "restoration_failed";
  }
  return "?";
}

PrimalDualPoint initial_point(const NlpProblem& p, const Vector& x, double mu) {
  const Layout L(p);
  const Vector xi = interior_x(L, x);
  NlpWorkspace ws;
  double f = 0.0;
  Vector g;
  p.eval_values(xi, f, g, ws);
  return make_initial(L, xi, g, mu);
}

double kkt_error(const NlpProblem& p, const PrimalDualPoint& point, double mu) {
  const Layout L(p);
  auto check = [](const Vector& v, Eigen::Index n, std::string_view what) {
    if (v.size() != n) throw ShapeError(fmt::format("kkt_error: {} has length {}, expected {}", what, v.size(), n));
  };
  check(point.x, L.n, "x");
  check(point.s, L.p, "s");
  check(point.y, L.mc(), "y");
  check(point.zl, L.n, "zl");
  check(point.zu, L.n, "zu");
  check(point.v, L.p, "v");
  NlpWorkspace ws;
  Eval ev;
  p.eval_values(point.x, ev.f, ev.g, ws);
  p.eval_derivatives(point.x, ev.grad, ev.jac, ws);
  ev.jc = L.residual_jacobian(ev.jac);
  return optimality_error(L, ev, point, mu);
}

Solution solve(const NlpProblem& p, const SolverOptions& opts) { return run(p, p.x_init(), opts); }

Solution solve_warm(const NlpProblem& p, const Vector& x_start, double mu_init, const SolverOptions& opts) {
  SolverOptions o = opts;
  o.mu_init = mu_init;
  return run(p, x_start, o);
}

}  // namespace neuropt
