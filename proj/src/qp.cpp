#include "ksum/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "ksum/detail/text.hpp"
#include "ksum/errors.hpp"

namespace ksum::qp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kStaticReg = 1e-10;      // Newton system regularization
constexpr double kScalingCap = 1e16;      // cap on z_i / s_i
constexpr int kIpmIterCap = 500;

struct Normalized {
  // min 0.5 y'Py + q'y  s.t.  A y = b,  G y <= h
  Eigen::MatrixXd P;
  Eigen::VectorXd q;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::MatrixXd G;
  Eigen::VectorXd h;

  int d() const { return static_cast<int>(q.size()); }
  int e() const { return static_cast<int>(b.size()); }
  int g() const { return static_cast<int>(h.size()); }
};

// Bound rows are appended to a_in: for each variable, finite lower bound
// first (-y_j <= -lo_j), then finite upper bound (y_j <= up_j).
Normalized normalize(const Problem& p) {
  Normalized n;
  const int d = p.dim();
  n.P = 0.5 * (p.P + p.P.transpose());
  n.q = p.q;
  n.A = p.a_eq;
  n.b = p.b_eq;

  int extra = 0;
  if (p.bounds) {
    for (int j = 0; j < d; ++j) {
      if (p.bounds->lower(j) > -kInf) ++extra;
      if (p.bounds->upper(j) < kInf) ++extra;
    }
  }
  const int g0 = static_cast<int>(p.b_in.size());
  n.G.resize(g0 + extra, d);
  n.h.resize(g0 + extra);
  if (g0 > 0) {
    n.G.topRows(g0) = p.a_in;
    n.h.head(g0) = p.b_in;
  }
  int r = g0;
  if (p.bounds) {
    for (int j = 0; j < d; ++j) {
      if (p.bounds->lower(j) > -kInf) {
        n.G.row(r).setZero();
        n.G(r, j) = -1.0;
        n.h(r) = -p.bounds->lower(j);
        ++r;
      }
      if (p.bounds->upper(j) < kInf) {
        n.G.row(r).setZero();
        n.G(r, j) = 1.0;
        n.h(r) = p.bounds->upper(j);
        ++r;
      }
    }
  }
  return n;
}

struct Iterate {
  Eigen::VectorXd y, lam, z, s;
};

KktResiduals residuals_of(const Normalized& n, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& lam, const Eigen::VectorXd& z) {
  KktResiduals r;
  Eigen::VectorXd stat = n.P * y + n.q;
  if (n.e() > 0) stat += n.A.transpose() * lam;
  if (n.g() > 0) stat += n.G.transpose() * z;
  r.stationarity = stat.size() > 0 ? stat.cwiseAbs().maxCoeff() : 0.0;
  r.primal_eq = n.e() > 0 ? (n.A * y - n.b).cwiseAbs().maxCoeff() : 0.0;
  if (n.g() > 0) {
    const Eigen::VectorXd viol = n.G * y - n.h;
    r.primal_in = std::max(0.0, viol.maxCoeff());
    r.dual_feas = std::max(0.0, -z.minCoeff());
    r.complementarity = (z.array() * viol.array()).abs().maxCoeff();
  }
  return r;
}

// Mehrotra predictor-corrector with infeasible start. Returns the best
// iterate seen (by worst KKT residual).
Iterate run_ipm(const Normalized& n, const Eigen::VectorXd& y_start, int max_iter,
                double target, int& iters_out) {
  const int d = n.d(), e = n.e(), g = n.g();

  Iterate it;
  it.y = y_start;
  it.lam = Eigen::VectorXd::Zero(e);
  if (g > 0) {
    Eigen::VectorXd slack = n.h - n.G * it.y;
    const double shift = std::max(0.0, 0.1 - slack.minCoeff());
    it.s = slack.array() + shift + 0.1;
    it.z = Eigen::VectorXd::Ones(g);
  }

  if (g == 0) {
    // pure equality QP: one KKT solve
    Eigen::MatrixXd K(d + e, d + e);
    K.setZero();
    K.topLeftCorner(d, d) = n.P + kStaticReg * Eigen::MatrixXd::Identity(d, d);
    if (e > 0) {
      K.topRightCorner(d, e) = n.A.transpose();
      K.bottomLeftCorner(e, d) = n.A;
      K.bottomRightCorner(e, e) = -kStaticReg * Eigen::MatrixXd::Identity(e, e);
    }
    Eigen::VectorXd rhs(d + e);
    rhs.head(d) = -n.q;
    if (e > 0) rhs.tail(e) = n.b;
    const Eigen::VectorXd sol = K.partialPivLu().solve(rhs);
    it.y = sol.head(d);
    it.lam = sol.tail(e);
    iters_out = 1;
    return it;
  }

  Iterate best = it;
  double best_worst = kInf;
  int stall = 0;

  Eigen::MatrixXd K(d + e, d + e);
  Eigen::VectorXd rhs(d + e);

  int iter = 0;
  for (; iter < max_iter; ++iter) {
    const Eigen::VectorXd r_d = n.P * it.y + n.q +
                                (e > 0 ? (n.A.transpose() * it.lam).eval()
                                       : Eigen::VectorXd::Zero(d)) +
                                n.G.transpose() * it.z;
    const Eigen::VectorXd r_p1 = e > 0 ? (n.A * it.y - n.b).eval() : Eigen::VectorXd();
    const Eigen::VectorXd r_p2 = n.G * it.y + it.s - n.h;
    const double mu = it.s.dot(it.z) / g;
    const double comp_max = (it.s.array() * it.z.array()).maxCoeff();

    double worst = std::max({r_d.cwiseAbs().maxCoeff(),
                             e > 0 ? r_p1.cwiseAbs().maxCoeff() : 0.0,
                             r_p2.cwiseAbs().maxCoeff(), comp_max});
    if (worst < best_worst) {
      if (worst < 0.9 * best_worst) stall = 0;
      best_worst = worst;
      best = it;
    } else if (++stall > 30) {
      break;
    }
    if (worst <= target) break;

    const Eigen::ArrayXd w = (it.z.array() / it.s.array()).min(kScalingCap);
    K.setZero();
    K.topLeftCorner(d, d) = n.P + n.G.transpose() * w.matrix().asDiagonal() * n.G +
                            kStaticReg * Eigen::MatrixXd::Identity(d, d);
    if (e > 0) {
      K.topRightCorner(d, e) = n.A.transpose();
      K.bottomLeftCorner(e, d) = n.A;
      K.bottomRightCorner(e, e) = -kStaticReg * Eigen::MatrixXd::Identity(e, e);
    }
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(K);

    auto newton = [&](const Eigen::VectorXd& r_c, Eigen::VectorXd& dy,
                      Eigen::VectorXd& dlam, Eigen::VectorXd& ds, Eigen::VectorXd& dz) {
      rhs.head(d) = -r_d + n.G.transpose() *
                               ((r_c.array() - it.z.array() * r_p2.array()) / it.s.array())
                                   .matrix();
      if (e > 0) rhs.tail(e) = -r_p1;
      Eigen::VectorXd sol = lu.solve(rhs);
      sol += lu.solve(rhs - K * sol);  // one refinement step
      dy = sol.head(d);
      dlam = sol.tail(e);
      ds = -r_p2 - n.G * dy;
      dz = ((-r_c.array() - it.z.array() * ds.array()) / it.s.array()).matrix();
    };

    auto max_step = [](const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
      double a = 1.0;
      for (int i = 0; i < v.size(); ++i)
        if (dv(i) < 0.0) a = std::min(a, -v(i) / dv(i));
      return a;
    };

    // predictor
    Eigen::VectorXd dy, dlam, ds, dz;
    newton((it.s.array() * it.z.array()).matrix(), dy, dlam, ds, dz);
    const double ap_aff = max_step(it.s, ds);
    const double ad_aff = max_step(it.z, dz);
    const double mu_aff =
        (it.s + ap_aff * ds).dot(it.z + ad_aff * dz) / g;
    double sigma = std::pow(mu_aff / mu, 3);
    sigma = std::clamp(sigma, 0.0, 1.0);

    // corrector
    Eigen::VectorXd r_c =
        (it.s.array() * it.z.array() + ds.array() * dz.array() - sigma * mu).matrix();
    newton(r_c, dy, dlam, ds, dz);

    // step closer to the boundary once the complementarity gap is small
    const double tau = comp_max > 1e-6 ? 0.995 : 0.99995;
    const double ap = std::min(1.0, tau * max_step(it.s, ds));
    const double ad = std::min(1.0, tau * max_step(it.z, dz));
    it.y += ap * dy;
    it.s += ap * ds;
    it.lam += ad * dlam;
    it.z += ad * dz;
  }
  iters_out = iter;

  // keep whichever iterate scored best
  const double final_worst =
      std::max({(n.P * it.y + n.q +
                 (e > 0 ? (n.A.transpose() * it.lam).eval() : Eigen::VectorXd::Zero(d)) +
                 n.G.transpose() * it.z)
                    .cwiseAbs()
                    .maxCoeff(),
                e > 0 ? (n.A * it.y - n.b).cwiseAbs().maxCoeff() : 0.0,
                (n.G * it.y + it.s - n.h).cwiseAbs().maxCoeff(),
                (it.s.array() * it.z.array()).maxCoeff()});
  return final_worst <= best_worst ? it : best;
}

// Active-set refinement: solve the equality KKT system restricted to the
// constraints the IPM identifies as active, minimum-norm. Rows with
// clearly negative multipliers are dropped and violated rows are added,
// a few steps of a plain active-set iteration.
bool polish_with(const Normalized& n, Iterate& it, std::vector<int> active) {
  const int d = n.d(), e = n.e(), g = n.g();

  for (int attempt = 0; attempt < 30; ++attempt) {
    const int a = static_cast<int>(active.size());
    Eigen::MatrixXd M(d + e + a, d + e + a);
    M.setZero();
    M.topLeftCorner(d, d) = n.P;
    if (e > 0) {
      M.block(0, d, d, e) = n.A.transpose();
      M.block(d, 0, e, d) = n.A;
    }
    for (int i = 0; i < a; ++i) {
      M.block(0, d + e + i, d, 1) = n.G.row(active[i]).transpose();
      M.block(d + e + i, 0, 1, d) = n.G.row(active[i]);
    }
    Eigen::VectorXd rhs(d + e + a);
    rhs.head(d) = -n.q;
    if (e > 0) rhs.segment(d, e) = n.b;
    for (int i = 0; i < a; ++i) rhs(d + e + i) = n.h(active[i]);

    // Truncate near-dependent directions: redundant active rows (a cap
    // implied by other active constraints) otherwise leak their rounding
    // error into the multipliers and drag y off the optimal face.
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(M.rows(), M.cols());
    cod.setThreshold(1e-9);
    cod.compute(M);
    const Eigen::VectorXd sol = cod.solve(rhs);

    Eigen::VectorXd y = sol.head(d);
    Eigen::VectorXd lam = sol.segment(d, e);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(g);
    // single-row moves; group changes oscillate on degenerate faces.
    // Weakly-active rows (multiplier noise around zero) stay pinned with
    // a clamped multiplier.
    int drop = -1;
    double most_negative = -1e-7;
    for (int i = 0; i < a; ++i) {
      const double zi = sol(d + e + i);
      if (zi < most_negative) {
        most_negative = zi;
        drop = i;
      }
      z(active[i]) = std::max(zi, 0.0);
    }
    if (drop >= 0) {
      active.erase(active.begin() + drop);
      continue;
    }

    // an unbounded active face can park the minimum-norm point outside an
    // inactive constraint; pin the most violated row and re-solve
    if (g > 0) {
      const Eigen::VectorXd violation = n.G * y - n.h;
      int add = -1;
      double worst_violation = 1e-9;
      for (int i = 0; i < g; ++i)
        if (violation(i) > worst_violation &&
            std::find(active.begin(), active.end(), i) == active.end()) {
          worst_violation = violation(i);
          add = i;
        }
      if (add >= 0) {
        active.push_back(add);
        continue;
      }
    }

    // An active-set solve within tolerance is the exact solution of the
    // identified face up to roundoff; prefer it even when the
    // interior-point iterate shows smaller raw residuals, because
    // weakly-active rows can carry small spurious multipliers that drag
    // the iterate off the optimal face without inflating any residual.
    const KktResiduals before = residuals_of(n, it.y, it.lam, it.z);
    const KktResiduals after = residuals_of(n, y, lam, z);
    if (after.worst() <= std::max(before.worst(), 1e-8)) {
      it.y = y;
      it.lam = lam;
      it.z = z;
      it.s = (n.h - n.G * y).cwiseMax(0.0);
      return true;
    }
    return false;
  }
  return false;
}

// Weakly-active constraints blur the dual-vs-slack classification, so try
// a slack-threshold set when the first guess does not refine.
bool polish(const Normalized& n, Iterate& it) {
  const int g = n.g();
  if (g == 0) return false;

  std::vector<int> by_dual;
  for (int i = 0; i < g; ++i)
    if (it.z(i) > it.s(i)) by_dual.push_back(i);
  if (polish_with(n, it, by_dual)) return true;

  const double comp = (it.s.array() * it.z.array()).maxCoeff();
  const double cutoff = std::max(1e-7, std::sqrt(std::max(comp, 0.0)));
  std::vector<int> by_slack;
  for (int i = 0; i < g; ++i)
    if (it.s(i) <= cutoff) by_slack.push_back(i);
  if (by_slack != by_dual && polish_with(n, it, by_slack)) return true;
  return false;
}

// Feasibility pass: minimize the worst constraint violation t. The tiny
// quadratic term keeps the problem strictly convex.
double phase1(const Normalized& n, Eigen::VectorXd& y_feasible) {
  const int d = n.d(), e = n.e(), g = n.g();
  Normalized p1;
  p1.P = 1e-8 * Eigen::MatrixXd::Identity(d + 1, d + 1);
  p1.q = Eigen::VectorXd::Zero(d + 1);
  p1.q(d) = 1.0;
  p1.A.resize(0, d + 1);
  p1.b.resize(0);
  p1.G.resize(2 * e + g + 1, d + 1);
  p1.h.resize(2 * e + g + 1);
  p1.G.setZero();
  if (e > 0) {
    p1.G.topLeftCorner(e, d) = n.A;
    p1.G.block(e, 0, e, d) = -n.A;
    p1.h.head(e) = n.b;
    p1.h.segment(e, e) = -n.b;
  }
  if (g > 0) {
    p1.G.block(2 * e, 0, g, d) = n.G;
    p1.h.segment(2 * e, g) = n.h;
  }
  p1.G.col(d).head(2 * e + g).setConstant(-1.0);
  p1.G(2 * e + g, d) = -1.0;
  p1.h(2 * e + g) = 0.0;

  int iters = 0;
  Iterate it = run_ipm(p1, Eigen::VectorXd::Zero(d + 1), 200, 1e-10, iters);
  y_feasible = it.y.head(d);
  return it.y(d);
}

}  // namespace

double KktResiduals::worst() const {
  return std::max({stationarity, primal_eq, primal_in, dual_feas, complementarity});
}

const char* to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::max_iterations: return "max-iterations";
  }
  return "unknown";
}

void Problem::validate() const {
  const int d = dim();
  if (P.rows() != d || P.cols() != d) throw ShapeError("P must be d x d");
  if ((P - P.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, P.cwiseAbs().maxCoeff()))
    throw ShapeError("P is not symmetric");
  if (a_eq.rows() != b_eq.size() || (a_eq.rows() > 0 && a_eq.cols() != d))
    throw ShapeError("equality block shape mismatch");
  if (a_in.rows() != b_in.size() || (a_in.rows() > 0 && a_in.cols() != d))
    throw ShapeError("inequality block shape mismatch");
  if (bounds && (bounds->lower.size() != d || bounds->upper.size() != d))
    throw ShapeError("bounds shape mismatch");
  if (d > 0) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (P + P.transpose()),
                                                             Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, P.cwiseAbs().maxCoeff()))
      throw ShapeError("P is not positive semidefinite");
  }
}

Eigen::MatrixXd ensure_psd(const Eigen::MatrixXd& sigma) {
  Eigen::MatrixXd s = 0.5 * (sigma + sigma.transpose());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  if (lo < -1e-10)
    throw ShapeError("covariance has eigenvalue " + detail::format_double(lo) +
                     "; not a PSD-within-tolerance matrix");
  if (lo < 0.0) s.diagonal().array() += 1e-10;
  return s;
}

Solution solve(const Problem& problem, const Settings& settings) {
  problem.validate();
  const Normalized n = normalize(problem);
  const int d = n.d(), e = n.e(), g = n.g();

  Solution sol;
  sol.dual_eq = Eigen::VectorXd::Zero(e);
  sol.dual_in = Eigen::VectorXd::Zero(g);

  Eigen::VectorXd y0 = Eigen::VectorXd::Zero(d);
  if (e > 0 || g > 0) {
    const double t_star = phase1(n, y0);
    if (t_star > std::max(1e-7, 10.0 * settings.tol_feas)) {
      sol.status = Status::infeasible;
      sol.y = y0;
      sol.objective = 0.5 * y0.dot(n.P * y0) + n.q.dot(y0);
      sol.kkt = residuals_of(n, y0, sol.dual_eq, sol.dual_in);
      return sol;
    }
  }

  const double target = std::min({1e-11, settings.tol_feas, settings.tol_opt});
  int iters = 0;
  Iterate it = run_ipm(n, y0, std::min(settings.max_iterations, kIpmIterCap), target, iters);
  if (settings.polish) polish(n, it);

  sol.y = it.y;
  sol.dual_eq = it.lam;
  sol.dual_in = it.z;
  sol.objective = 0.5 * it.y.dot(n.P * it.y) + n.q.dot(it.y);
  sol.iterations = iters;
  sol.kkt = residuals_of(n, it.y, it.lam, it.z);

  const bool feas_ok = sol.kkt.primal_eq <= settings.tol_feas &&
                       sol.kkt.primal_in <= settings.tol_feas;
  const bool opt_ok = sol.kkt.stationarity <= settings.tol_opt &&
                      sol.kkt.dual_feas <= settings.tol_opt &&
                      sol.kkt.complementarity <= settings.tol_opt;
  sol.status = (feas_ok && opt_ok) ? Status::optimal : Status::max_iterations;
  return sol;
}

KktResiduals check_kkt(const Problem& problem, const Solution& solution) {
  const Normalized n = normalize(problem);
  return residuals_of(n, solution.y, solution.dual_eq, solution.dual_in);
}

void dump_problem(const Problem& problem, std::ostream& out) {
  const auto write_matrix = [&out](const char* name, const Eigen::MatrixXd& m) {
    out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        out << (c ? " " : "") << detail::format_double(m(r, c));
      out << '\n';
    }
  };
  write_matrix("P", problem.P);
  write_matrix("q", problem.q);
  write_matrix("A_eq", problem.a_eq);
  write_matrix("b_eq", problem.b_eq);
  write_matrix("A_in", problem.a_in);
  write_matrix("b_in", problem.b_in);
}

}  // namespace ksum::qp
