#pragma once

// Independent reference implementations used to cross-check the library.
// Deliberately brute force; none of this shares code with src/.

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace oracle {

struct QpCandidate {
  Eigen::VectorXd y;
  double objective = std::numeric_limits<double>::infinity();
};

// Global minimum of 0.5 y'Py + q'y s.t. Aeq y = beq, Ain y <= bin, found
// by enumerating every subset of inequality rows as the active set and
// solving the corresponding equality KKT system. Exact for strictly
// convex P (the restricted minimizer is then unique). Exponential in the
// number of inequality rows; keep them below ~16.
inline std::optional<QpCandidate> enumerate_qp(const Eigen::MatrixXd& P,
                                               const Eigen::VectorXd& q,
                                               const Eigen::MatrixXd& a_eq,
                                               const Eigen::VectorXd& b_eq,
                                               const Eigen::MatrixXd& a_in,
                                               const Eigen::VectorXd& b_in,
                                               double feas_tol = 1e-9) {
  const int d = static_cast<int>(q.size());
  const int e = static_cast<int>(b_eq.size());
  const int g = static_cast<int>(b_in.size());

  QpCandidate best;
  bool found = false;
  for (unsigned mask = 0; mask < (1u << g); ++mask) {
    std::vector<int> active;
    for (int i = 0; i < g; ++i)
      if (mask & (1u << i)) active.push_back(i);
    const int a = static_cast<int>(active.size());

    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(d + e + a, d + e + a);
    Eigen::VectorXd rhs(d + e + a);
    M.topLeftCorner(d, d) = P;
    rhs.head(d) = -q;
    if (e > 0) {
      M.block(0, d, d, e) = a_eq.transpose();
      M.block(d, 0, e, d) = a_eq;
      rhs.segment(d, e) = b_eq;
    }
    for (int i = 0; i < a; ++i) {
      M.block(0, d + e + i, d, 1) = a_in.row(active[i]).transpose();
      M.block(d + e + i, 0, 1, d) = a_in.row(active[i]);
      rhs(d + e + i) = b_in(active[i]);
    }

    const Eigen::VectorXd sol = M.completeOrthogonalDecomposition().solve(rhs);
    if ((M * sol - rhs).cwiseAbs().maxCoeff() > 1e-8) continue;  // inconsistent subset

    const Eigen::VectorXd y = sol.head(d);
    if (e > 0 && (a_eq * y - b_eq).cwiseAbs().maxCoeff() > feas_tol) continue;
    if (g > 0 && (a_in * y - b_in).maxCoeff() > feas_tol) continue;

    const double value = 0.5 * y.dot(P * y) + q.dot(y);
    if (!found || value < best.objective) {
      best.y = y;
      best.objective = value;
      found = true;
    }
  }
  if (!found) return std::nullopt;
  return best;
}

// Minimum of fn over the probability simplex sampled with the given step.
inline QpCandidate simplex_grid_min(int n, double step,
                                    const std::function<double(const Eigen::VectorXd&)>& fn) {
  const int K = static_cast<int>(std::lround(1.0 / step));
  QpCandidate best;

  Eigen::VectorXd x(n);
  std::function<void(int, int)> recurse = [&](int coord, int remaining) {
    if (coord == n - 1) {
      x(coord) = static_cast<double>(remaining) / K;
      const double value = fn(x);
      if (value < best.objective) {
        best.objective = value;
        best.y = x;
      }
      return;
    }
    for (int i = 0; i <= remaining; ++i) {
      x(coord) = static_cast<double>(i) / K;
      recurse(coord + 1, remaining - i);
    }
  };
  recurse(0, K);
  return best;
}

// Drawdown minimum by recomputing the running peak from scratch at every t.
inline double max_drawdown_quadratic(const Eigen::VectorXd& wealth) {
  double worst = 0.0;
  for (int t = 1; t < wealth.size(); ++t) {
    double peak = 0.0;
    for (int tau = 0; tau <= t; ++tau) peak = std::max(peak, wealth(tau));
    worst = std::min(worst, (wealth(t) - peak) / peak);
  }
  return worst;
}

}  // namespace oracle
