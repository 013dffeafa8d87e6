#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>

namespace ksum::qp {

/// Optional per-variable box constraints; +/-infinity entries mean
/// unbounded. The solver materializes finite bounds as extra inequality
/// rows appended after a_in (lower then upper, variable-major), and the
/// reported dual_in covers those appended rows too.
struct Bounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

/// Convex quadratic program
///
///   minimize    0.5 * y' P y + q' y
///   subject to  a_eq y  = b_eq
///               a_in y <= b_in
///               lower <= y <= upper   (optional)
///
/// P must be symmetric (within 1e-12) and positive semidefinite
/// (smallest eigenvalue >= -1e-10).
struct Problem {
  Eigen::MatrixXd P;
  Eigen::VectorXd q;
  Eigen::MatrixXd a_eq;   // e x d (may have 0 rows)
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd a_in;   // g x d (may have 0 rows)
  Eigen::VectorXd b_in;
  std::optional<Bounds> bounds;

  int dim() const { return static_cast<int>(q.size()); }
  void validate() const;
};

enum class Status { optimal, infeasible, max_iterations };

const char* to_string(Status s);

struct KktResiduals {
  double stationarity = 0.0;     // inf-norm of P y + q + a_eq' l + a_in' m
  double primal_eq = 0.0;        // inf-norm of a_eq y - b_eq
  double primal_in = 0.0;        // max positive violation of a_in y <= b_in
  double dual_feas = 0.0;        // max(0, -min(dual_in))
  double complementarity = 0.0;  // max |dual_in_i * (a_in y - b_in)_i|

  double worst() const;
};

struct Solution {
  Eigen::VectorXd y;
  double objective = 0.0;
  Eigen::VectorXd dual_eq;
  Eigen::VectorXd dual_in;  // explicit rows first, then materialized bound rows
  Status status = Status::max_iterations;
  KktResiduals kkt;
  int iterations = 0;
};

struct Settings {
  double tol_feas = 1e-8;
  double tol_opt = 1e-8;
  int max_iterations = 50000;
  bool polish = true;
};

/// Solve the QP. Deterministic for fixed inputs and settings. Infeasible
/// problems are detected by a phase-1 pass and reported via status;
/// status == optimal guarantees all KKT residuals are within tolerance.
Solution solve(const Problem& problem, const Settings& settings = {});

/// Recompute KKT residuals of (problem, solution) from scratch.
KktResiduals check_kkt(const Problem& problem, const Solution& solution);

/// Plain-text dump of (P, q, A, b) blocks for cross-checking against
/// external solvers.
void dump_problem(const Problem& problem, std::ostream& out);

/// Symmetrize and, when the smallest eigenvalue sits in (-1e-10, 0),
/// shift the diagonal by 1e-10. Larger negativity throws.
Eigen::MatrixXd ensure_psd(const Eigen::MatrixXd& sigma);

}  // namespace ksum::qp
