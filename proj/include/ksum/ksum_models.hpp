#pragma once

#include <Eigen/Dense>
#include <optional>

#include "ksum/qp.hpp"

namespace ksum {

/// Inputs shared by every portfolio model: return moments, the m x n
/// matrix of per-agency Non-ESG scores (rows s^i, entries in [0, 1]) and
/// the tail size k of the k-worst operator, 1 <= k <= m.
struct KsumInstance {
  Eigen::MatrixXd sigma;  // n x n covariance
  Eigen::VectorXd mu;     // n expected returns
  Eigen::MatrixXd S;      // m x n Non-ESG scores
  int k = 1;

  int n_assets() const { return static_cast<int>(mu.size()); }
  int n_agencies() const { return static_cast<int>(S.rows()); }
  void validate() const;
};

/// Index layout of the lifted decision vector y = (x, v, u) used by the
/// dualized models: portfolio weights x in R^n, agency excesses v in R^m,
/// threshold u in R.
struct VariableLayout {
  int n = 0;
  int m = 0;

  int x_begin() const { return 0; }
  int v_begin() const { return n; }
  int u_index() const { return n + m; }
  int dim() const { return n + m + 1; }

  Eigen::VectorXd weights_of(const Eigen::VectorXd& y) const { return y.head(n); }
};

/// Sum of the k largest per-agency portfolio scores s^i . x, computed by
/// direct sorting. Ground truth for the dualized formulations.
double kworst_score(const KsumInstance& instance, const Eigen::VectorXd& weights);

/// Same operator on an already-evaluated score vector.
double kworst_from_scores(const Eigen::VectorXd& agency_scores, int k);

/// Value of the k-worst operator through its LP dual: u* is the k-th
/// largest score, v_i* = max(0, s^i(x) - u*), value k u* + sum v_i*.
/// Equals kworst_score for every x; the equality certifies the
/// relaxation-duality chain behind the QP models.
double kworst_score_dual(const KsumInstance& instance, const Eigen::VectorXd& weights);

/// min x'Sx - mu'x + [k u + sum_i v_i] over the simplex with the dual
/// block v_i + u >= s^i . x, v >= 0, u >= 0.
qp::Problem single_objective_problem(const KsumInstance& instance);

/// Weighted-sum version: min l1 x'Sx - l2 mu'x + l3 [k u + sum v_i].
/// lambda = (1,1,1) reproduces single_objective_problem exactly.
qp::Problem scalarized_problem(const KsumInstance& instance, const Eigen::Vector3d& lambda);

/// min x'Sx subject to mu'x >= mu_bar and k u + sum v_i <= gamma_bar,
/// plus the dual block. The workhorse of the efficient-surface sweep.
qp::Problem epsilon_constraint_problem(const KsumInstance& instance, double mu_bar,
                                       double gamma_bar);

/// min k u + sum v_i (the portfolio k-worst score), optionally with a
/// return floor mu'x >= mu_bar.
qp::Problem min_score_problem(const KsumInstance& instance,
                              std::optional<double> mu_bar = std::nullopt);

/// Plain minimum-variance on the simplex, optional return floor. The
/// decision vector is x alone.
qp::Problem min_variance_problem(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& mu,
                                 std::optional<double> mu_bar = std::nullopt);

}  // namespace ksum
