#include "ksum/ksum_models.hpp"

#include <algorithm>
#include <vector>

#include "ksum/errors.hpp"

namespace ksum {

void KsumInstance::validate() const {
  const int n = n_assets();
  const int m = n_agencies();
  if (n < 1) throw ShapeError("instance needs at least one asset");
  if (m < 1) throw ShapeError("instance needs at least one agency");
  if (sigma.rows() != n || sigma.cols() != n) throw ShapeError("sigma must be n x n");
  if (S.cols() != n) throw ShapeError("score matrix must be m x n");
  if (k < 1 || k > m)
    throw ShapeError("k must lie in [1, m]; got k=" + std::to_string(k) +
                     ", m=" + std::to_string(m));
  if (S.minCoeff() < -1e-12 || S.maxCoeff() > 1.0 + 1e-12)
    throw ShapeError("Non-ESG scores must lie in [0, 1]");
}

double kworst_from_scores(const Eigen::VectorXd& agency_scores, int k) {
  const int m = static_cast<int>(agency_scores.size());
  if (k < 1 || k > m) throw ShapeError("k out of range for score vector");
  std::vector<double> sorted(agency_scores.data(), agency_scores.data() + m);
  std::stable_sort(sorted.begin(), sorted.end(), std::greater<>());
  double total = 0.0;
  for (int i = 0; i < k; ++i) total += sorted[i];
  return total;
}

double kworst_score(const KsumInstance& instance, const Eigen::VectorXd& weights) {
  if (weights.size() != instance.n_assets()) throw ShapeError("weight vector length mismatch");
  return kworst_from_scores(instance.S * weights, instance.k);
}

double kworst_score_dual(const KsumInstance& instance, const Eigen::VectorXd& weights) {
  if (weights.size() != instance.n_assets()) throw ShapeError("weight vector length mismatch");
  const Eigen::VectorXd scores = instance.S * weights;
  const int m = static_cast<int>(scores.size());
  std::vector<double> sorted(scores.data(), scores.data() + m);
  std::stable_sort(sorted.begin(), sorted.end(), std::greater<>());
  const double u = sorted[instance.k - 1];  // k-th largest
  double value = instance.k * u;
  for (int i = 0; i < m; ++i) value += std::max(0.0, scores(i) - u);
  return value;
}

namespace {

// Shared constraint skeleton over y = (x, v, u):
//   rows 0..m-1 :  s^i . x - v_i - u <= 0
//   (optional)  : -mu . x <= -mu_bar
//   (optional)  :  k u + sum v <= gamma_bar
//   then        : -x <= 0, -v <= 0, -u <= 0
// and the simplex equality sum x = 1.
qp::Problem dualized_skeleton(const KsumInstance& instance, std::optional<double> mu_bar,
                              std::optional<double> gamma_bar) {
  instance.validate();
  const VariableLayout layout{instance.n_assets(), instance.n_agencies()};
  const int n = layout.n, m = layout.m, d = layout.dim();

  qp::Problem p;
  p.P = Eigen::MatrixXd::Zero(d, d);
  p.q = Eigen::VectorXd::Zero(d);

  p.a_eq = Eigen::MatrixXd::Zero(1, d);
  p.a_eq.leftCols(n).setOnes();
  p.b_eq = Eigen::VectorXd::Ones(1);

  const int extra = (mu_bar ? 1 : 0) + (gamma_bar ? 1 : 0);
  const int rows = m + extra + d;
  p.a_in = Eigen::MatrixXd::Zero(rows, d);
  p.b_in = Eigen::VectorXd::Zero(rows);

  for (int i = 0; i < m; ++i) {
    p.a_in.row(i).head(n) = instance.S.row(i);
    p.a_in(i, layout.v_begin() + i) = -1.0;
    p.a_in(i, layout.u_index()) = -1.0;
  }
  int r = m;
  if (mu_bar) {
    p.a_in.row(r).head(n) = -instance.mu.transpose();
    p.b_in(r) = -*mu_bar;
    ++r;
  }
  if (gamma_bar) {
    p.a_in.row(r).segment(layout.v_begin(), m).setOnes();
    p.a_in(r, layout.u_index()) = instance.k;
    p.b_in(r) = *gamma_bar;
    ++r;
  }
  p.a_in.bottomRows(d) = -Eigen::MatrixXd::Identity(d, d);
  return p;
}

}  // namespace

qp::Problem scalarized_problem(const KsumInstance& instance, const Eigen::Vector3d& lambda) {
  if ((lambda.array() < 0.0).any()) throw ShapeError("scalarization weights must be >= 0");
  if (lambda.isZero()) throw ShapeError("scalarization weights must not all be zero");

  qp::Problem p = dualized_skeleton(instance, std::nullopt, std::nullopt);
  const VariableLayout layout{instance.n_assets(), instance.n_agencies()};
  p.P.topLeftCorner(layout.n, layout.n) = lambda(0) * 2.0 * qp::ensure_psd(instance.sigma);
  p.q.head(layout.n) = -lambda(1) * instance.mu;
  p.q.segment(layout.v_begin(), layout.m).setConstant(lambda(2));
  p.q(layout.u_index()) = lambda(2) * instance.k;
  return p;
}

qp::Problem single_objective_problem(const KsumInstance& instance) {
  return scalarized_problem(instance, Eigen::Vector3d::Ones());
}

qp::Problem epsilon_constraint_problem(const KsumInstance& instance, double mu_bar,
                                       double gamma_bar) {
  qp::Problem p = dualized_skeleton(instance, mu_bar, gamma_bar);
  const VariableLayout layout{instance.n_assets(), instance.n_agencies()};
  p.P.topLeftCorner(layout.n, layout.n) = 2.0 * qp::ensure_psd(instance.sigma);
  return p;
}

qp::Problem min_score_problem(const KsumInstance& instance, std::optional<double> mu_bar) {
  qp::Problem p = dualized_skeleton(instance, mu_bar, std::nullopt);
  const VariableLayout layout{instance.n_assets(), instance.n_agencies()};
  p.q.segment(layout.v_begin(), layout.m).setOnes();
  p.q(layout.u_index()) = instance.k;
  return p;
}

qp::Problem min_variance_problem(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& mu,
                                 std::optional<double> mu_bar) {
  const int n = static_cast<int>(mu.size());
  if (sigma.rows() != n || sigma.cols() != n) throw ShapeError("sigma must be n x n");

  qp::Problem p;
  p.P = 2.0 * qp::ensure_psd(sigma);
  p.q = Eigen::VectorXd::Zero(n);
  p.a_eq = Eigen::MatrixXd::Ones(1, n);
  p.b_eq = Eigen::VectorXd::Ones(1);

  const int rows = (mu_bar ? 1 : 0) + n;
  p.a_in = Eigen::MatrixXd::Zero(rows, n);
  p.b_in = Eigen::VectorXd::Zero(rows);
  int r = 0;
  if (mu_bar) {
    p.a_in.row(r) = -mu.transpose();
    p.b_in(r) = -*mu_bar;
    ++r;
  }
  p.a_in.bottomRows(n) = -Eigen::MatrixXd::Identity(n, n);
  return p;
}

}  // namespace ksum
