#include "ksum/frontier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "ksum/detail/text.hpp"
#include "ksum/errors.hpp"

namespace ksum {

namespace {

Eigen::VectorXd solve_weights(const qp::Problem& p, const VariableLayout& layout,
                              const qp::Settings& settings, qp::Status& status) {
  const qp::Solution sol = qp::solve(p, settings);
  status = sol.status;
  return layout.weights_of(sol.y);
}

std::vector<int> max_return_assets(const Eigen::VectorXd& mu) {
  const double top = mu.maxCoeff();
  std::vector<int> idx;
  for (int j = 0; j < mu.size(); ++j)
    if (mu(j) == top) idx.push_back(j);
  return idx;
}

KsumInstance restrict_instance(const KsumInstance& instance, const std::vector<int>& keep) {
  KsumInstance out;
  const int r = static_cast<int>(keep.size());
  out.sigma.resize(r, r);
  out.mu.resize(r);
  out.S.resize(instance.S.rows(), r);
  for (int a = 0; a < r; ++a) {
    out.mu(a) = instance.mu(keep[a]);
    out.S.col(a) = instance.S.col(keep[a]);
    for (int b = 0; b < r; ++b) out.sigma(a, b) = instance.sigma(keep[a], keep[b]);
  }
  out.k = instance.k;
  return out;
}

Eigen::VectorXd lift_weights(const Eigen::VectorXd& reduced, const std::vector<int>& keep,
                             int n) {
  Eigen::VectorXd full = Eigen::VectorXd::Zero(n);
  for (int a = 0; a < static_cast<int>(keep.size()); ++a) full(keep[a]) = reduced(a);
  return full;
}

bool at_mu_max(const KsumInstance& instance, double mu_bar) {
  return mu_bar >= instance.mu.maxCoeff();
}

// At mu_bar = mu_max the return floor pins the portfolio onto the
// best-return assets and the feasible set loses its interior; solve the
// model restricted to those assets instead.
FrontierPoint solve_point(const KsumInstance& instance, double mu_bar, double gamma_bar,
                          const qp::Settings& settings) {
  FrontierPoint pt;
  pt.mu_bar = mu_bar;
  pt.gamma_bar = gamma_bar;

  const int n = instance.n_assets();
  if (at_mu_max(instance, mu_bar)) {
    const std::vector<int> keep = max_return_assets(instance.mu);
    const KsumInstance reduced = restrict_instance(instance, keep);
    const VariableLayout layout{reduced.n_assets(), reduced.n_agencies()};
    qp::Problem p = epsilon_constraint_problem(reduced, reduced.mu.minCoeff(), gamma_bar);
    pt.weights = lift_weights(solve_weights(p, layout, settings, pt.status), keep, n);
  } else {
    const VariableLayout layout{n, instance.n_agencies()};
    qp::Problem p = epsilon_constraint_problem(instance, mu_bar, gamma_bar);
    pt.weights = solve_weights(p, layout, settings, pt.status);
    if (pt.status != qp::Status::optimal) {
      // gamma_bar == gamma_min leaves no slack in the score cap; a
      // tolerance-level relaxation usually restores convergence.
      qp::Problem retry = epsilon_constraint_problem(
          instance, mu_bar, gamma_bar + 1e-9 * std::max(1.0, std::abs(gamma_bar)));
      const qp::Solution sol = qp::solve(retry, settings);
      if (sol.status == qp::Status::optimal) {
        pt.status = sol.status;
        pt.weights = layout.weights_of(sol.y);
      }
    }
  }
  pt.variance = pt.weights.dot(instance.sigma * pt.weights);
  pt.expected_return = instance.mu.dot(pt.weights);
  pt.kworst = kworst_score(instance, pt.weights);
  const double scale = std::max(1.0, std::abs(gamma_bar));
  pt.return_floor_binding = pt.expected_return <= mu_bar + 1e-8;
  pt.score_cap_binding = pt.kworst >= gamma_bar - 1e-8 * scale;
  return pt;
}

std::vector<double> uniform_grid(double lo, double hi, int count) {
  if (hi - lo <= 1e-14 * std::max(1.0, std::abs(hi))) return {hi};
  std::vector<double> grid(count);
  for (int i = 0; i < count; ++i) grid[i] = lo + (hi - lo) * i / (count - 1);
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

}  // namespace

MuRange compute_mu_range(const KsumInstance& instance, const qp::Settings& settings) {
  instance.validate();
  MuRange r;

  qp::Status status;
  const Eigen::VectorXd x_gminv =
      solve_weights(min_variance_problem(instance.sigma, instance.mu),
                    VariableLayout{instance.n_assets(), 0}, settings, status);
  r.min_variance_return = instance.mu.dot(x_gminv);

  const VariableLayout lifted{instance.n_assets(), instance.n_agencies()};
  const Eigen::VectorXd x_minscore =
      solve_weights(min_score_problem(instance), lifted, settings, status);
  r.min_score_return = instance.mu.dot(x_minscore);

  r.mu_min = std::max(r.min_variance_return, r.min_score_return);
  r.mu_max = instance.mu.maxCoeff();
  r.mu_min = std::min(r.mu_min, r.mu_max);
  return r;
}

GammaRange compute_gamma_range(const KsumInstance& instance, double mu_bar,
                               const qp::Settings& settings) {
  instance.validate();
  if (mu_bar > instance.mu.maxCoeff())
    throw ConfigError("return floor " + detail::format_double(mu_bar) +
                      " exceeds the best asset return");

  GammaRange r;
  if (at_mu_max(instance, mu_bar)) {
    const std::vector<int> keep = max_return_assets(instance.mu);
    const KsumInstance reduced = restrict_instance(instance, keep);
    const qp::Solution score_sol = qp::solve(min_score_problem(reduced), settings);
    r.gamma_min = score_sol.objective;
    qp::Status status;
    const Eigen::VectorXd x_mv = solve_weights(
        min_variance_problem(reduced.sigma, reduced.mu), VariableLayout{reduced.n_assets(), 0},
        settings, status);
    r.gamma_max = kworst_score(reduced, x_mv);
  } else {
    const qp::Solution score_sol = qp::solve(min_score_problem(instance, mu_bar), settings);
    r.gamma_min = score_sol.objective;
    qp::Status status;
    const Eigen::VectorXd x_mv =
        solve_weights(min_variance_problem(instance.sigma, instance.mu, mu_bar),
                      VariableLayout{instance.n_assets(), 0}, settings, status);
    r.gamma_max = kworst_score(instance, x_mv);
  }
  r.gamma_min = std::min(r.gamma_min, r.gamma_max);
  return r;
}

FrontierSurface trace_surface(const KsumInstance& instance, int n_mu, int n_gamma,
                              const qp::Settings& settings) {
  instance.validate();
  if (n_mu < 1 || n_gamma < 1) throw ConfigError("grid counts must be positive");

  FrontierSurface surf;
  surf.mu_range = compute_mu_range(instance, settings);
  surf.mu_grid = uniform_grid(surf.mu_range.mu_min, surf.mu_range.mu_max, n_mu);

  for (double mu_bar : surf.mu_grid) {
    const GammaRange gr = compute_gamma_range(instance, mu_bar, settings);
    surf.gamma_ranges.push_back(gr);
    surf.gamma_grids.push_back(uniform_grid(gr.gamma_min, gr.gamma_max, n_gamma));

    std::vector<FrontierPoint> row;
    for (double gamma_bar : surf.gamma_grids.back()) {
      row.push_back(solve_point(instance, mu_bar, gamma_bar, settings));
      ++surf.total_points;
      if (row.back().status != qp::Status::optimal) ++surf.failed_points;
    }
    surf.points.push_back(std::move(row));
  }

  // endpoint identities; the corner target is the floor-constrained
  // minimum-variance portfolio, which is the GMinV portfolio whenever the
  // GMinV return already clears mu_min
  qp::Status status;
  surf.gminv_weights =
      solve_weights(min_variance_problem(instance.sigma, instance.mu, surf.mu_range.mu_min),
                    VariableLayout{instance.n_assets(), 0}, settings, status);
  const FrontierPoint& corner = surf.points.front().back();  // (mu_min, gamma_max)
  surf.gminv_weight_gap = (corner.weights - surf.gminv_weights).cwiseAbs().maxCoeff();

  const std::vector<int> top = max_return_assets(instance.mu);
  double vertex_gap = 0.0;
  for (const FrontierPoint& pt : surf.points.back()) {
    Eigen::VectorXd vertex = Eigen::VectorXd::Zero(instance.n_assets());
    if (top.size() == 1) {
      vertex(top[0]) = 1.0;
      vertex_gap = std::max(vertex_gap, (pt.weights - vertex).cwiseAbs().maxCoeff());
    }
  }
  surf.vertex_weight_gap = vertex_gap;
  return surf;
}

std::array<TargetProfile, 4> select_profiles(const KsumInstance& instance,
                                             const qp::Settings& settings) {
  const MuRange mr = compute_mu_range(instance, settings);
  std::array<TargetProfile, 4> out;
  const std::array<double, 4> alphas{0.0, 0.25, 0.5, 0.75};
  for (int i = 0; i < 4; ++i) {
    TargetProfile p;
    p.alpha = alphas[i];
    p.mu_bar = mr.mu_min + p.alpha * (mr.mu_max - mr.mu_min);
    const GammaRange gr = compute_gamma_range(instance, p.mu_bar, settings);
    p.gamma_bar = gr.gamma_min + 0.4 * (gr.gamma_max - gr.gamma_min);
    out[i] = p;
  }
  return out;
}

void write_surface_csv(const FrontierSurface& surface, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write surface file: " + path);
  out << "mu_bar,gamma_bar,variance,exp_return,kworst_score,status\n";
  for (const auto& row : surface.points)
    for (const auto& pt : row)
      out << detail::format_double(pt.mu_bar) << ',' << detail::format_double(pt.gamma_bar)
          << ',' << detail::format_double(pt.variance) << ','
          << detail::format_double(pt.expected_return) << ','
          << detail::format_double(pt.kworst) << ',' << qp::to_string(pt.status) << '\n';
}

std::string instance_hash(const KsumInstance& instance) {
  detail::Fnv1a hash;
  hash.update("sigma");
  for (int i = 0; i < instance.sigma.rows(); ++i)
    for (int j = 0; j < instance.sigma.cols(); ++j) hash.update_double(instance.sigma(i, j));
  hash.update("mu");
  for (int i = 0; i < instance.mu.size(); ++i) hash.update_double(instance.mu(i));
  hash.update("S");
  for (int i = 0; i < instance.S.rows(); ++i)
    for (int j = 0; j < instance.S.cols(); ++j) hash.update_double(instance.S(i, j));
  hash.update("k");
  hash.update(std::to_string(instance.k));
  return hash.hex();
}

void write_surface_manifest(const FrontierSurface& surface, const KsumInstance& instance,
                            const std::string& path) {
  nlohmann::json m;
  m["instance_hash"] = instance_hash(instance);
  m["n_assets"] = instance.n_assets();
  m["n_agencies"] = instance.n_agencies();
  m["k"] = instance.k;
  m["mu_levels"] = surface.mu_grid.size();
  m["gamma_levels_per_mu"] = surface.gamma_grids.empty() ? 0 : surface.gamma_grids[0].size();
  m["mu_min"] = surface.mu_range.mu_min;
  m["mu_max"] = surface.mu_range.mu_max;
  m["failed_points"] = surface.failed_points;
  m["total_points"] = surface.total_points;
  int weakly_efficient = 0;
  for (const auto& row : surface.points)
    for (const auto& pt : row)
      if (!pt.return_floor_binding || !pt.score_cap_binding) ++weakly_efficient;
  m["possibly_weakly_efficient_points"] = weakly_efficient;
  m["gminv_weight_gap"] = surface.gminv_weight_gap;
  m["max_return_vertex_gap"] = surface.vertex_weight_gap;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write surface manifest: " + path);
  out << m.dump(2) << '\n';
}

}  // namespace ksum
