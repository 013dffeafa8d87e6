#pragma once

// Seeded instance generators shared by the unit and acceptance suites.

#include <Eigen/Dense>

#include "ksum/ksum_models.hpp"
#include "ksum/synth.hpp"

namespace gen {

inline Eigen::MatrixXd random_pd_matrix(ksum::Rng& rng, int n, double scale = 1.0) {
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = rng.normal();
  Eigen::MatrixXd sigma = scale * (a * a.transpose() / n);
  sigma.diagonal().array() += 0.1 * scale;
  return sigma;
}

inline Eigen::VectorXd random_vector(ksum::Rng& rng, int n, double lo, double hi) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.uniform(lo, hi);
  return v;
}

inline Eigen::VectorXd random_simplex(ksum::Rng& rng, int n) {
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x(i) = -std::log(1.0 - rng.uniform01());
  return x / x.sum();
}

inline Eigen::MatrixXd random_scores(ksum::Rng& rng, int m, int n) {
  Eigen::MatrixXd s(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) s(i, j) = rng.uniform01();
  return s;
}

inline ksum::KsumInstance random_instance(ksum::Rng& rng, int n, int m, int k,
                                          double sigma_scale = 1.0) {
  ksum::KsumInstance inst;
  inst.sigma = random_pd_matrix(rng, n, sigma_scale);
  inst.mu = random_vector(rng, n, 0.0, 0.2);
  inst.S = random_scores(rng, m, n);
  inst.k = k;
  return inst;
}

}  // namespace gen
