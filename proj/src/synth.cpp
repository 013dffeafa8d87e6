#include "ksum/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "ksum/errors.hpp"

namespace ksum {

std::uint64_t Rng::next() {
  // splitmix64
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform01() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform01();
  while (u1 <= 0.0) u1 = uniform01();
  const double u2 = uniform01();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * M_PI * u2;
  spare_ = radius * std::sin(angle);
  have_spare_ = true;
  return radius * std::cos(angle);
}

namespace {

// civil-from-days / days-from-civil, proleptic Gregorian
long days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

void civil_from_days(long z, int& y, unsigned& m, unsigned& d) {
  z += 719468;
  const long era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<int>(yoe) + static_cast<int>(era) * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y += m <= 2;
}

long parse_iso(const std::string& iso) {
  int y = 0, m = 0, d = 0;
  if (std::sscanf(iso.c_str(), "%d-%d-%d", &y, &m, &d) != 3)
    throw ParseError("bad ISO date: " + iso);
  return days_from_civil(y, m, d);
}

std::string format_iso(long days) {
  int y;
  unsigned m, d;
  civil_from_days(days, y, m, d);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", y, m, d);
  return buf;
}

int weekday(long days) {  // 0 = Monday; day 0 (1970-01-01) was a Thursday
  return static_cast<int>(((days % 7) + 10) % 7);
}

}  // namespace

std::string advance_trading_days(const std::string& iso_date, int steps) {
  long z = parse_iso(iso_date);
  while (weekday(z) >= 5) ++z;
  for (int i = 0; i < steps; ++i) {
    ++z;
    while (weekday(z) >= 5) ++z;
  }
  return format_iso(z);
}

SynthDataset generate_synthetic(const SynthConfig& config) {
  const int n = config.n_assets, T = config.n_dates, m = config.n_agencies;
  if (n < 1 || T < 2 || m < 1) throw ConfigError("synthetic dataset too small");

  Rng rng(config.seed);
  SynthDataset out;

  // consensus greenness first: the optional return link reads it
  Eigen::VectorXd consensus(n);
  for (int j = 0; j < n; ++j) consensus(j) = rng.uniform(0.1, 0.9);

  // one-factor covariance: vol_j, loading beta_j
  Eigen::VectorXd vol(n), beta(n), drift(n);
  for (int j = 0; j < n; ++j) {
    vol(j) = rng.uniform(config.annual_vol_min, config.annual_vol_max) / std::sqrt(252.0);
    beta(j) = rng.uniform(0.2, 0.8);
    drift(j) = rng.uniform(config.annual_drift_min, config.annual_drift_max) / 252.0;
    const double edge = config.esg_return_link * (consensus(j) - 0.5);
    drift(j) += edge / 252.0;
    vol(j) *= std::max(0.25, 1.0 - 0.5 * edge);
  }
  Eigen::MatrixXd corr = beta * beta.transpose();
  corr.diagonal().setOnes();
  out.target_sigma = vol.asDiagonal() * corr * vol.asDiagonal();
  const Eigen::MatrixXd chol = Eigen::LLT<Eigen::MatrixXd>(out.target_sigma).matrixL();

  Eigen::MatrixXd prices(T, n);
  for (int j = 0; j < n; ++j) prices(0, j) = 100.0 * rng.uniform(0.5, 2.0);
  Eigen::VectorXd z(n);
  for (int t = 1; t < T; ++t) {
    for (int j = 0; j < n; ++j) z(j) = rng.normal();
    const Eigen::VectorXd r = (drift + chol * z).cwiseMax(-0.9);
    prices.row(t) = prices.row(t - 1).array() * (1.0 + r.array()).transpose();
  }

  std::vector<std::string> dates(T);
  dates[0] = advance_trading_days(config.start_date, 0);
  for (int t = 1; t < T; ++t) dates[t] = advance_trading_days(dates[t - 1], 1);

  std::vector<std::string> ids(n);
  for (int j = 0; j < n; ++j) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "A%03d", j);
    ids[j] = buf;
  }
  out.market = make_market_data(ids, dates, std::move(prices));

  out.agencies.resize(m);
  for (int i = 0; i < m; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "AG%02d", i);
    out.agencies[i] = AgencyMeta{buf, 0.0, 100.0, Orientation::GreenerIsHigher};
  }
  const bool flip = config.flip_last_agency && m > 1;
  if (flip) out.agencies[m - 1].orientation = Orientation::GreenerIsLower;

  // agency panels: per-agency deviations around the (slowly drifting)
  // consensus greenness
  for (int row = 0; row < T - 1; row += config.score_panel_period) {
    ScorePanel panel;
    panel.agencies = out.agencies;
    panel.asset_ids = out.market.asset_ids;
    panel.raw.resize(m, n);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) {
        const double value =
            std::clamp(consensus(j) + config.disagreement * rng.normal(), 0.0, 1.0);
        panel.raw(i, j) = 100.0 * (flip && i == m - 1 ? 1.0 - value : value);
      }
    }
    out.score_panels.emplace_back(out.market.dates[row], std::move(panel));
    for (int j = 0; j < n; ++j)
      consensus(j) = std::clamp(consensus(j) + 0.02 * rng.normal(), 0.05, 0.95);
  }
  return out;
}

}  // namespace ksum
