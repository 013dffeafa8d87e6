#include "ksum/market_data.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <set>

#include "ksum/detail/text.hpp"
#include "ksum/errors.hpp"

namespace ksum {

namespace {

double parse_price_cell(const std::string& cell, int row, const std::string& column) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end == cell.c_str() || *end != '\0' || errno == ERANGE) {
    throw ParseError("malformed price cell at row " + std::to_string(row) +
                     ", column '" + column + "': '" + cell + "'");
  }
  return v;
}

}  // namespace

MarketData make_market_data(std::vector<std::string> asset_ids,
                            std::vector<std::string> dates,
                            Eigen::MatrixXd prices) {
  const int T = static_cast<int>(dates.size());
  const int n = static_cast<int>(asset_ids.size());
  if (T < 2) throw InsufficientDataError("need at least 2 dates, got " + std::to_string(T));
  if (prices.rows() != T || prices.cols() != n)
    throw ShapeError("price matrix does not match dates/assets");
  for (int t = 1; t < T; ++t) {
    if (!(dates[t - 1] < dates[t]))
      throw ParseError("dates not strictly increasing at row " + std::to_string(t + 1) +
                       " ('" + dates[t] + "')");
  }
  if (!(prices.array() > 0.0).all()) throw ParseError("non-positive price in input");

  MarketData data;
  data.asset_ids = std::move(asset_ids);
  data.dates = std::move(dates);
  data.prices = std::move(prices);
  data.returns.resize(T - 1, n);
  for (int t = 0; t + 1 < T; ++t)
    data.returns.row(t) = data.prices.row(t + 1).array() / data.prices.row(t).array() - 1.0;
  return data;
}

MarketData load_prices(const std::string& path, LoadReport* report) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open price file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty price file: " + path);
  auto header = detail::split(detail::strip(line), ',');
  if (header.size() < 2 || detail::strip(header[0]) != "date")
    throw ParseError("price header must be 'date,<ticker>,...', got '" + line + "'");

  std::vector<std::string> tickers(header.begin() + 1, header.end());
  for (auto& t : tickers) t = detail::strip(t);
  const int n = static_cast<int>(tickers.size());

  std::vector<std::string> dates;
  std::vector<std::vector<double>> rows;
  std::vector<std::vector<bool>> present;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = detail::strip(line);
    if (stripped.empty()) continue;
    auto cells = detail::split(stripped, ',');
    if (static_cast<int>(cells.size()) != n + 1)
      throw ParseError("row " + std::to_string(lineno) + " has " +
                       std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(n + 1));
    dates.push_back(detail::strip(cells[0]));
    std::vector<double> row(n, 0.0);
    std::vector<bool> have(n, false);
    for (int j = 0; j < n; ++j) {
      const std::string cell = detail::strip(cells[j + 1]);
      if (cell.empty()) continue;  // missing observation; asset gets dropped
      row[j] = parse_price_cell(cell, lineno, tickers[j]);
      have[j] = true;
    }
    rows.push_back(std::move(row));
    present.push_back(std::move(have));
  }
  const int T = static_cast<int>(dates.size());
  if (T < 2) throw InsufficientDataError("price file has fewer than 2 dates: " + path);

  std::vector<int> kept;
  std::vector<std::string> dropped;
  for (int j = 0; j < n; ++j) {
    bool complete = true;
    for (int t = 0; t < T; ++t) complete = complete && present[t][j];
    if (complete)
      kept.push_back(j);
    else
      dropped.push_back(tickers[j]);
  }
  if (report) report->dropped_assets = dropped;
  if (kept.empty()) throw InsufficientDataError("no asset has a complete price history");

  std::vector<std::string> ids;
  ids.reserve(kept.size());
  for (int j : kept) ids.push_back(tickers[j]);
  Eigen::MatrixXd prices(T, static_cast<int>(kept.size()));
  for (int t = 0; t < T; ++t)
    for (std::size_t c = 0; c < kept.size(); ++c) prices(t, c) = rows[t][kept[c]];

  return make_market_data(std::move(ids), std::move(dates), std::move(prices));
}

void write_prices_csv(const MarketData& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write price file: " + path);
  out << "date";
  for (const auto& id : data.asset_ids) out << ',' << id;
  out << '\n';
  for (int t = 0; t < data.n_dates(); ++t) {
    out << data.dates[t];
    for (int j = 0; j < data.n_assets(); ++j)
      out << ',' << detail::format_double(data.prices(t, j));
    out << '\n';
  }
}

MomentEstimate estimate_moments(const Eigen::MatrixXd& returns, int start, int end) {
  if (start < 0 || end > returns.rows() || start >= end)
    throw ShapeError("moment window [" + std::to_string(start) + ", " +
                     std::to_string(end) + ") out of range");
  const int len = end - start;
  if (len < 2)
    throw InsufficientDataError("moment window needs >= 2 observations, got " +
                                std::to_string(len));
  const auto window = returns.middleRows(start, len);

  MomentEstimate est;
  est.mu = window.colwise().mean();
  Eigen::MatrixXd centered = window.rowwise() - est.mu.transpose();
  est.sigma = (centered.transpose() * centered) / static_cast<double>(len - 1);
  est.sigma = ((est.sigma + est.sigma.transpose()) / 2.0).eval();  // exact symmetry
  est.window_start = start;
  est.window_end = end;
  return est;
}

MomentEstimate estimate_moments(const MarketData& data, int start, int end) {
  return estimate_moments(data.returns, start, end);
}

}  // namespace ksum
