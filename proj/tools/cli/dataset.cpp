#include "cli/dataset.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "dcop/error.hpp"

namespace dcop::cli {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream s(line);
  while (std::getline(s, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::vector<double> column(const Dataset& data, std::size_t j) {
  std::vector<double> out(data.n());
  for (std::size_t i = 0; i < data.n(); ++i) out[i] = data.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return out;
}

}  // namespace

std::size_t Dataset::column_index(const std::string& name) const {
  for (std::size_t j = 0; j < names.size(); ++j)
    if (names[j] == name) return j;
  throw ConfigError("column '" + name + "' is not in the data");
}

Dataset read_csv(const std::string& path) {
  std::istringstream in(read_file(path));
  Dataset d;
  d.provenance = path;
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + " is empty");
  d.names = split(line);
  if (d.names.empty()) throw DataError(path + " has no header");
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    if (cells.size() != d.names.size())
      throw DataError(path + ":" + std::to_string(lineno) + " has " + std::to_string(cells.size()) + " fields, expected " +
                      std::to_string(d.names.size()));
    std::vector<double> row;
    for (const auto& c : cells) {
      char* end = nullptr;
      const double v = std::strtod(c.c_str(), &end);
      if (c.empty() || end != c.c_str() + c.size() || !std::isfinite(v))
        throw DataError(path + ":" + std::to_string(lineno) + " has a missing or non-numeric value '" + c + "'");
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  d.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d.names.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < d.names.size(); ++j) d.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return d;
}

std::string to_csv(const Dataset& data) {
  std::string out;
  for (std::size_t j = 0; j < data.names.size(); ++j) out += (j ? "," : "") + data.names[j];
  out += "\n";
  for (Eigen::Index i = 0; i < data.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.values.cols(); ++j) out += (j ? "," : "") + fmt(data.values(i, j));
    out += "\n";
  }
  return out;
}

std::vector<lik::Marginal> fit_margins(const RunConfig& config, const Dataset& data) {
  std::vector<lik::Marginal> out;
  for (const auto& m : config.margins) {
    const auto x = column(data, data.column_index(m.column));
    if (m.kind == "bernoulli") {
      double p = 0.0;
      if (m.p) {
        p = *m.p;
      } else {
        for (double v : x) p += v;
        p /= static_cast<double>(x.size());
      }
      out.push_back(lik::Marginal::bernoulli(p));
    } else if (m.kind == "empirical") {
      out.push_back(m.continuous ? lik::Marginal::empirical_continuous(x) : lik::Marginal::empirical_discrete(x));
    } else if (m.kind == "gaussian") {
      double mean = 0.0;
      for (double v : x) mean += v;
      mean /= static_cast<double>(x.size());
      double ss = 0.0;
      for (double v : x) ss += (v - mean) * (v - mean);
      out.push_back(lik::Marginal::gaussian(m.mean.value_or(mean),
                                            m.sd.value_or(std::sqrt(ss / static_cast<double>(x.size() - 1)))));
    } else if (m.kind == "fixed") {
      out.push_back(lik::Marginal::fixed(m.support, m.probs));
    } else {
      double mean = 0.0;
      for (double v : x) mean += v;
      mean /= static_cast<double>(x.size());
      out.push_back(lik::Marginal::poisson(m.rate.value_or(mean), m.max_value));
    }
  }
  return out;
}

std::vector<lik::Marginal> simulation_margins(const RunConfig& config) {
  std::vector<lik::Marginal> out;
  for (const auto& m : config.margins) {
    if (m.kind == "bernoulli") {
      if (!m.p) throw ConfigError("simulating margin '" + m.column + "' needs p");
      out.push_back(lik::Marginal::bernoulli(*m.p));
    } else if (m.kind == "gaussian") {
      if (!m.mean || !m.sd) throw ConfigError("simulating margin '" + m.column + "' needs mean and sd");
      out.push_back(lik::Marginal::gaussian(*m.mean, *m.sd));
    } else if (m.kind == "fixed") {
      out.push_back(lik::Marginal::fixed(m.support, m.probs));
    } else if (m.kind == "poisson") {
      if (!m.rate) throw ConfigError("simulating margin '" + m.column + "' needs rate");
      out.push_back(lik::Marginal::poisson(*m.rate, m.max_value));
    } else {
      throw ConfigError("empirical margin '" + m.column + "' cannot be simulated");
    }
  }
  return out;
}

std::vector<lik::ObservationBounds> build_bounds(const RunConfig& config, const Dataset& data,
                                                 const std::vector<lik::Marginal>& margins) {
  std::vector<std::size_t> cols;
  for (const auto& m : config.margins) cols.push_back(data.column_index(m.column));
  std::vector<lik::ObservationBounds> out;
  out.reserve(data.n());
  std::vector<double> x(cols.size());
  for (std::size_t i = 0; i < data.n(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j)
      x[j] = data.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(cols[j]));
    try {
      out.push_back(lik::bounds_from_data(x, margins));
    } catch (const DataError& e) {
      throw DataError("row " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

std::vector<double> simulation_theta(const RunConfig& config) {
  if (config.family == copula::Family::Gaussian) {
    if (config.factors == 0) return {};
    if (!config.simulate.loadings) throw ConfigError("simulate.loadings is required for the gaussian family");
    if (config.simulate.loadings->size() != config.dim()) throw ConfigError("simulate.loadings needs one row per margin");
    return flatten_loadings(*config.simulate.loadings, config.factors);
  }
  if (!config.simulate.theta) throw ConfigError("simulate.theta is required");
  return {*config.simulate.theta};
}

Dataset simulate(const RunConfig& config, std::uint64_t seed) {
  if (config.simulate.n == 0) throw ConfigError("simulate.n must be positive");
  const auto margins = simulation_margins(config);
  const auto param = config.parameterization();
  const auto theta = simulation_theta(config);
  const copula::Model model = param.model_natural(theta);
  const copula::RowMatrix u = copula::sample_copula(model, config.simulate.n, config.dim(), seed);
  Dataset d;
  for (const auto& m : config.margins) d.names.push_back(m.column);
  d.values.resize(u.rows(), u.cols());
  for (Eigen::Index i = 0; i < u.rows(); ++i)
    for (Eigen::Index j = 0; j < u.cols(); ++j) d.values(i, j) = margins[static_cast<std::size_t>(j)].quantile(u(i, j));
  d.provenance = "simulated";
  return d;
}

}  // namespace dcop::cli
