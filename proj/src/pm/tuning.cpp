#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "dcop/error.hpp"
#include "dcop/pm.hpp"

namespace dcop::pm {

namespace {

constexpr double kOptimalSd = 2.16;
constexpr double kRhoCap = 0.999;

double sample_variance(std::span<const std::pair<double, double>> pairs) {
  if (pairs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double mean = 0.0;
  for (const auto& p : pairs) mean += p.first;
  mean /= static_cast<double>(pairs.size());
  double ss = 0.0;
  for (const auto& p : pairs) ss += (p.first - mean) * (p.first - mean);
  return ss / static_cast<double>(pairs.size() - 1);
}

}  // namespace

double optimal_variance(double rho, TuningPolicy policy) {
  if (policy == TuningPolicy::UnitVariance) return 1.0;
  return kOptimalSd * kOptimalSd / (1.0 - rho * rho);
}

std::vector<std::pair<double, double>> paired_estimates(const Target& target, std::span<const double> eta,
                                                        const PMConfig& config, std::size_t pairs,
                                                        std::uint64_t seed) {
  std::vector<std::pair<double, double>> out;
  out.reserve(pairs);
  for (std::size_t r = 0; r < pairs; ++r) {
    auto aux = target.make_aux(config.stream, config.points, derive_seed(seed, r, 0), config.normals());
    if (!aux) {
      const double v = target.log_likelihood(eta, nullptr);
      out.emplace_back(v, v);
      continue;
    }
    const lik::AuxStream next = propose_aux(*aux, config, derive_seed(seed, r, 1));
    out.emplace_back(target.log_likelihood(eta, &*aux), target.log_likelihood(eta, &next));
  }
  return out;
}

double pearson(std::span<const std::pair<double, double>> pairs) {
  const auto n = static_cast<double>(pairs.size());
  if (pairs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0.0;
  double my = 0.0;
  for (const auto& [x, y] : pairs) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (const auto& [x, y] : pairs) {
    sxx += (x - mx) * (x - mx);
    syy += (y - my) * (y - my);
    sxy += (x - mx) * (y - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

TuningReport tune_points(const Target& target, std::span<const double> eta_bar, const PMConfig& variant,
                         const TuningConfig& tuning) {
  if (tuning.pairs < 2) throw ConfigError("tuning needs at least two pairs");
  if (tuning.min_points == 0 || tuning.max_points < tuning.min_points) throw ConfigError("bad tuning point range");
  TuningReport report;
  report.theta_bar = target.natural(eta_bar);
  report.satisfied = false;
  std::size_t M = std::size_t{1} << qmc::ceil_log2(tuning.min_points);
  for (; M <= tuning.max_points; M *= 2) {
    PMConfig cfg = variant;
    cfg.points = M;
    const auto pairs = paired_estimates(target, eta_bar, cfg, tuning.pairs, derive_seed(tuning.seed, M));
    TuningCell cell;
    cell.points = M;
    cell.variance = sample_variance(pairs);
    bool any_zero = false;
    for (const auto& p : pairs) any_zero |= !std::isfinite(p.first) || !std::isfinite(p.second);
    if (any_zero) cell.variance = std::numeric_limits<double>::infinity();
    if (variant.variant == Variant::Block && tuning.block_analytic) {
      cell.rho = 1.0 - 1.0 / static_cast<double>(variant.blocks);
    } else {
      cell.rho = any_zero ? 0.0 : pearson(pairs);
      if (std::isnan(cell.rho)) cell.rho = 0.0;
    }
    if (cell.rho >= kRhoCap) {
      cell.rho = kRhoCap;
      if (!report.clamped) report.warnings.push_back("estimated correlation clamped to 0.999");
      report.clamped = true;
    }
    cell.sigma2_opt = optimal_variance(cell.rho, tuning.policy);
    report.cells.push_back(cell);
    report.rho = cell.rho;
    report.sigma2_opt = cell.sigma2_opt;
    report.points = M;
    if (cell.variance <= cell.sigma2_opt) {
      report.satisfied = true;
      break;
    }
  }
  if (!report.satisfied) {
    std::ostringstream msg;
    msg << "no point count up to " << tuning.max_points << " reached the target variance; using the largest";
    report.warnings.push_back(msg.str());
  }
  return report;
}

}  // namespace dcop::pm
