#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "dcop/diagnostics.hpp"

namespace dcop::diag {

namespace {

double quantile_sorted(const std::vector<double>& s, double p) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double h = p * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

}  // namespace

IactResult iact(std::span<const double> series, double c) {
  if (series.size() < 100) throw std::invalid_argument("IACT needs at least 100 draws");
  const std::size_t n = series.size();
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = series[i] - mean;
  double c0 = 0.0;
  for (double v : x) c0 += v * v;
  IactResult out;
  if (!(c0 > 0.0) || !std::isfinite(c0)) {
    out.value = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  double tau = 1.0;
  const std::size_t max_lag = n / 2;
  std::size_t M = 0;
  while (M < max_lag) {
    ++M;
    double ck = 0.0;
    for (std::size_t i = 0; i + M < n; ++i) ck += x[i] * x[i + M];
    tau += 2.0 * ck / c0;
    if (static_cast<double>(M) >= c * tau) break;
  }
  out.value = tau;
  out.window = M;
  out.defined = std::isfinite(tau) && static_cast<double>(M) >= c * tau;
  return out;
}

double tnv(double iact_value, double seconds) { return iact_value * seconds; }

double relative_tnv(double tnv_run, double tnv_baseline) { return tnv_run / tnv_baseline; }

ChainSummary summarize(const pm::ChainOutput& chain) {
  ChainSummary out;
  out.seconds = chain.seconds;
  out.acceptance = chain.acceptance_rate();
  out.draws = chain.draws.size();
  double iact_sum = 0.0;
  std::size_t iact_count = 0;
  for (std::size_t k = 0; k < chain.names.size(); ++k) {
    ParameterSummary p;
    p.name = chain.names[k];
    auto col = chain.column(k);
    p.mean = chain.mean(k);
    p.sd = chain.sd(k);
    if (col.size() >= 100) {
      p.iact = iact(col);
    } else {
      p.iact.value = std::numeric_limits<double>::quiet_NaN();
    }
    if (p.iact.defined) {
      iact_sum += p.iact.value;
      ++iact_count;
    }
    std::sort(col.begin(), col.end());
    p.q025 = quantile_sorted(col, 0.025);
    p.q975 = quantile_sorted(col, 0.975);
    out.parameters.push_back(std::move(p));
  }
  out.mean_iact = iact_count > 0 ? iact_sum / static_cast<double>(iact_count) : std::numeric_limits<double>::quiet_NaN();
  out.tnv = tnv(out.mean_iact, out.seconds);
  return out;
}

}  // namespace dcop::diag
