#include <algorithm>
#include <cmath>
#include <numeric>

#include "dcop/diagnostics.hpp"
#include "dcop/error.hpp"
#include "dcop/special.hpp"

namespace dcop::diag {

double silverman_bandwidth(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 30) throw DataError("density estimate needs at least 30 draws");
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : series) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  std::vector<double> s(series.begin(), series.end());
  std::sort(s.begin(), s.end());
  const auto q = [&](double p) {
    const double h = p * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(h);
    const std::size_t hi = std::min(lo + 1, n - 1);
    return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
  };
  const double iqr = q(0.75) - q(0.25);
  double spread = sd;
  if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0)) throw DataError("density estimate needs a non-constant series");
  return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

double trapezoid(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return s;
}

KdeCurve kde(std::span<const double> series, std::size_t grid_points) {
  if (grid_points < 2) throw ConfigError("density grid needs at least two points");
  const double h = silverman_bandwidth(series);
  const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
  const double a = *lo - 4.0 * h;
  const double b = *hi + 4.0 * h;
  std::vector<double> grid(grid_points);
  for (std::size_t i = 0; i < grid_points; ++i)
    grid[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(grid_points - 1);
  return kde(series, std::move(grid));
}

KdeCurve kde(std::span<const double> series, std::vector<double> grid) {
  KdeCurve out;
  out.bandwidth = silverman_bandwidth(series);
  out.grid = std::move(grid);
  out.density.assign(out.grid.size(), 0.0);
  const double h = out.bandwidth;
  const double norm = 1.0 / (static_cast<double>(series.size()) * h);
  const auto g = static_cast<std::ptrdiff_t>(out.grid.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < g; ++i) {
    double s = 0.0;
    const double x = out.grid[static_cast<std::size_t>(i)];
    for (double v : series) {
      const double z = (x - v) / h;
      if (std::abs(z) < 40.0) s += std::exp(-0.5 * z * z);
    }
    out.density[static_cast<std::size_t>(i)] = s * norm * std::exp(-kLogSqrt2Pi);
  }
  const double area = trapezoid(out.grid, out.density);
  if (area > 0.0)
    for (double& d : out.density) d /= area;
  return out;
}

}  // namespace dcop::diag
