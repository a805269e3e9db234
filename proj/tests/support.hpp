#pragma once

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include "dcop/copula.hpp"
#include "dcop/likelihood.hpp"
#include "dcop/marginals.hpp"
#include "dcop/qmc.hpp"
#include "dcop/rng.hpp"
#include "dcop/special.hpp"

namespace dcop::testing {

inline double mean(std::span<const double> x) { return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size()); }

inline double variance(std::span<const double> x) {
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

inline double std_error(std::span<const double> x) { return std::sqrt(variance(x) / static_cast<double>(x.size())); }

inline double correlation(std::span<const double> x, std::span<const double> y) {
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

// One-sample KS statistic against a continuous CDF.
template <class Cdf>
double ks_statistic(std::vector<double> x, Cdf cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

// Asymptotic 1% critical value of the KS statistic.
inline double ks_critical_1pct(std::size_t n) { return 1.6276 / std::sqrt(static_cast<double>(n)); }

// Kendall's tau by direct pair counting.
inline double kendall_tau(std::span<const double> x, std::span<const double> y) {
  long long s = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double p = (x[i] - x[j]) * (y[i] - y[j]);
      s += p > 0 ? 1 : (p < 0 ? -1 : 0);
    }
  const double pairs = 0.5 * static_cast<double>(x.size()) * static_cast<double>(x.size() - 1);
  return static_cast<double>(s) / pairs;
}

inline std::vector<lik::Marginal> bernoulli_margins(std::size_t J, double p = 0.5) {
  return std::vector<lik::Marginal>(J, lik::Marginal::bernoulli(p));
}

inline lik::ObservationBounds bernoulli_bounds(std::span<const double> x, double p = 0.5) {
  return lik::bounds_from_data(x, bernoulli_margins(x.size(), p));
}

// Binary data thresholded from copula draws at 1 - p.
inline std::vector<lik::ObservationBounds> binary_data(const copula::Model& model, std::size_t n, std::size_t J,
                                                       std::uint64_t seed, double p = 0.5) {
  const auto u = copula::sample_copula(model, n, J, seed);
  const auto margins = bernoulli_margins(J, p);
  std::vector<lik::ObservationBounds> out;
  out.reserve(n);
  std::vector<double> x(J);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < J; ++j) x[j] = u(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > 1.0 - p ? 1.0 : 0.0;
    out.push_back(lik::bounds_from_data(x, margins));
  }
  return out;
}

// Sum over the 2^J rectangle corners with alternating signs.
template <class Cdf>
double inclusion_exclusion(const lik::ObservationBounds& b, Cdf cdf) {
  const std::size_t J = b.dim();
  double total = 0.0;
  std::vector<double> corner(J);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << J); ++mask) {
    int lows = 0;
    bool zero = false;
    for (std::size_t j = 0; j < J; ++j) {
      const bool low = (mask >> j) & 1;
      corner[j] = low ? b.lower[j] : b.upper[j];
      lows += low;
      if (corner[j] <= 0.0) zero = true;
    }
    if (zero) continue;
    total += (lows % 2 ? -1.0 : 1.0) * cdf(std::span<const double>(corner));
  }
  return total;
}

// Rectangle probability of a one-factor Gaussian copula by quadrature over
// the factor: given f, the latent z_j = b_j f + e_j are independent.
inline double one_factor_rectangle(const Eigen::VectorXd& loadings, const lik::ObservationBounds& b) {
  const std::size_t J = b.dim();
  std::vector<double> lo(J), hi(J);
  for (std::size_t j = 0; j < J; ++j) {
    const double s = std::sqrt(1.0 + loadings[static_cast<Eigen::Index>(j)] * loadings[static_cast<Eigen::Index>(j)]);
    lo[j] = b.lower[j] <= 0.0 ? -INFINITY : s * norm_quantile(b.lower[j]);
    hi[j] = b.upper[j] >= 1.0 ? INFINITY : s * norm_quantile(b.upper[j]);
  }
  auto f = [&](double x) {
    double p = norm_pdf(x);
    for (std::size_t j = 0; j < J; ++j) {
      const double m = loadings[static_cast<Eigen::Index>(j)] * x;
      p *= norm_cdf(hi[j] - m) - norm_cdf(lo[j] - m);
    }
    return p;
  };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, -12.0, 12.0, 15, 1e-13);
}

// Every elementary interval of volume 2^(t-m) holds exactly 2^t points.
// Counts boxes directly from the coordinates.
inline bool elementary_intervals_ok(const qmc::PointSet& p, unsigned m, unsigned t) {
  const std::size_t s = p.s;
  const unsigned total = m - t;
  std::vector<unsigned> d(s, 0);
  bool ok = true;
  std::function<void(std::size_t, unsigned)> visit = [&](std::size_t j, unsigned left) {
    if (!ok) return;
    if (j + 1 == s) {
      d[j] = left;
      std::vector<std::size_t> counts(std::size_t{1} << total, 0);
      for (std::size_t i = 0; i < p.n; ++i) {
        std::size_t box = 0;
        for (std::size_t k = 0; k < s; ++k)
          box = (box << d[k]) | static_cast<std::size_t>(std::ldexp(p(i, k), static_cast<int>(d[k])));
        ++counts[box];
      }
      for (auto c : counts)
        if (c != (std::size_t{1} << t)) ok = false;
      return;
    }
    for (unsigned k = 0; k <= left; ++k) {
      d[j] = k;
      visit(j + 1, left - k);
    }
  };
  visit(0, total);
  return ok;
}

}  // namespace dcop::testing
