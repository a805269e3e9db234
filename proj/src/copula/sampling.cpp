#include <cmath>
#include <numbers>
#include <stdexcept>

#include "dcop/copula.hpp"
#include "dcop/rng.hpp"
#include "dcop/special.hpp"

namespace dcop::copula {

namespace {

// Positive stable variate with Laplace transform exp(-s^alpha) (Kanter).
double positive_stable(double alpha, CounterRng& rng) {
  if (alpha >= 1.0) return 1.0;
  const double u = std::numbers::pi * rng.uniform_open();
  const double w = rng.exponential();
  const double a = std::sin(alpha * u) / std::pow(std::sin(u), 1.0 / alpha);
  const double b = std::pow(std::sin((1.0 - alpha) * u) / w, (1.0 - alpha) / alpha);
  return a * b;
}

}  // namespace

RowMatrix sample_copula(const Model& model, std::size_t n, std::size_t dim, std::uint64_t seed) {
  const auto rows = static_cast<Eigen::Index>(n);
  if (const auto* g = std::get_if<GaussianFactor>(&model)) {
    const auto J = static_cast<Eigen::Index>(g->dim());
    const auto k = static_cast<Eigen::Index>(g->factors());
    RowMatrix out(rows, J);
    Eigen::VectorXd f(k);
    for (Eigen::Index i = 0; i < rows; ++i) {
      CounterRng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
      for (Eigen::Index c = 0; c < k; ++c) f[c] = rng.normal();
      const Eigen::VectorXd z = g->loadings() * f;
      for (Eigen::Index j = 0; j < J; ++j) out(i, j) = norm_cdf((z[j] + rng.normal()) / g->scale()[j]);
    }
    return out;
  }
  if (dim == 0) throw std::invalid_argument("dimension required for Archimedean sampling");
  const auto J = static_cast<Eigen::Index>(dim);
  RowMatrix out(rows, J);
  if (const auto* c = std::get_if<Clayton>(&model)) {
    // Marshall-Olkin with Gamma(1/theta) frailty; generator u^-theta - 1.
    const double theta = c->theta();
    for (Eigen::Index i = 0; i < rows; ++i) {
      CounterRng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
      if (c->independent()) {
        for (Eigen::Index j = 0; j < J; ++j) out(i, j) = rng.uniform_open();
        continue;
      }
      const double v = rng.gamma(1.0 / theta);
      for (Eigen::Index j = 0; j < J; ++j) out(i, j) = std::exp(-std::log1p(rng.exponential() / v) / theta);
    }
    return out;
  }
  const auto& gu = std::get<Gumbel>(model);
  const double alpha = 1.0 / gu.theta();
  for (Eigen::Index i = 0; i < rows; ++i) {
    CounterRng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    const double v = positive_stable(alpha, rng);
    for (Eigen::Index j = 0; j < J; ++j) out(i, j) = std::exp(-std::pow(rng.exponential() / v, alpha));
  }
  return out;
}

}  // namespace dcop::copula
