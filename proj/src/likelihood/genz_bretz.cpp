#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "dcop/likelihood.hpp"
#include "dcop/special.hpp"

namespace dcop::lik {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kClampLo = 1e-16;
constexpr double kClampHi = 1.0 - 1e-16;

double phi_of(double limit, double shift, double diag) {
  if (limit == kInf) return 1.0;
  if (limit == -kInf) return 0.0;
  return norm_cdf((limit - shift) / diag);
}

}  // namespace

double genz_bretz(const Eigen::MatrixXd& chol, std::span<const double> a, std::span<const double> b, PointBlock points,
                  GenzBretzStats* stats) {
  const auto J = static_cast<std::size_t>(chol.rows());
  if (a.size() != J || b.size() != J) throw std::invalid_argument("limit size mismatch");
  if (J == 0) return 1.0;
  const double d1 = phi_of(a[0], 0.0, chol(0, 0));
  const double e1 = phi_of(b[0], 0.0, chol(0, 0));
  if (J == 1) {
    const double v = std::max(0.0, e1 - d1);
    if (stats) *stats = {v, 0.0, false};
    return v;
  }
  if (points.rows == 0) throw std::invalid_argument("genz_bretz needs at least one point");
  std::vector<double> y(J);
  double sum = 0.0;
  double sum_sq = 0.0;
  bool clamped = false;
  for (std::size_t i = 0; i < points.rows; ++i) {
    const double* w = points.row(i);
    double d = d1;
    double e = e1;
    double f = e1 - d1;
    for (std::size_t k = 1; k < J && f > 0.0; ++k) {
      double arg = d + w[k - 1] * (e - d);
      if (arg < kClampLo || arg > kClampHi) {
        arg = std::clamp(arg, kClampLo, kClampHi);
        clamped = true;
      }
      y[k - 1] = norm_quantile(arg);
      double s = 0.0;
      for (std::size_t q = 0; q < k; ++q) s += chol(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(q)) * y[q];
      const double c = chol(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
      d = phi_of(a[k], s, c);
      e = phi_of(b[k], s, c);
      f *= std::max(0.0, e - d);
    }
    f = std::max(0.0, f);
    sum += f;
    sum_sq += f * f;
  }
  const double M = static_cast<double>(points.rows);
  const double mean = sum / M;
  if (stats) {
    stats->mean = mean;
    stats->variance = points.rows > 1 ? std::max(0.0, (sum_sq - M * mean * mean) / (M - 1.0)) : 0.0;
    stats->clamped = clamped;
  }
  return mean;
}

double mixed_log_density(const ObservationBounds& bounds, const copula::GaussianFactor& model, PointBlock points) {
  const std::size_t J = bounds.dim();
  if (model.dim() != J) throw std::invalid_argument("model dimension mismatch");
  const Eigen::MatrixXd& sigma = model.sigma();
  const Eigen::VectorXd& scale = model.scale();

  std::vector<std::size_t> disc;
  std::vector<std::size_t> cont;
  for (std::size_t j = 0; j < J; ++j) (bounds.discrete[j] ? disc : cont).push_back(j);
  // Narrowest intervals first.
  std::stable_sort(disc.begin(), disc.end(), [&](std::size_t p, std::size_t q) {
    return bounds.upper[p] - bounds.lower[p] < bounds.upper[q] - bounds.lower[q];
  });
  const auto r = static_cast<Eigen::Index>(disc.size());
  const auto c = static_cast<Eigen::Index>(cont.size());

  double log_cont = 0.0;
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(r);
  Eigen::MatrixXd cov(r, r);
  for (Eigen::Index p = 0; p < r; ++p)
    for (Eigen::Index q = 0; q < r; ++q)
      cov(p, q) = sigma(static_cast<Eigen::Index>(disc[p]), static_cast<Eigen::Index>(disc[q]));

  if (c > 0) {
    Eigen::MatrixXd scc(c, c);
    Eigen::MatrixXd sdc(r, c);
    Eigen::VectorXd zc(c);
    for (Eigen::Index p = 0; p < c; ++p) {
      const auto jp = static_cast<Eigen::Index>(cont[p]);
      const double u = bounds.upper[cont[p]];
      if (!(u > 0.0 && u < 1.0)) throw std::domain_error("continuous margin value on the boundary");
      const double x = norm_quantile(u);
      zc[p] = scale[jp] * x;
      log_cont += std::log(scale[jp]) + bounds.log_density[cont[p]] - norm_log_pdf(x);
      for (Eigen::Index q = 0; q < c; ++q) scc(p, q) = sigma(jp, static_cast<Eigen::Index>(cont[q]));
      for (Eigen::Index q = 0; q < r; ++q) sdc(q, p) = sigma(static_cast<Eigen::Index>(disc[q]), jp);
    }
    Eigen::LLT<Eigen::MatrixXd> llt(scc);
    const Eigen::MatrixXd Lc = llt.matrixL();
    const Eigen::VectorXd alpha = Lc.triangularView<Eigen::Lower>().solve(zc);
    double log_det = 0.0;
    for (Eigen::Index p = 0; p < c; ++p) log_det += std::log(Lc(p, p));
    log_cont += -0.5 * alpha.squaredNorm() - log_det - static_cast<double>(c) * kLogSqrt2Pi;
    if (r > 0) {
      const Eigen::MatrixXd W = Lc.triangularView<Eigen::Lower>().solve(sdc.transpose());  // c x r
      mu = W.transpose() * alpha;
      cov -= W.transpose() * W;
    }
  }
  if (r == 0) return log_cont;

  std::vector<double> lo(static_cast<std::size_t>(r));
  std::vector<double> hi(static_cast<std::size_t>(r));
  for (Eigen::Index p = 0; p < r; ++p) {
    const std::size_t j = disc[static_cast<std::size_t>(p)];
    const double s = scale[static_cast<Eigen::Index>(j)];
    lo[static_cast<std::size_t>(p)] = (bounds.lower[j] <= 0.0 ? -kInf : s * norm_quantile(bounds.lower[j])) - mu[p];
    hi[static_cast<std::size_t>(p)] = (bounds.upper[j] >= 1.0 ? kInf : s * norm_quantile(bounds.upper[j])) - mu[p];
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw std::domain_error("conditional covariance is not positive definite");
  const Eigen::MatrixXd L = llt.matrixL();
  const double p = genz_bretz(L, lo, hi, points);
  return (p > 0.0 ? std::log(p) : -kInf) + log_cont;
}

}  // namespace dcop::lik
