#include <cmath>
#include <stdexcept>
#include <string>

#include "dcop/copula.hpp"
#include "dcop/error.hpp"
#include "dcop/special.hpp"

namespace dcop::copula {

void check_loadings(const Eigen::MatrixXd& B) {
  const auto J = B.rows();
  const auto k = B.cols();
  if (J < 1) throw ConfigError("loading matrix needs at least one row");
  if (k > J) throw ConfigError("more factors than margins");
  if (!B.allFinite()) throw ConfigError("loading matrix has non-finite entries");
  for (Eigen::Index i = 0; i < k; ++i) {
    if (!(B(i, i) > 0.0)) throw ConfigError("loading diagonal B(" + std::to_string(i) + "," + std::to_string(i) + ") must be positive");
    for (Eigen::Index c = i + 1; c < k; ++c)
      if (B(i, c) != 0.0) throw ConfigError("loading matrix must be lower triangular in its top rows");
  }
}

SigmaFactor gaussian_sigma(const Eigen::MatrixXd& B) {
  SigmaFactor out;
  const auto J = B.rows();
  out.sigma = B * B.transpose() + Eigen::MatrixXd::Identity(J, J);
  Eigen::LLT<Eigen::MatrixXd> llt(out.sigma);
  out.chol = llt.matrixL();
  return out;
}

GaussianFactor::GaussianFactor(Eigen::MatrixXd loadings) : loadings_(std::move(loadings)) {
  check_loadings(loadings_);
  auto sf = gaussian_sigma(loadings_);
  sigma_ = std::move(sf.sigma);
  chol_ = std::move(sf.chol);
  const auto J = sigma_.rows();
  precision_ = chol_.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(J, J));
  precision_ = precision_.transpose() * precision_;
  precision_ = 0.5 * (precision_ + precision_.transpose());
  scale_ = sigma_.diagonal().cwiseSqrt();
  // Copula density uses the correlation matrix R = D^-1 Sigma D^-1.
  const Eigen::MatrixXd Dm = scale_.asDiagonal();
  const Eigen::MatrixXd R_inv = Dm * precision_ * Dm;
  corr_inv_minus_identity_ = R_inv - Eigen::MatrixXd::Identity(J, J);
  double log_det_sigma = 0.0;
  for (Eigen::Index j = 0; j < J; ++j) log_det_sigma += 2.0 * std::log(chol_(j, j));
  log_det_corr_ = log_det_sigma - 2.0 * scale_.array().log().sum();
}

GaussianFactor GaussianFactor::independence(std::size_t dim) {
  return GaussianFactor(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), 0));
}

double GaussianFactor::log_density(std::span<const double> u, bool* flagged) const {
  const auto J = static_cast<std::size_t>(sigma_.rows());
  if (u.size() != J) throw std::invalid_argument("dimension mismatch");
  Eigen::VectorXd x(J);
  for (std::size_t j = 0; j < J; ++j) {
    double v = u[j];
    if (!(v > 0.0) || !(v < 1.0)) {
      if (flagged) *flagged = true;
      v = v > 0.0 ? 1.0 - 0x1.0p-53 : std::numeric_limits<double>::min();
    }
    x[static_cast<Eigen::Index>(j)] = norm_quantile(v);
  }
  return -0.5 * log_det_corr_ - 0.5 * x.dot(corr_inv_minus_identity_ * x);
}

double GaussianFactor::density(std::span<const double> u, bool* flagged) const {
  return std::exp(log_density(u, flagged));
}

void GaussianFactor::conditional_moments(std::size_t j, std::span<const double> z, double& mean, double& sd) const {
  const auto jj = static_cast<Eigen::Index>(j);
  const double q = precision_(jj, jj);
  double acc = 0.0;
  for (Eigen::Index r = 0; r < precision_.cols(); ++r)
    if (r != jj) acc += precision_(jj, r) * z[static_cast<std::size_t>(r)];
  mean = -acc / q;
  sd = 1.0 / std::sqrt(q);
}

namespace {

std::vector<double> latent(const GaussianFactor& g, std::size_t j, std::span<const double> u) {
  std::vector<double> z(u.size());
  for (std::size_t r = 0; r < u.size(); ++r)
    z[r] = r == j ? 0.0 : g.scale()[static_cast<Eigen::Index>(r)] * norm_quantile(u[r]);
  return z;
}

}  // namespace

double GaussianFactor::conditional_cdf(std::size_t j, double v, std::span<const double> u) const {
  if (j >= dim()) throw std::out_of_range("margin index");
  if (!(v > 0.0)) return 0.0;
  if (v >= 1.0) return 1.0;
  const auto z = latent(*this, j, u);
  double mean = 0.0;
  double sd = 1.0;
  conditional_moments(j, z, mean, sd);
  const double zj = scale_[static_cast<Eigen::Index>(j)] * norm_quantile(v);
  return norm_cdf((zj - mean) / sd);
}

double GaussianFactor::conditional_inverse(std::size_t j, double w, std::span<const double> u) const {
  if (j >= dim()) throw std::out_of_range("margin index");
  if (!(w > 0.0)) return 0.0;
  if (w >= 1.0) return 1.0;
  const auto z = latent(*this, j, u);
  double mean = 0.0;
  double sd = 1.0;
  conditional_moments(j, z, mean, sd);
  const double zj = mean + sd * norm_quantile(w);
  return norm_cdf(zj / scale_[static_cast<Eigen::Index>(j)]);
}

}  // namespace dcop::copula
