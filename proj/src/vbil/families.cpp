#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "dcop/error.hpp"
#include "dcop/special.hpp"
#include "dcop/vbil.hpp"

namespace dcop::vbil {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMinConditionRatio = 1e-7;

// vech position of (i, j), i >= j, column-stacked.
std::size_t vech_index(std::size_t i, std::size_t j, std::size_t d) {
  return j * d - j * (j + 1) / 2 + i;
}

}  // namespace

Eigen::VectorXd vech(const Eigen::MatrixXd& a) {
  const auto d = static_cast<std::size_t>(a.rows());
  if (a.cols() != a.rows()) throw std::invalid_argument("vech needs a square matrix");
  Eigen::VectorXd v(static_cast<Eigen::Index>(d * (d + 1) / 2));
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t i = j; i < d; ++i)
      v[static_cast<Eigen::Index>(vech_index(i, j, d))] = a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return v;
}

Eigen::MatrixXd unvech(const Eigen::VectorXd& v, std::size_t d) {
  if (static_cast<std::size_t>(v.size()) != d * (d + 1) / 2) throw std::invalid_argument("vech length mismatch");
  Eigen::MatrixXd a(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t i = j; i < d; ++i) {
      const double x = v[static_cast<Eigen::Index>(vech_index(i, j, d))];
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = x;
      a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = x;
    }
  return a;
}

Eigen::MatrixXd duplication(std::size_t d) {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d * d), static_cast<Eigen::Index>(d * (d + 1) / 2));
  for (std::size_t c = 0; c < d; ++c)
    for (std::size_t r = 0; r < d; ++r)
      D(static_cast<Eigen::Index>(r + c * d), static_cast<Eigen::Index>(vech_index(std::max(r, c), std::min(r, c), d))) = 1.0;
  return D;
}

Eigen::MatrixXd duplication_pinv(std::size_t d) {
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d * (d + 1) / 2), static_cast<Eigen::Index>(d * d));
  for (std::size_t c = 0; c < d; ++c)
    for (std::size_t r = 0; r < d; ++r)
      P(static_cast<Eigen::Index>(vech_index(std::max(r, c), std::min(r, c), d)), static_cast<Eigen::Index>(r + c * d)) =
          r == c ? 1.0 : 0.5;
  return P;
}

Eigen::VectorXd Family::natural_gradient(const Eigen::VectorXd& h) const {
  const Eigen::MatrixXd F = fisher();
  Eigen::LLT<Eigen::MatrixXd> llt(F);
  if (llt.info() != Eigen::Success) throw NumericalError("Fisher information is not positive definite");
  return llt.solve(h);
}

InverseGamma::InverseGamma(double a, double b) : a_(a), b_(b) {
  if (!(a > 0.0 && b > 0.0 && std::isfinite(a) && std::isfinite(b)))
    throw ConfigError("inverse gamma parameters must be positive");
}

double InverseGamma::log_pdf(double x) const {
  if (!(x > 0.0)) return -kInf;
  return a_ * std::log(b_) - std::lgamma(a_) - (a_ + 1.0) * std::log(x) - b_ / x;
}

Eigen::Vector2d InverseGamma::score_at(double x) const {
  if (!(x > 0.0)) throw std::domain_error("inverse gamma score needs x > 0");
  return {std::log(b_) - digamma(a_) - std::log(x), a_ / b_ - 1.0 / x};
}

Eigen::Matrix2d InverseGamma::fisher_matrix() const {
  Eigen::Matrix2d F;
  F << trigamma(a_), -1.0 / b_, -1.0 / b_, a_ / (b_ * b_);
  return F;
}

double InverseGamma::sample(CounterRng& rng) const {
  const double g = rng.gamma(a_);
  return b_ / std::max(g, std::numeric_limits<double>::min());
}

double InverseGamma::mean() const { return a_ > 1.0 ? b_ / (a_ - 1.0) : kInf; }

double InverseGamma::variance() const {
  return a_ > 2.0 ? b_ * b_ / ((a_ - 1.0) * (a_ - 1.0) * (a_ - 2.0)) : kInf;
}

Eigen::VectorXd InverseGamma::params() const { return Eigen::Vector2d(a_, b_); }

bool InverseGamma::feasible(const Eigen::VectorXd& lambda) const {
  return lambda.size() == 2 && lambda[0] > 0.0 && lambda[1] > 0.0 && lambda.allFinite();
}

void InverseGamma::set_params(const Eigen::VectorXd& lambda) {
  if (!feasible(lambda)) throw NumericalError("infeasible inverse gamma parameters");
  a_ = lambda[0];
  b_ = lambda[1];
}

std::vector<double> InverseGamma::sample_eta(CounterRng& rng) const { return {std::log(sample(rng))}; }

double InverseGamma::log_q(std::span<const double> eta) const { return log_pdf(std::exp(eta[0])); }

Eigen::VectorXd InverseGamma::score(std::span<const double> eta) const { return score_at(std::exp(eta[0])); }

Gaussian::Gaussian(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma)
    : d_(static_cast<std::size_t>(mu.size())), mu_(mu), sigma_(sigma) {
  if (d_ == 0 || sigma.rows() != mu.size() || sigma.cols() != mu.size())
    throw ConfigError("Gaussian variational family needs matching mean and covariance");
  refresh();
}

void Gaussian::refresh() {
  sigma_ = 0.5 * (sigma_ + sigma_.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(sigma_);
  if (llt.info() != Eigen::Success) throw NumericalError("variational covariance is not positive definite");
  chol_ = llt.matrixL();
  precision_ = llt.solve(Eigen::MatrixXd::Identity(sigma_.rows(), sigma_.cols()));
  precision_ = 0.5 * (precision_ + precision_.transpose());
  log_det_ = 2.0 * chol_.diagonal().array().log().sum();
}

Gaussian Gaussian::from_natural(const Eigen::VectorXd& lambda, std::size_t d) {
  const std::size_t m = d * (d + 1) / 2;
  if (static_cast<std::size_t>(lambda.size()) != d + m) throw std::invalid_argument("natural parameter length mismatch");
  const Eigen::VectorXd l1 = lambda.head(static_cast<Eigen::Index>(d));
  Eigen::MatrixXd P = unvech(lambda.tail(static_cast<Eigen::Index>(m)), d);
  // lambda2 holds -P_ii / 2 on the diagonal and -P_ij below it.
  for (Eigen::Index i = 0; i < P.rows(); ++i)
    for (Eigen::Index j = 0; j < P.cols(); ++j) P(i, j) *= (i == j) ? -2.0 : -1.0;
  Eigen::LLT<Eigen::MatrixXd> llt(P);
  if (llt.info() != Eigen::Success) throw NumericalError("natural parameters give a non positive definite precision");
  const Eigen::MatrixXd sigma = llt.solve(Eigen::MatrixXd::Identity(P.rows(), P.cols()));
  return Gaussian(sigma * l1, sigma);
}

Eigen::VectorXd Gaussian::lambda1() const { return precision_ * mu_; }

Eigen::VectorXd Gaussian::lambda2() const {
  Eigen::VectorXd v = vech(precision_);
  for (std::size_t j = 0; j < d_; ++j)
    for (std::size_t i = j; i < d_; ++i) v[static_cast<Eigen::Index>(vech_index(i, j, d_))] *= (i == j) ? -0.5 : -1.0;
  return v;
}

Eigen::VectorXd Gaussian::params() const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(size()));
  out << lambda1(), lambda2();
  return out;
}

bool Gaussian::feasible(const Eigen::VectorXd& lambda) const {
  if (static_cast<std::size_t>(lambda.size()) != size() || !lambda.allFinite()) return false;
  try {
    const Gaussian g = from_natural(lambda, d_);
    // The Fisher blocks square the condition number of Sigma.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g.sigma_, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff() > kMinConditionRatio * eig.eigenvalues().maxCoeff();
  } catch (const NumericalError&) {
    return false;
  }
}

void Gaussian::set_params(const Eigen::VectorXd& lambda) { *this = from_natural(lambda, d_); }

std::vector<std::string> Gaussian::param_names() const {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < d_; ++i) names.push_back("lambda1_" + std::to_string(i + 1));
  for (std::size_t j = 0; j < d_; ++j)
    for (std::size_t i = j; i < d_; ++i) names.push_back("lambda2_" + std::to_string(i + 1) + "_" + std::to_string(j + 1));
  return names;
}

std::vector<double> Gaussian::sample_eta(CounterRng& rng) const {
  Eigen::VectorXd z(static_cast<Eigen::Index>(d_));
  for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = rng.normal();
  const Eigen::VectorXd x = mu_ + chol_ * z;
  return {x.data(), x.data() + x.size()};
}

double Gaussian::log_q(std::span<const double> eta) const {
  const Eigen::Map<const Eigen::VectorXd> x(eta.data(), static_cast<Eigen::Index>(d_));
  const Eigen::VectorXd r = x - mu_;
  return -0.5 * r.dot(precision_ * r) - 0.5 * log_det_ - static_cast<double>(d_) * kLogSqrt2Pi;
}

Eigen::VectorXd Gaussian::score(std::span<const double> eta) const {
  const Eigen::Map<const Eigen::VectorXd> x(eta.data(), static_cast<Eigen::Index>(d_));
  Eigen::VectorXd out(static_cast<Eigen::Index>(size()));
  out << x - mu_, vech(x * x.transpose() - sigma_ - mu_ * mu_.transpose());
  return out;
}

namespace {

// M = 2 D+ (mu (x) I) and S = 2 D+ (Sigma (x) Sigma) D+' assembled entrywise.
void wand_blocks(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma, Eigen::MatrixXd& M, Eigen::MatrixXd& S) {
  const auto d = static_cast<std::size_t>(mu.size());
  const std::size_t m = d * (d + 1) / 2;
  M = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d));
  S.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t i = j; i < d; ++i) {
      const auto r = static_cast<Eigen::Index>(vech_index(i, j, d));
      if (i == j) {
        M(r, static_cast<Eigen::Index>(i)) = 2.0 * mu[static_cast<Eigen::Index>(i)];
      } else {
        M(r, static_cast<Eigen::Index>(i)) += mu[static_cast<Eigen::Index>(j)];
        M(r, static_cast<Eigen::Index>(j)) += mu[static_cast<Eigen::Index>(i)];
      }
      for (std::size_t l = 0; l < d; ++l)
        for (std::size_t k = l; k < d; ++k) {
          const auto c = static_cast<Eigen::Index>(vech_index(k, l, d));
          const auto I = static_cast<Eigen::Index>(i), J = static_cast<Eigen::Index>(j);
          const auto K = static_cast<Eigen::Index>(k), L = static_cast<Eigen::Index>(l);
          S(r, c) = sigma(I, K) * sigma(J, L) + sigma(I, L) * sigma(J, K);
        }
    }
}

}  // namespace

Eigen::MatrixXd Gaussian::fisher_inverse() const {
  Eigen::MatrixXd M;
  Eigen::MatrixXd S;
  wand_blocks(mu_, sigma_, M, S);
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success) throw NumericalError("Fisher block is not positive definite");
  const Eigen::MatrixXd SinvM = llt.solve(M);
  const Eigen::MatrixXd Sinv = llt.solve(Eigen::MatrixXd::Identity(S.rows(), S.cols()));
  const auto d = static_cast<Eigen::Index>(d_);
  const auto m = S.rows();
  Eigen::MatrixXd out(d + m, d + m);
  out.topLeftCorner(d, d) = precision_ + M.transpose() * SinvM;
  out.topRightCorner(d, m) = -SinvM.transpose();
  out.bottomLeftCorner(m, d) = -SinvM;
  out.bottomRightCorner(m, m) = Sinv;
  return out;
}

Eigen::MatrixXd Gaussian::fisher() const {
  const Eigen::MatrixXd inv = fisher_inverse();
  return inv.llt().solve(Eigen::MatrixXd::Identity(inv.rows(), inv.cols()));
}

Eigen::VectorXd Gaussian::natural_gradient(const Eigen::VectorXd& h) const {
  if (static_cast<std::size_t>(h.size()) != size()) throw std::invalid_argument("gradient length mismatch");
  Eigen::MatrixXd M;
  Eigen::MatrixXd S;
  wand_blocks(mu_, sigma_, M, S);
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success) throw NumericalError("Fisher block is not positive definite");
  const auto d = static_cast<Eigen::Index>(d_);
  const Eigen::VectorXd h1 = h.head(d);
  const Eigen::VectorXd h2 = h.tail(h.size() - d);
  const Eigen::VectorXd y = llt.solve(h2 - M * h1);
  Eigen::VectorXd out(h.size());
  out << precision_ * h1 - M.transpose() * y, y;
  return out;
}

}  // namespace dcop::vbil
