#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dcop/pm.hpp"

namespace dcop::pm {

double accept_probability(double log_like, double log_prior, double proposed_log_like, double proposed_log_prior,
                          double log_q_ratio) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (proposed_log_like == kNegInf || proposed_log_prior == kNegInf) return 0.0;
  if (std::isnan(proposed_log_like) || std::isnan(proposed_log_prior)) return 0.0;
  if (log_like == kNegInf || log_prior == kNegInf) return 1.0;
  const double delta = (proposed_log_like - log_like) + (proposed_log_prior - log_prior) + log_q_ratio;
  if (delta >= 0.0) return 1.0;
  return std::exp(delta);
}

double GarthwaiteScale::update(double accept_prob) {
  constexpr double kGain = 1.0 / (kTarget * (1.0 - kTarget));
  ++count_;
  const double step = kGain * (accept_prob - kTarget) / static_cast<double>(count_ + 10);
  scale_ *= std::exp(step);
  return step;
}

AdaptiveProposal::AdaptiveProposal(std::size_t dim, bool garthwaite)
    : dim_(dim), garthwaite_(garthwaite), mean_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim))),
      m2_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim))) {
  if (dim == 0) throw std::invalid_argument("proposal dimension must be positive");
}

Eigen::MatrixXd AdaptiveProposal::covariance() const {
  if (count_ < 2) return Eigen::MatrixXd::Zero(m2_.rows(), m2_.cols());
  return m2_ / static_cast<double>(count_ - 1);
}

bool AdaptiveProposal::adapted() const { return count_ >= kWarmup && chol_.size() > 0; }

void AdaptiveProposal::observe(std::span<const double> state, double accept_prob) {
  if (frozen_) return;
  if (state.size() != dim_) throw std::invalid_argument("state dimension mismatch");
  const Eigen::Map<const Eigen::VectorXd> x(state.data(), static_cast<Eigen::Index>(dim_));
  ++count_;
  const Eigen::VectorXd delta = x - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_ += delta * (x - mean_).transpose();
  if (garthwaite_) scale_.update(accept_prob);
  if (count_ >= kWarmup) {
    const Eigen::MatrixXd cov = covariance();
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    const bool ok = llt.info() == Eigen::Success && cov.trace() > 1e-300;
    if (ok) {
      chol_ = llt.matrixL();
      if (!chol_.allFinite() || (chol_.diagonal().array() <= 0.0).any()) chol_.resize(0, 0);
    } else {
      chol_.resize(0, 0);
    }
  }
}

std::vector<double> AdaptiveProposal::propose(std::span<const double> current, CounterRng& rng) const {
  if (current.size() != dim_) throw std::invalid_argument("state dimension mismatch");
  const double d = static_cast<double>(dim_);
  const double s = scale();
  Eigen::VectorXd z(static_cast<Eigen::Index>(dim_));
  const bool fixed = !adapted() || rng.uniform() < kFixedWeight;
  for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = rng.normal();
  Eigen::VectorXd step;
  if (fixed)
    step = (s * kFixedSd / std::sqrt(d)) * z;
  else
    step = (s * kAdaptedScale / std::sqrt(d)) * (chol_ * z);
  std::vector<double> out(current.begin(), current.end());
  for (std::size_t k = 0; k < dim_; ++k) out[k] += step[static_cast<Eigen::Index>(k)];
  return out;
}

}  // namespace dcop::pm
