#include <cmath>
#include <limits>
#include <stdexcept>

#include "dcop/error.hpp"
#include "dcop/pm.hpp"

namespace dcop::pm {

CopulaTarget::CopulaTarget(const lik::Likelihood& likelihood, copula::Parameterization param,
                           copula::PriorSpec prior, bool serial)
    : likelihood_(&likelihood), param_(std::move(param)), prior_(std::move(prior)), serial_(serial) {
  if (param_.family() != likelihood.family()) throw ConfigError("parameterization and likelihood disagree on the family");
  if (param_.dim() != likelihood.dim()) throw ConfigError("parameterization and data disagree on the dimension");
  copula::check_prior(param_.family(), prior_);
}

std::optional<lik::AuxStream> CopulaTarget::make_aux(lik::StreamKind kind, std::size_t points, std::uint64_t seed,
                                                     bool normals) const {
  return likelihood_->make_aux(kind, points, seed, normals);
}

lik::LikelihoodEstimate CopulaTarget::estimate(std::span<const double> eta, const lik::AuxStream& aux) const {
  const copula::Model model = param_.model(eta);
  return serial_ ? likelihood_->evaluate_serial(model, aux) : likelihood_->evaluate(model, aux);
}

double CopulaTarget::log_likelihood(std::span<const double> eta, const lik::AuxStream* aux) const {
  if (!aux) throw std::invalid_argument("copula likelihood needs an aux stream");
  return estimate(eta, *aux).log_total;
}

FunctionTarget::FunctionTarget(std::vector<std::string> names, Fn log_likelihood, Fn log_prior, bool log_scale)
    : names_(std::move(names)), log_lik_(std::move(log_likelihood)), log_prior_(std::move(log_prior)),
      log_scale_(log_scale) {
  if (names_.empty()) throw std::invalid_argument("target needs at least one parameter");
}

std::vector<double> FunctionTarget::natural(std::span<const double> eta) const {
  std::vector<double> x(eta.begin(), eta.end());
  if (log_scale_)
    for (double& v : x) v = std::exp(v);
  return x;
}

std::vector<double> FunctionTarget::eta(std::span<const double> natural) const {
  std::vector<double> x(natural.begin(), natural.end());
  if (log_scale_)
    for (double& v : x) v = std::log(v);
  return x;
}

double FunctionTarget::log_jacobian(std::span<const double> eta) const {
  if (!log_scale_) return 0.0;
  double s = 0.0;
  for (double v : eta) s += v;
  return s;
}

double FunctionTarget::log_prior(std::span<const double> eta) const {
  return log_prior_(natural(eta)) + log_jacobian(eta);
}

double FunctionTarget::log_likelihood(std::span<const double> eta, const lik::AuxStream*) const {
  return log_lik_(natural(eta));
}

}  // namespace dcop::pm
