#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "dcop/copula.hpp"
#include "dcop/error.hpp"
#include "dcop/special.hpp"

namespace dcop::copula {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::string_view family_name(Family f) {
  switch (f) {
    case Family::Clayton: return "clayton";
    case Family::Gumbel: return "gumbel";
    case Family::Gaussian: return "gaussian";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  if (name == "clayton") return Family::Clayton;
  if (name == "gumbel") return Family::Gumbel;
  if (name == "gaussian") return Family::Gaussian;
  throw ConfigError("unknown copula family '" + std::string(name) + "'");
}

Family family_of(const Model& model) {
  switch (model.index()) {
    case 0: return Family::Clayton;
    case 1: return Family::Gumbel;
    default: return Family::Gaussian;
  }
}

double log_density(const Model& model, std::span<const double> u, bool* flagged) {
  return std::visit([&](const auto& m) { return m.log_density(u, flagged); }, model);
}

double conditional_cdf(const Model& model, std::size_t j, double v, std::span<const double> u) {
  return std::visit([&](const auto& m) { return m.conditional_cdf(j, v, u); }, model);
}

double conditional_inverse(const Model& model, std::size_t j, double w, std::span<const double> u) {
  return std::visit([&](const auto& m) { return m.conditional_inverse(j, w, u); }, model);
}

// ------------------------------------------------------------------ priors

PriorSpec default_prior(Family family) {
  if (family == Family::Gaussian) return NormalLoadingsPrior{};
  return InverseGammaPrior{};
}

void check_prior(Family family, const PriorSpec& prior) {
  if (const auto* ig = std::get_if<InverseGammaPrior>(&prior)) {
    if (family == Family::Gaussian) throw ConfigError("inverse-gamma prior does not apply to the Gaussian family");
    if (!(ig->alpha > 0.0) || !(ig->beta > 0.0) || !std::isfinite(ig->alpha) || !std::isfinite(ig->beta))
      throw ConfigError("inverse-gamma prior needs finite alpha, beta > 0");
  } else if (const auto* un = std::get_if<UniformPrior>(&prior)) {
    if (family == Family::Gaussian) throw ConfigError("uniform prior does not apply to the Gaussian family");
    if (!(un->lo < un->hi) || !std::isfinite(un->lo) || !std::isfinite(un->hi))
      throw ConfigError("uniform prior needs finite lo < hi");
    if (family == Family::Clayton && un->lo < 0.0) throw ConfigError("Clayton uniform prior must lie in [0, inf)");
    if (family == Family::Gumbel && un->lo < 1.0) throw ConfigError("Gumbel uniform prior must lie in [1, inf)");
  } else {
    const auto& nl = std::get<NormalLoadingsPrior>(prior);
    if (family != Family::Gaussian) throw ConfigError("normal loadings prior applies only to the Gaussian family");
    if (!(nl.variance > 0.0) || !std::isfinite(nl.variance) || !std::isfinite(nl.mean))
      throw ConfigError("normal prior needs a finite mean and positive variance");
  }
}

double inverse_gamma_log_pdf(double x, double alpha, double beta) {
  if (!(x > 0.0)) return -kInf;
  return alpha * std::log(beta) - std::lgamma(alpha) - (alpha + 1.0) * std::log(x) - beta / x;
}

// -------------------------------------------------------- parameterization

Parameterization::Parameterization(Family family, std::size_t dim, std::size_t factors)
    : family_(family), dim_(dim), factors_(family == Family::Gaussian ? factors : 0) {
  if (dim == 0) throw ConfigError("copula dimension must be positive");
  if (family != Family::Gaussian) {
    size_ = 1;
    diag_mask_ = {false};
    return;
  }
  if (factors_ > dim_) throw ConfigError("more factors than margins");
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t c = 0; c < factors_ && c <= i; ++c) {
      cells_.emplace_back(i, c);
      diag_mask_.push_back(i == c);
    }
  size_ = cells_.size();
}

std::vector<std::string> Parameterization::names() const {
  if (family_ != Family::Gaussian) return {"theta"};
  std::vector<std::string> out;
  for (const auto& [i, c] : cells_) out.push_back("b_" + std::to_string(i + 1) + "_" + std::to_string(c + 1));
  return out;
}

std::vector<double> Parameterization::natural(std::span<const double> eta) const {
  if (eta.size() != size_) throw std::invalid_argument("parameter size mismatch");
  std::vector<double> out(eta.begin(), eta.end());
  switch (family_) {
    case Family::Clayton: out[0] = std::exp(eta[0]); break;
    case Family::Gumbel: out[0] = 1.0 + std::exp(eta[0]); break;
    case Family::Gaussian:
      for (std::size_t q = 0; q < size_; ++q)
        if (diag_mask_[q]) out[q] = std::exp(eta[q]);
      break;
  }
  return out;
}

std::vector<double> Parameterization::eta(std::span<const double> nat) const {
  if (nat.size() != size_) throw std::invalid_argument("parameter size mismatch");
  std::vector<double> out(nat.begin(), nat.end());
  switch (family_) {
    case Family::Clayton:
      if (!(nat[0] > 0.0)) throw std::domain_error("Clayton theta must be positive");
      out[0] = std::log(nat[0]);
      break;
    case Family::Gumbel:
      if (!(nat[0] > 1.0)) throw std::domain_error("Gumbel theta must exceed 1 on the sampling scale");
      out[0] = std::log(nat[0] - 1.0);
      break;
    case Family::Gaussian:
      for (std::size_t q = 0; q < size_; ++q)
        if (diag_mask_[q]) {
          if (!(nat[q] > 0.0)) throw std::domain_error("loading diagonal must be positive");
          out[q] = std::log(nat[q]);
        }
      break;
  }
  return out;
}

Eigen::MatrixXd Parameterization::loadings(std::span<const double> nat) const {
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(factors_));
  for (std::size_t q = 0; q < cells_.size(); ++q)
    B(static_cast<Eigen::Index>(cells_[q].first), static_cast<Eigen::Index>(cells_[q].second)) = nat[q];
  return B;
}

Model Parameterization::model(std::span<const double> eta_values) const { return model_natural(natural(eta_values)); }

Model Parameterization::model_natural(std::span<const double> nat) const {
  if (nat.size() != size_) throw std::invalid_argument("parameter size mismatch");
  switch (family_) {
    case Family::Clayton: return Clayton(nat[0]);
    case Family::Gumbel: return Gumbel(nat[0], dim_);
    case Family::Gaussian: break;
  }
  return GaussianFactor(loadings(nat));
}

std::vector<double> Parameterization::eta_of(const Model& m) const {
  if (family_of(m) != family_) throw std::invalid_argument("model family mismatch");
  std::vector<double> nat;
  if (const auto* c = std::get_if<Clayton>(&m)) {
    nat = {c->theta()};
  } else if (const auto* g = std::get_if<Gumbel>(&m)) {
    nat = {g->theta()};
  } else {
    const auto& B = std::get<GaussianFactor>(m).loadings();
    if (static_cast<std::size_t>(B.rows()) != dim_ || static_cast<std::size_t>(B.cols()) != factors_)
      throw std::invalid_argument("loading matrix shape mismatch");
    for (const auto& [i, c] : cells_) nat.push_back(B(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)));
  }
  return eta(nat);
}

double Parameterization::log_jacobian(std::span<const double> eta_values) const {
  if (family_ != Family::Gaussian) return eta_values[0];
  double s = 0.0;
  for (std::size_t q = 0; q < size_; ++q)
    if (diag_mask_[q]) s += eta_values[q];
  return s;
}

double Parameterization::log_prior_natural(const PriorSpec& prior, std::span<const double> nat) const {
  if (const auto* ig = std::get_if<InverseGammaPrior>(&prior)) {
    const double x = family_ == Family::Gumbel ? nat[0] - 1.0 : nat[0];
    return inverse_gamma_log_pdf(x, ig->alpha, ig->beta);
  }
  if (const auto* un = std::get_if<UniformPrior>(&prior)) {
    if (nat[0] < un->lo || nat[0] > un->hi) return -kInf;
    return -std::log(un->hi - un->lo);
  }
  const auto& nl = std::get<NormalLoadingsPrior>(prior);
  const double sd = std::sqrt(nl.variance);
  double s = 0.0;
  for (std::size_t q = 0; q < size_; ++q) {
    const double z = (nat[q] - nl.mean) / sd;
    s += norm_log_pdf(z) - std::log(sd);
    if (diag_mask_[q]) {
      if (!(nat[q] > 0.0)) return -kInf;
      s -= std::log(norm_cdf(nl.mean / sd));
    }
  }
  return s;
}

double Parameterization::log_prior(const PriorSpec& prior, std::span<const double> eta_values) const {
  const auto nat = natural(eta_values);
  return log_prior_natural(prior, nat) + log_jacobian(eta_values);
}

}  // namespace dcop::copula
