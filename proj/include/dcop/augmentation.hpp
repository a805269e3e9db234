#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dcop/copula.hpp"
#include "dcop/likelihood.hpp"
#include "dcop/pm.hpp"

namespace dcop::da {

// n x J latent uniforms; row i stays inside [lower_i, upper_i).
using LatentMatrix = copula::RowMatrix;

LatentMatrix initial_latent(const std::vector<lik::ObservationBounds>& data, std::uint64_t seed);

// Largest double strictly below b (b itself when the slice is a point).
double below(double b);

// Exact containment check for every entry.
bool contained(const LatentMatrix& u, const std::vector<lik::ObservationBounds>& data);

// Redraws column j from its constrained full conditional. Continuous
// margins are left alone. Returns the number of degenerate slices kept.
std::size_t margin_update(LatentMatrix& u, std::size_t j, const copula::Model& model,
                          const std::vector<lik::ObservationBounds>& data, std::uint64_t seed);

// sum_i log c(u_i; model)
double log_copula_density_sum(const copula::Model& model, const LatentMatrix& u);

// p(theta | u) as a target with an exact likelihood.
class LatentTarget final : public pm::Target {
 public:
  LatentTarget(const LatentMatrix& u, copula::Parameterization param, copula::PriorSpec prior);

  std::size_t size() const override { return param_.size(); }
  std::vector<std::string> names() const override { return param_.names(); }
  std::vector<double> natural(std::span<const double> eta) const override { return param_.natural(eta); }
  std::vector<double> eta(std::span<const double> natural) const override { return param_.eta(natural); }
  double log_prior(std::span<const double> eta) const override { return param_.log_prior(prior_, eta); }
  double log_jacobian(std::span<const double> eta) const override { return param_.log_jacobian(eta); }
  std::optional<lik::AuxStream> make_aux(lik::StreamKind, std::size_t, std::uint64_t, bool) const override {
    return std::nullopt;
  }
  double log_likelihood(std::span<const double> eta, const lik::AuxStream*) const override;

 private:
  const LatentMatrix* u_;
  copula::Parameterization param_;
  copula::PriorSpec prior_;
};

struct DAConfig {
  std::size_t iterations = 1000;
  std::size_t burn_in = 0;
  std::size_t thin = 1;
  bool garthwaite = false;
  std::uint64_t seed = 1;
};

struct DAResult {
  pm::ChainOutput chain;
  std::size_t degenerate = 0;
  std::vector<std::string> warnings;
};

inline constexpr std::size_t kDimensionWarning = 25;

DAResult run(const std::vector<lik::ObservationBounds>& data, const copula::Parameterization& param,
             const copula::PriorSpec& prior, std::span<const double> eta0, const DAConfig& config);

}  // namespace dcop::da
