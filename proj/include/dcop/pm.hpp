#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dcop/copula.hpp"
#include "dcop/likelihood.hpp"
#include "dcop/qmc.hpp"
#include "dcop/rng.hpp"

namespace dcop::pm {

// Posterior on an unconstrained parameter eta. log_prior includes the
// log Jacobian of eta -> natural parameters.
class Target {
 public:
  virtual ~Target() = default;

  virtual std::size_t size() const = 0;
  virtual std::vector<std::string> names() const = 0;
  virtual std::vector<double> natural(std::span<const double> eta) const = 0;
  virtual std::vector<double> eta(std::span<const double> natural) const = 0;
  virtual double log_prior(std::span<const double> eta) const = 0;
  virtual double log_jacobian(std::span<const double> eta) const = 0;

  // nullopt when the likelihood is exact and needs no auxiliary draws.
  virtual std::optional<lik::AuxStream> make_aux(lik::StreamKind kind, std::size_t points, std::uint64_t seed,
                                                 bool normals) const = 0;
  virtual double log_likelihood(std::span<const double> eta, const lik::AuxStream* aux) const = 0;
};

class CopulaTarget final : public Target {
 public:
  CopulaTarget(const lik::Likelihood& likelihood, copula::Parameterization param, copula::PriorSpec prior,
               bool serial = false);

  std::size_t size() const override { return param_.size(); }
  std::vector<std::string> names() const override { return param_.names(); }
  std::vector<double> natural(std::span<const double> eta) const override { return param_.natural(eta); }
  std::vector<double> eta(std::span<const double> natural) const override { return param_.eta(natural); }
  double log_prior(std::span<const double> eta) const override { return param_.log_prior(prior_, eta); }
  double log_jacobian(std::span<const double> eta) const override { return param_.log_jacobian(eta); }
  std::optional<lik::AuxStream> make_aux(lik::StreamKind kind, std::size_t points, std::uint64_t seed,
                                         bool normals) const override;
  double log_likelihood(std::span<const double> eta, const lik::AuxStream* aux) const override;

  lik::LikelihoodEstimate estimate(std::span<const double> eta, const lik::AuxStream& aux) const;
  const lik::Likelihood& likelihood() const { return *likelihood_; }
  const copula::Parameterization& parameterization() const { return param_; }
  const copula::PriorSpec& prior() const { return prior_; }

 private:
  const lik::Likelihood* likelihood_;
  copula::Parameterization param_;
  copula::PriorSpec prior_;
  bool serial_;
};

// Exact log-likelihood and log prior given as callables on the natural
// parameters. With log_scale, eta = log(natural) and the prior picks up the
// Jacobian. Used for conjugate checks.
class FunctionTarget final : public Target {
 public:
  using Fn = std::function<double(std::span<const double>)>;
  FunctionTarget(std::vector<std::string> names, Fn log_likelihood, Fn log_prior, bool log_scale = false);

  std::size_t size() const override { return names_.size(); }
  std::vector<std::string> names() const override { return names_; }
  std::vector<double> natural(std::span<const double> eta) const override;
  std::vector<double> eta(std::span<const double> natural) const override;
  double log_prior(std::span<const double> eta) const override;
  double log_jacobian(std::span<const double> eta) const override;
  std::optional<lik::AuxStream> make_aux(lik::StreamKind, std::size_t, std::uint64_t, bool) const override {
    return std::nullopt;
  }
  double log_likelihood(std::span<const double> eta, const lik::AuxStream*) const override;

 private:
  std::vector<std::string> names_;
  Fn log_lik_;
  Fn log_prior_;
  bool log_scale_;
};

enum class Variant { Standard, CorrelatedMC, CorrelatedRQMC, Block };

const char* variant_name(Variant v);
Variant parse_variant(const std::string& name);

struct PMConfig {
  Variant variant = Variant::Standard;
  double phi = 0.99;                        // correlated MC
  qmc::CorrDepth depth{4};                  // correlated RQMC
  double refresh_probability = 0.05;        // correlated RQMC, >= 0.01
  std::size_t blocks = 100;                 // block PM
  std::size_t points = 64;
  lik::StreamKind stream = lik::StreamKind::RQMC;
  std::size_t iterations = 1000;
  std::size_t burn_in = 0;
  std::size_t thin = 1;
  bool garthwaite = false;
  std::uint64_t seed = 1;

  bool normals() const { return variant == Variant::CorrelatedMC; }
  void validate(std::size_t n_obs) const;
};

struct ChainState {
  std::vector<double> eta;
  std::optional<lik::AuxStream> aux;
  double log_like = 0.0;
  double log_prior = 0.0;
};

double accept_probability(double log_like, double log_prior, double proposed_log_like, double proposed_log_prior,
                          double log_q_ratio = 0.0);

// Robbins-Monro scale on the log scale, targeting acceptance 0.44.
class GarthwaiteScale {
 public:
  static constexpr double kTarget = 0.44;

  double scale() const { return scale_; }
  // Returns the change applied to log scale.
  double update(double accept_prob);
  std::size_t updates() const { return count_; }

 private:
  double scale_ = 1.0;
  std::size_t count_ = 0;
};

// Random-walk proposal: fixed N(0, 0.1^2 I/d) for the first 100 draws, then a
// 0.05 / 0.95 mixture with the adapted 2.38^2 Sigma / d component.
class AdaptiveProposal {
 public:
  static constexpr std::size_t kWarmup = 100;
  static constexpr double kFixedSd = 0.1;
  static constexpr double kFixedWeight = 0.05;
  static constexpr double kAdaptedScale = 2.38;

  explicit AdaptiveProposal(std::size_t dim, bool garthwaite = false);

  std::vector<double> propose(std::span<const double> current, CounterRng& rng) const;
  // Records the chain state after step j and the step's acceptance probability.
  void observe(std::span<const double> state, double accept_prob);
  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

  std::size_t iteration() const { return count_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  Eigen::MatrixXd covariance() const;
  double scale() const { return garthwaite_ ? scale_.scale() : 1.0; }
  // True once the adapted component is in use.
  bool adapted() const;

 private:
  std::size_t dim_;
  bool garthwaite_;
  bool frozen_ = false;
  std::size_t count_ = 0;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd m2_;
  Eigen::MatrixXd chol_;  // Cholesky of the adapted covariance, empty if degenerate
  GarthwaiteScale scale_;
};

// Aux proposal u -> u' for a variant. *block receives the refreshed block
// index for block PM.
lik::AuxStream propose_aux(const lik::AuxStream& aux, const PMConfig& config, std::uint64_t seed,
                           std::size_t* block = nullptr);

struct ChainOutput {
  std::vector<std::string> names;
  std::vector<std::size_t> iteration;           // kept draws
  std::vector<std::vector<double>> draws;       // natural scale, kept draws
  std::vector<double> log_like;
  std::vector<std::uint8_t> accepted;
  std::size_t total_accepted = 0;
  std::size_t total_steps = 0;
  std::size_t regenerated = 0;                  // aux capsules rebuilt over all steps
  double seconds = 0.0;                         // sampling loop only
  std::size_t points = 0;

  double acceptance_rate() const;
  std::vector<double> column(std::size_t k) const;
  double mean(std::size_t k) const;
  double sd(std::size_t k) const;
};

class Sampler {
 public:
  Sampler(const Target& target, PMConfig config);

  const PMConfig& config() const { return config_; }
  ChainState initial(std::span<const double> eta) const;
  // Step j from state; proposal adaptation is the caller's responsibility.
  ChainState step(const ChainState& state, std::size_t j, const AdaptiveProposal& proposal,
                  double* accept_prob = nullptr, bool* accepted = nullptr, std::size_t* regenerated = nullptr) const;
  ChainOutput run(std::span<const double> eta0,
                  const std::function<void(std::size_t, const ChainState&, bool)>& on_step = {}) const;

 private:
  const Target& target_;
  PMConfig config_;
};

enum class TuningPolicy { Formula, UnitVariance };

struct TuningConfig {
  std::size_t min_points = 1;
  std::size_t max_points = 4096;
  std::size_t pairs = 50;
  TuningPolicy policy = TuningPolicy::Formula;
  bool block_analytic = true;
  std::uint64_t seed = 7;
};

struct TuningCell {
  std::size_t points = 0;
  double variance = 0.0;
  double rho = 0.0;
  double sigma2_opt = 0.0;
};

struct TuningReport {
  double rho = 0.0;
  double sigma2_opt = 0.0;
  std::size_t points = 0;
  std::vector<double> theta_bar;
  std::vector<TuningCell> cells;
  bool clamped = false;
  bool satisfied = true;
  std::vector<std::string> warnings;
};

double optimal_variance(double rho, TuningPolicy policy = TuningPolicy::Formula);

// Sample correlation of paired estimates (log L(theta, u), log L(theta, u'))
// under the config's aux proposal at config.points.
std::vector<std::pair<double, double>> paired_estimates(const Target& target, std::span<const double> eta,
                                                        const PMConfig& config, std::size_t pairs,
                                                        std::uint64_t seed);
double pearson(std::span<const std::pair<double, double>> pairs);

TuningReport tune_points(const Target& target, std::span<const double> eta_bar, const PMConfig& variant,
                         const TuningConfig& tuning);

}  // namespace dcop::pm
