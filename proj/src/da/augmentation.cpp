#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dcop/augmentation.hpp"
#include "dcop/error.hpp"
#include "dcop/rng.hpp"
#include "../parallel.hpp"

namespace dcop::da {

namespace {

constexpr double kDegenerateWidth = 1e-14;

}  // namespace

double below(double b) { return std::nextafter(b, 0.0); }

LatentMatrix initial_latent(const std::vector<lik::ObservationBounds>& data, std::uint64_t seed) {
  const std::size_t J = data.empty() ? 0 : data.front().dim();
  LatentMatrix u(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(J));
  for (std::size_t i = 0; i < data.size(); ++i) {
    CounterRng rng(derive_seed(seed, i));
    const auto& b = data[i];
    for (std::size_t j = 0; j < J; ++j) {
      double v = b.lower[j];
      if (b.discrete[j]) {
        v = b.lower[j] + (b.upper[j] - b.lower[j]) * rng.uniform();
        if (v >= b.upper[j]) v = below(b.upper[j]);
        if (v < b.lower[j]) v = b.lower[j];
      }
      u(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  }
  return u;
}

bool contained(const LatentMatrix& u, const std::vector<lik::ObservationBounds>& data) {
  for (std::size_t i = 0; i < data.size(); ++i)
    for (std::size_t j = 0; j < data[i].dim(); ++j) {
      const double v = u(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (!data[i].discrete[j]) {
        if (v != data[i].upper[j]) return false;
      } else if (!(v >= data[i].lower[j] && v < data[i].upper[j])) {
        return false;
      }
    }
  return true;
}

std::size_t margin_update(LatentMatrix& u, std::size_t j, const copula::Model& model,
                          const std::vector<lik::ObservationBounds>& data, std::uint64_t seed) {
  const auto n = static_cast<std::ptrdiff_t>(data.size());
  if (static_cast<std::size_t>(u.rows()) != data.size()) throw std::invalid_argument("latent matrix size mismatch");
  if (j >= static_cast<std::size_t>(u.cols())) throw std::out_of_range("margin index");
  const auto J = static_cast<std::size_t>(u.cols());
  std::size_t degenerate = 0;
  detail::ExceptionSlot failure;
#pragma omp parallel for schedule(dynamic, 16) reduction(+ : degenerate)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    failure.run([&] {
      const auto& b = data[static_cast<std::size_t>(i)];
      if (!b.discrete[j]) return;
      std::span<double> row(u.row(i).data(), J);
      const double A = b.lower[j] <= 0.0 ? 0.0 : copula::conditional_cdf(model, j, b.lower[j], row);
      const double B = b.upper[j] >= 1.0 ? 1.0 : copula::conditional_cdf(model, j, b.upper[j], row);
      if (!(B - A >= kDegenerateWidth)) {
        ++degenerate;
        return;
      }
      CounterRng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
      const double w = A + (B - A) * rng.uniform_open();
      double v = copula::conditional_inverse(model, j, w, row);
      if (!(v >= b.lower[j])) v = b.lower[j];
      if (!(v < b.upper[j])) v = below(b.upper[j]);
      row[j] = v;
    });
  }
  failure.rethrow();
  return degenerate;
}

double log_copula_density_sum(const copula::Model& model, const LatentMatrix& u) {
  const auto n = static_cast<std::ptrdiff_t>(u.rows());
  const auto J = static_cast<std::size_t>(u.cols());
  std::vector<double> terms(static_cast<std::size_t>(n));
  detail::ExceptionSlot failure;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    failure.run([&] { terms[static_cast<std::size_t>(i)] = copula::log_density(model, {u.row(i).data(), J}); });
  failure.rethrow();
  return lik::sum_log_terms(terms);
}

LatentTarget::LatentTarget(const LatentMatrix& u, copula::Parameterization param, copula::PriorSpec prior)
    : u_(&u), param_(std::move(param)), prior_(std::move(prior)) {}

double LatentTarget::log_likelihood(std::span<const double> eta, const lik::AuxStream*) const {
  if (u_->rows() == 0) return 0.0;
  return log_copula_density_sum(param_.model(eta), *u_);
}

DAResult run(const std::vector<lik::ObservationBounds>& data, const copula::Parameterization& param,
             const copula::PriorSpec& prior, std::span<const double> eta0, const DAConfig& config) {
  if (config.thin == 0) throw ConfigError("thin must be positive");
  if (config.burn_in > config.iterations) throw ConfigError("burn_in exceeds iterations");
  DAResult result;
  const std::size_t J = param.dim();
  if (J > kDimensionWarning)
    result.warnings.push_back("data augmentation above " + std::to_string(kDimensionWarning) +
                              " margins is slow; each sweep costs n x J conditional inversions");
  for (const auto& b : data)
    if (b.dim() != J) throw DataError("observation dimension does not match the model");

  LatentMatrix u = initial_latent(data, derive_seed(config.seed, 0xda));
  LatentTarget target(u, param, prior);
  pm::PMConfig cfg;
  cfg.iterations = config.iterations;
  cfg.burn_in = config.burn_in;
  cfg.thin = config.thin;
  cfg.garthwaite = config.garthwaite;
  cfg.seed = derive_seed(config.seed, 1);
  const pm::Sampler sampler(target, cfg);
  pm::AdaptiveProposal proposal(target.size(), config.garthwaite);
  pm::ChainState state = sampler.initial(eta0);

  pm::ChainOutput& out = result.chain;
  out.names = target.names();
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t it = 0; it < config.iterations; ++it) {
    if (it == config.burn_in) proposal.freeze();
    const copula::Model model = param.model(state.eta);
    for (std::size_t j = 0; j < J && !data.empty(); ++j)
      result.degenerate += margin_update(u, j, model, data, derive_seed(config.seed, it + 2, j));
    state.log_like = target.log_likelihood(state.eta, nullptr);
    double alpha = 0.0;
    bool accepted = false;
    state = sampler.step(state, it, proposal, &alpha, &accepted);
    proposal.observe(state.eta, alpha);
    ++out.total_steps;
    out.total_accepted += accepted ? 1 : 0;
    if (it >= config.burn_in && (it - config.burn_in) % config.thin == 0) {
      out.iteration.push_back(it);
      out.draws.push_back(target.natural(state.eta));
      out.log_like.push_back(state.log_like);
      out.accepted.push_back(accepted ? 1 : 0);
    }
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (result.degenerate > 0)
    result.warnings.push_back(std::to_string(result.degenerate) + " degenerate latent slices were kept unchanged");
  return result;
}

}  // namespace dcop::da
