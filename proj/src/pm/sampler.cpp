#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "dcop/error.hpp"
#include "dcop/pm.hpp"

namespace dcop::pm {

namespace {

enum StepTag : std::uint64_t { kProposalTag = 1, kAuxTag = 2, kBlockTag = 3, kAcceptTag = 4, kRefreshTag = 5 };
constexpr std::uint64_t kInitialTag = ~std::uint64_t{0};

double safe_log_likelihood(const Target& target, std::span<const double> eta, const lik::AuxStream* aux,
                           bool* failed) {
  try {
    return target.log_likelihood(eta, aux);
  } catch (const NumericalError&) {
    if (failed) *failed = true;
    return -std::numeric_limits<double>::infinity();
  }
}

bool all_finite(std::span<const double> x) {
  for (double v : x)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::Standard: return "standard";
    case Variant::CorrelatedMC: return "correlated-mc";
    case Variant::CorrelatedRQMC: return "correlated-rqmc";
    case Variant::Block: return "block";
  }
  return "unknown";
}

Variant parse_variant(const std::string& name) {
  if (name == "standard") return Variant::Standard;
  if (name == "correlated-mc") return Variant::CorrelatedMC;
  if (name == "correlated-rqmc") return Variant::CorrelatedRQMC;
  if (name == "block") return Variant::Block;
  throw ConfigError("unknown sampler variant '" + name + "'");
}

void PMConfig::validate(std::size_t n_obs) const {
  if (points == 0) throw ConfigError("points must be positive");
  if (thin == 0) throw ConfigError("thin must be positive");
  if (burn_in > iterations) throw ConfigError("burn_in exceeds iterations");
  switch (variant) {
    case Variant::CorrelatedMC:
      if (!(phi >= 0.0 && phi < 1.0)) throw ConfigError("phi must lie in [0,1)");
      if (stream != lik::StreamKind::MC) throw ConfigError("correlated-mc needs the mc stream");
      break;
    case Variant::CorrelatedRQMC:
      if (stream != lik::StreamKind::RQMC) throw ConfigError("correlated-rqmc needs the rqmc stream");
      if (!(refresh_probability >= 0.01 && refresh_probability <= 1.0))
        throw ConfigError("refresh probability must lie in [0.01, 1]");
      break;
    case Variant::Block:
      if (blocks == 0 || (n_obs > 0 && blocks > n_obs)) throw ConfigError("block count must lie in [1, n]");
      break;
    case Variant::Standard: break;
  }
}

lik::AuxStream propose_aux(const lik::AuxStream& aux, const PMConfig& config, std::uint64_t seed, std::size_t* block) {
  const std::uint64_t aux_seed = derive_seed(seed, kAuxTag);
  const std::size_t n = aux.n();
  switch (config.variant) {
    case Variant::Standard: return aux.refreshed(0, n, aux_seed);
    case Variant::CorrelatedMC: return aux.autoregressive(config.phi, aux_seed);
    case Variant::CorrelatedRQMC: {
      CounterRng coin(derive_seed(seed, kRefreshTag));
      if (coin.uniform() < config.refresh_probability) return aux.refreshed(0, n, aux_seed);
      return aux.correlated(config.depth, aux_seed);
    }
    case Variant::Block: {
      CounterRng pick(derive_seed(seed, kBlockTag));
      const std::size_t G = config.blocks;
      const std::size_t k = static_cast<std::size_t>(pick.below(G));
      if (block) *block = k;
      return aux.refreshed(k * n / G, (k + 1) * n / G, aux_seed);
    }
  }
  throw std::logic_error("unhandled variant");
}

double ChainOutput::acceptance_rate() const {
  return total_steps == 0 ? 0.0 : static_cast<double>(total_accepted) / static_cast<double>(total_steps);
}

std::vector<double> ChainOutput::column(std::size_t k) const {
  std::vector<double> out;
  out.reserve(draws.size());
  for (const auto& d : draws) out.push_back(d.at(k));
  return out;
}

double ChainOutput::mean(std::size_t k) const {
  const auto c = column(k);
  if (c.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(c.begin(), c.end(), 0.0) / static_cast<double>(c.size());
}

double ChainOutput::sd(std::size_t k) const {
  const auto c = column(k);
  if (c.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double m = mean(k);
  double ss = 0.0;
  for (double v : c) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(c.size() - 1));
}

Sampler::Sampler(const Target& target, PMConfig config) : target_(target), config_(std::move(config)) {
  if (config_.variant == Variant::CorrelatedMC && config_.stream != lik::StreamKind::MC)
    throw ConfigError("correlated-mc needs the mc stream");
}

ChainState Sampler::initial(std::span<const double> eta) const {
  if (eta.size() != target_.size()) throw ConfigError("initial value has the wrong size");
  ChainState s;
  s.eta.assign(eta.begin(), eta.end());
  s.aux = target_.make_aux(config_.stream, config_.points, derive_seed(config_.seed, kInitialTag), config_.normals());
  s.log_prior = target_.log_prior(s.eta);
  s.log_like = safe_log_likelihood(target_, s.eta, s.aux ? &*s.aux : nullptr, nullptr);
  return s;
}

ChainState Sampler::step(const ChainState& state, std::size_t j, const AdaptiveProposal& proposal, double* accept_prob,
                         bool* accepted, std::size_t* regenerated) const {
  const std::uint64_t base = derive_seed(config_.seed, j);
  CounterRng rng(derive_seed(base, kProposalTag));
  ChainState next;
  next.eta = proposal.propose(state.eta, rng);
  if (accept_prob) *accept_prob = 0.0;
  if (accepted) *accepted = false;
  if (regenerated) *regenerated = 0;
  if (!all_finite(next.eta)) return state;
  next.log_prior = target_.log_prior(next.eta);
  if (next.log_prior == -std::numeric_limits<double>::infinity() || std::isnan(next.log_prior)) return state;
  if (state.aux) {
    next.aux = propose_aux(*state.aux, config_, base);
    if (regenerated) *regenerated = next.aux->regenerated();
  }
  next.log_like = safe_log_likelihood(target_, next.eta, next.aux ? &*next.aux : nullptr, nullptr);
  const double alpha = accept_probability(state.log_like, state.log_prior, next.log_like, next.log_prior);
  if (accept_prob) *accept_prob = alpha;
  CounterRng coin(derive_seed(base, kAcceptTag));
  if (coin.uniform() < alpha) {
    if (accepted) *accepted = true;
    return next;
  }
  return state;
}

ChainOutput Sampler::run(std::span<const double> eta0,
                         const std::function<void(std::size_t, const ChainState&, bool)>& on_step) const {
  config_.validate(0);
  ChainOutput out;
  out.names = target_.names();
  out.points = config_.points;
  AdaptiveProposal proposal(target_.size(), config_.garthwaite);
  ChainState state = initial(eta0);
  if (state.aux) out.points = state.aux->points();
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t j = 0; j < config_.iterations; ++j) {
    if (j == config_.burn_in) proposal.freeze();
    double alpha = 0.0;
    bool accepted = false;
    std::size_t regenerated = 0;
    state = step(state, j, proposal, &alpha, &accepted, &regenerated);
    proposal.observe(state.eta, alpha);
    ++out.total_steps;
    out.total_accepted += accepted ? 1 : 0;
    out.regenerated += regenerated;
    if (j >= config_.burn_in && (j - config_.burn_in) % config_.thin == 0) {
      out.iteration.push_back(j);
      out.draws.push_back(target_.natural(state.eta));
      out.log_like.push_back(state.log_like);
      out.accepted.push_back(accepted ? 1 : 0);
    }
    if (on_step) on_step(j, state, accepted);
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace dcop::pm
