#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "dcop/error.hpp"
#include "dcop/vbil.hpp"

namespace dcop::vbil {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kMaxProjectionHalvings = 60;

double windowed_mean(const std::vector<TraceRow>& trace, std::size_t K) {
  if (trace.size() < K) return kNaN;
  double s = 0.0;
  for (std::size_t k = trace.size() - K; k < trace.size(); ++k) s += trace[k].lower_bound;
  return s / static_cast<double>(K);
}

}  // namespace

double VBILConfig::rate(std::size_t t) const {
  const double tt = static_cast<double>(t);
  switch (schedule) {
    case Schedule::Ratio: return a0 * tau / (tau + tt);
    case Schedule::Harmonic: return a0 / (tau + tt);
    case Schedule::Constant: return a0;
  }
  return a0;
}

void VBILConfig::validate() const {
  if (samples < 2) throw ConfigError("VBIL needs at least two samples per iteration");
  if (window == 0) throw ConfigError("VBIL window must be positive");
  if (!(epsilon > 0.0)) throw ConfigError("VBIL threshold must be positive");
  if (!(a0 > 0.0) || !(tau >= 0.0)) throw ConfigError("VBIL learning rate parameters must be positive");
  if (schedule == Schedule::Harmonic && tau == 0.0) throw ConfigError("harmonic schedule needs tau > 0");
  if (points == 0) throw ConfigError("VBIL points must be positive");
}

GradientEstimate estimate_gradient(const Family& q, const pm::Target& target, const VBILConfig& config,
                                   const Eigen::VectorXd& control, std::uint64_t seed) {
  const auto P = static_cast<Eigen::Index>(q.size());
  std::optional<lik::AuxStream> common;
  if (config.common_randomness) common = target.make_aux(config.stream, config.points, derive_seed(seed, 1), false);

  std::vector<double> f;
  std::vector<Eigen::VectorXd> g;
  GradientEstimate out;
  for (std::size_t s = 0; s < config.samples; ++s) {
    CounterRng rng(derive_seed(seed, 2, s));
    const std::vector<double> eta = q.sample_eta(rng);
    std::optional<lik::AuxStream> own;
    if (!config.common_randomness) own = target.make_aux(config.stream, config.points, derive_seed(seed, 3, s), false);
    const lik::AuxStream* aux = common ? &*common : (own ? &*own : nullptr);
    double ll;
    try {
      ll = target.log_likelihood(eta, aux);
    } catch (const NumericalError&) {
      ll = -std::numeric_limits<double>::infinity();
    }
    double lp = target.log_prior(eta);
    if (!q.density_in_eta()) lp -= target.log_jacobian(eta);
    const double value = lp + ll - q.log_q(eta);
    if (!std::isfinite(value)) {
      ++out.zero_estimates;
      continue;
    }
    f.push_back(value);
    g.push_back(q.score(eta));
  }
  out.usable = f.size();
  out.gradient = Eigen::VectorXd::Zero(P);
  out.control = Eigen::VectorXd::Zero(P);
  if (f.empty()) return out;
  const double S = static_cast<double>(f.size());
  const bool use_control = control.size() == P;
  double lb = 0.0;
  for (std::size_t s = 0; s < f.size(); ++s) {
    lb += f[s];
    for (Eigen::Index k = 0; k < P; ++k) out.gradient[k] += (f[s] - (use_control ? control[k] : 0.0)) * g[s][k];
  }
  out.gradient /= S;
  out.lower_bound = lb / S;
  if (f.size() >= 2) {
    // c_k = Cov(f g_k, g_k) / Var(g_k)
    for (Eigen::Index k = 0; k < P; ++k) {
      double mfg = 0.0;
      double mg = 0.0;
      for (std::size_t s = 0; s < f.size(); ++s) {
        mfg += f[s] * g[s][k];
        mg += g[s][k];
      }
      mfg /= S;
      mg /= S;
      double cov = 0.0;
      double var = 0.0;
      for (std::size_t s = 0; s < f.size(); ++s) {
        cov += (f[s] * g[s][k] - mfg) * (g[s][k] - mg);
        var += (g[s][k] - mg) * (g[s][k] - mg);
      }
      out.control[k] = var > 0.0 ? cov / var : 0.0;
    }
  }
  return out;
}

void natural_moments(const Family& q, const pm::Target& target, std::size_t draws, std::uint64_t seed,
                     std::vector<double>& mean, std::vector<double>& sd) {
  const std::size_t p = target.size();
  mean.assign(p, 0.0);
  std::vector<double> m2(p, 0.0);
  for (std::size_t i = 0; i < draws; ++i) {
    CounterRng rng(derive_seed(seed, i));
    const auto x = target.natural(q.sample_eta(rng));
    for (std::size_t k = 0; k < p; ++k) {
      const double delta = x[k] - mean[k];
      mean[k] += delta / static_cast<double>(i + 1);
      m2[k] += delta * (x[k] - mean[k]);
    }
  }
  sd.assign(p, kNaN);
  if (draws > 1)
    for (std::size_t k = 0; k < p; ++k) sd[k] = std::sqrt(m2[k] / static_cast<double>(draws - 1));
}

VBILResult run(const Family& init, const pm::Target& target, const VBILConfig& config, std::size_t n_obs) {
  config.validate();
  if (n_obs == 0) throw ConfigError("VBIL needs observations");
  VBILResult result;
  result.family = init.clone();
  Family& q = *result.family;
  const double n = static_cast<double>(n_obs);
  const auto start = std::chrono::steady_clock::now();

  Eigen::VectorXd control = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(q.size()));
  if (config.control_variate) control = estimate_gradient(q, target, config, control, derive_seed(config.seed, 0)).control;

  double rate_scale = 1.0;
  bool retried = false;
  Eigen::VectorXd previous = q.params();
  double previous_total = kNaN;
  double previous_window = kNaN;
  for (std::size_t t = 1; t <= config.max_iterations; ++t) {
    const Eigen::VectorXd lambda = q.params();
    const GradientEstimate est = estimate_gradient(q, target, config, config.control_variate ? control : Eigen::VectorXd(),
                                                   derive_seed(config.seed, t, retried ? 1 : 0));
    if (est.usable == 0) {
      std::ostringstream msg;
      msg << "all " << config.samples << " likelihood estimates were zero at VBIL iteration " << t;
      throw NumericalError(msg.str());
    }
    if (std::isfinite(previous_total) && (est.lower_bound - previous_total) / n < -config.divergence_drop) {
      if (retried) {
        std::ostringstream msg;
        msg << "VBIL lower bound per observation dropped by more than " << config.divergence_drop << " twice at iteration " << t;
        throw ConvergenceError(msg.str());
      }
      retried = true;
      rate_scale *= 0.5;
      q.set_params(previous);
      --t;
      continue;
    }
    retried = false;
    if (config.control_variate) control = est.control;

    TraceRow row;
    row.iteration = t;
    row.lambda.assign(lambda.data(), lambda.data() + lambda.size());
    row.lower_bound_total = est.lower_bound;
    row.lower_bound = est.lower_bound / n;
    row.gradient_norm = est.gradient.norm();
    row.rate = config.rate(t) * rate_scale;
    result.trace.push_back(row);
    const double window = windowed_mean(result.trace, config.window);
    result.trace.back().windowed = window;
    result.iterations = t;
    if (std::isfinite(previous_window) && std::abs(window - previous_window) < config.epsilon) {
      result.converged = true;
      break;
    }
    previous_window = window;
    previous_total = est.lower_bound;
    previous = lambda;

    const Eigen::VectorXd step = row.rate * q.natural_gradient(est.gradient);
    Eigen::VectorXd next = lambda + step;
    double shrink = 1.0;
    for (int h = 0; h < kMaxProjectionHalvings && !q.feasible(next); ++h) {
      shrink *= 0.5;
      next = lambda + shrink * step;
    }
    if (!q.feasible(next)) next = lambda;
    q.set_params(next);
  }
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  natural_moments(q, target, 20000, derive_seed(config.seed, 0xbeef), result.mean, result.sd);
  return result;
}

}  // namespace dcop::vbil
