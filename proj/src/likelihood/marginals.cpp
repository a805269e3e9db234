#include <algorithm>
#include <cmath>
#include <sstream>

#include "dcop/error.hpp"
#include "dcop/marginals.hpp"
#include "dcop/special.hpp"

namespace dcop::lik {

namespace {

std::string describe(double x) {
  std::ostringstream s;
  s.precision(17);
  s << x;
  return s.str();
}

}  // namespace

Marginal Marginal::from_pmf(Kind kind, std::vector<double> support, std::vector<double> probs) {
  if (support.empty() || support.size() != probs.size()) throw ConfigError("pmf support and probabilities must match");
  std::vector<std::size_t> order(support.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return support[a] < support[b]; });
  Marginal m;
  m.kind_ = kind;
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw ConfigError("pmf probabilities must be finite and nonnegative");
    total += p;
  }
  if (!(total > 0.0)) throw ConfigError("pmf has zero total mass");
  double acc = 0.0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i > 0 && support[order[i]] == support[order[i - 1]]) throw ConfigError("pmf support has duplicates");
    acc += probs[order[i]] / total;
    m.support_.push_back(support[order[i]]);
    m.cumulative_.push_back(acc);
  }
  m.cumulative_.back() = 1.0;
  return m;
}

Marginal Marginal::bernoulli(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("Bernoulli probability must lie in (0,1), got " + describe(p));
  Marginal m = from_pmf(Kind::Bernoulli, {0.0, 1.0}, {1.0 - p, p});
  m.cumulative_[0] = 1.0 - p;
  m.mean_ = p;
  return m;
}

Marginal Marginal::fixed(std::vector<double> support, std::vector<double> probs) {
  return from_pmf(Kind::Fixed, std::move(support), std::move(probs));
}

Marginal Marginal::poisson(double rate, int max_value) {
  if (!(rate > 0.0) || !std::isfinite(rate)) throw ConfigError("Poisson rate must be positive");
  if (max_value < 1) throw ConfigError("Poisson support needs at least two values");
  std::vector<double> support;
  std::vector<double> probs;
  double acc = 0.0;
  for (int k = 0; k <= max_value; ++k) {
    const double p = std::exp(k * std::log(rate) - rate - std::lgamma(k + 1.0));
    support.push_back(k);
    probs.push_back(k == max_value ? std::max(0.0, 1.0 - acc) : p);
    acc += p;
  }
  Marginal m = from_pmf(Kind::Fixed, std::move(support), std::move(probs));
  m.mean_ = rate;
  return m;
}

Marginal Marginal::empirical_discrete(std::span<const double> sample) {
  if (sample.empty()) throw DataError("empirical margin needs data");
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> support;
  std::vector<double> probs;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    support.push_back(sorted[i]);
    probs.push_back(static_cast<double>(j - i));
    i = j;
  }
  if (support.size() < 2) throw DataError("empirical discrete margin is constant");
  return from_pmf(Kind::EmpiricalDiscrete, std::move(support), std::move(probs));
}

Marginal Marginal::empirical_continuous(std::span<const double> sample) {
  if (sample.size() < 2) throw DataError("empirical margin needs at least two values");
  Marginal m;
  m.kind_ = Kind::EmpiricalContinuous;
  m.support_.assign(sample.begin(), sample.end());
  std::sort(m.support_.begin(), m.support_.end());
  return m;
}

Marginal Marginal::gaussian(double mean, double sd) {
  if (!(sd > 0.0) || !std::isfinite(sd) || !std::isfinite(mean)) throw ConfigError("Gaussian margin needs sd > 0");
  Marginal m;
  m.kind_ = Kind::Gaussian;
  m.mean_ = mean;
  m.sd_ = sd;
  return m;
}

std::string Marginal::kind_name() const {
  switch (kind_) {
    case Kind::Bernoulli: return "bernoulli";
    case Kind::Fixed: return "fixed";
    case Kind::EmpiricalDiscrete: return "empirical";
    case Kind::EmpiricalContinuous: return "empirical";
    case Kind::Gaussian: return "gaussian";
  }
  return "unknown";
}

std::pair<double, double> Marginal::interval(double x) const {
  if (!discrete()) throw std::logic_error("interval() on a continuous margin");
  const auto it = std::lower_bound(support_.begin(), support_.end(), x - 1e-9);
  if (it == support_.end() || std::abs(*it - x) > 1e-9) throw DataError("value " + describe(x) + " outside marginal support");
  const auto k = static_cast<std::size_t>(it - support_.begin());
  return {k == 0 ? 0.0 : cumulative_[k - 1], cumulative_[k]};
}

double Marginal::cdf(double x) const {
  switch (kind_) {
    case Kind::Gaussian: return norm_cdf((x - mean_) / sd_);
    case Kind::EmpiricalContinuous: {
      const double n = static_cast<double>(support_.size());
      const auto count = static_cast<double>(std::upper_bound(support_.begin(), support_.end(), x) - support_.begin());
      // Values below the sample minimum get half a step so F stays in (0,1).
      return std::max(count, 0.5) / (n + 1.0);
    }
    default: {
      const auto it = std::upper_bound(support_.begin(), support_.end(), x + 1e-9);
      if (it == support_.begin()) return 0.0;
      return cumulative_[static_cast<std::size_t>(it - support_.begin()) - 1];
    }
  }
}

double Marginal::log_pdf(double x) const {
  if (kind_ == Kind::Gaussian) return norm_log_pdf((x - mean_) / sd_) - std::log(sd_);
  if (kind_ == Kind::EmpiricalContinuous) return 0.0;
  throw std::logic_error("log_pdf() on a discrete margin");
}

double Marginal::quantile(double u) const {
  switch (kind_) {
    case Kind::Gaussian: return mean_ + sd_ * norm_quantile(u);
    case Kind::EmpiricalContinuous: {
      const double n = static_cast<double>(support_.size());
      auto k = static_cast<std::size_t>(std::ceil(u * (n + 1.0)));
      k = std::clamp<std::size_t>(k, 1, support_.size());
      return support_[k - 1];
    }
    default: {
      const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
      if (it == cumulative_.end()) return support_.back();
      return support_[static_cast<std::size_t>(it - cumulative_.begin())];
    }
  }
}

}  // namespace dcop::lik
