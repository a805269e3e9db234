#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>

#include "dcop/diagnostics.hpp"
#include "dcop/error.hpp"
#include "dcop/rng.hpp"
#include "dcop/special.hpp"

namespace dcop::diag {

std::vector<VarianceCell> loglik_variance_study(const lik::Likelihood& likelihood, const copula::Model& model,
                                                std::span<const std::size_t> points,
                                                std::span<const lik::StreamKind> streams, std::size_t reps,
                                                std::uint64_t seed) {
  if (reps < 2) throw ConfigError("variance study needs at least two replicates");
  std::vector<VarianceCell> cells;
  for (const auto stream : streams)
    for (const std::size_t M : points) {
      VarianceCell cell;
      cell.points = M;
      cell.stream = stream;
      cell.reps = reps;
      std::vector<double> values;
      for (std::size_t r = 0; r < reps; ++r) {
        const auto aux = likelihood.make_aux(stream, M, derive_seed(seed, M, r * 2 + static_cast<std::size_t>(stream)));
        const double v = likelihood.evaluate(model, aux).log_total;
        if (std::isfinite(v))
          values.push_back(v);
        else
          ++cell.zeros;
      }
      if (values.size() >= 2) {
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        double ss = 0.0;
        for (double v : values) ss += (v - mean) * (v - mean);
        cell.mean = mean;
        cell.variance = ss / static_cast<double>(values.size() - 1);
        cell.se = cell.variance * std::sqrt(2.0 / static_cast<double>(values.size() - 1));
      } else {
        cell.mean = cell.variance = cell.se = std::numeric_limits<double>::quiet_NaN();
      }
      cells.push_back(cell);
    }
  return cells;
}

void write_variance_table(std::ostream& os, const std::vector<VarianceCell>& cells) {
  std::vector<lik::StreamKind> streams;
  std::map<std::size_t, std::map<lik::StreamKind, const VarianceCell*>> rows;
  for (const auto& c : cells) {
    if (std::find(streams.begin(), streams.end(), c.stream) == streams.end()) streams.push_back(c.stream);
    rows[c.points][c.stream] = &c;
  }
  const auto old_precision = os.precision(17);
  os << "M";
  for (auto s : streams) os << ",var_" << lik::stream_name(s);
  for (auto s : streams) os << ",se_" << lik::stream_name(s);
  for (auto s : streams) os << ",zeros_" << lik::stream_name(s);
  os << "\n";
  for (const auto& [M, by_stream] : rows) {
    os << M;
    for (auto s : streams) {
      const auto it = by_stream.find(s);
      os << ",";
      if (it != by_stream.end()) os << it->second->variance;
    }
    for (auto s : streams) {
      const auto it = by_stream.find(s);
      os << ",";
      if (it != by_stream.end()) os << it->second->se;
    }
    for (auto s : streams) {
      const auto it = by_stream.find(s);
      os << ",";
      if (it != by_stream.end()) os << it->second->zeros;
    }
    os << "\n";
  }
  os.precision(old_precision);
}

std::vector<std::size_t> fold_assignment(std::size_t n, std::size_t folds, std::uint64_t seed) {
  if (folds == 0 || folds > n) throw ConfigError("fold count must lie in [1, n]");
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  CounterRng rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
  std::vector<std::size_t> fold(n);
  for (std::size_t i = 0; i < n; ++i) fold[perm[i]] = i % folds;
  return fold;
}

std::vector<double> predictive_log_density(const lik::Likelihood& test, const copula::Parameterization& param,
                                           const std::vector<std::vector<double>>& natural_draws, std::size_t points,
                                           lik::StreamKind stream, std::uint64_t seed) {
  if (natural_draws.empty()) throw std::invalid_argument("predictive density needs posterior draws");
  const std::size_t n = test.n();
  std::vector<std::vector<double>> terms(n);
  for (std::size_t k = 0; k < natural_draws.size(); ++k) {
    const copula::Model model = param.model_natural(natural_draws[k]);
    const auto aux = test.make_aux(stream, points, derive_seed(seed, k));
    const auto est = test.evaluate(model, aux);
    for (std::size_t t = 0; t < n; ++t) terms[t].push_back(est.per_observation[t]);
  }
  std::vector<double> out(n);
  const double log_k = std::log(static_cast<double>(natural_draws.size()));
  for (std::size_t t = 0; t < n; ++t) out[t] = log_sum_exp(terms[t]) - log_k;
  return out;
}

LpdsResult lpds(const std::vector<lik::ObservationBounds>& data, const copula::Parameterization& param,
                const copula::PriorSpec& prior, std::span<const double> eta0, const LpdsConfig& config) {
  const std::size_t n = data.size();
  if (n < config.folds) throw ConfigError("LPDS needs at least as many observations as folds");
  if (config.folds < 2) throw ConfigError("LPDS needs at least two folds");
  LpdsResult out;
  out.fold_of = fold_assignment(n, config.folds, derive_seed(config.seed, 0xf01d));
  for (std::size_t b = 0; b < config.folds; ++b) {
    std::vector<lik::ObservationBounds> train;
    std::vector<lik::ObservationBounds> test;
    for (std::size_t t = 0; t < n; ++t) (out.fold_of[t] == b ? test : train).push_back(data[t]);
    const lik::Likelihood train_lik(param.family(), train);
    const lik::Likelihood test_lik(param.family(), test);
    pm::PMConfig cfg = config.sampler;
    cfg.seed = derive_seed(config.seed, b, 1);
    if (cfg.variant == pm::Variant::Block) cfg.blocks = std::min(cfg.blocks, train.size());
    std::vector<std::vector<double>> draws;
    std::size_t points = cfg.points;
    if (param.size() == 0) {
      // Nothing to sample: the predictive density is the model density.
      draws.emplace_back();
    } else {
      const pm::CopulaTarget target(train_lik, param, prior);
      const pm::ChainOutput chain = pm::Sampler(target, cfg).run(eta0);
      const ChainSummary summary = summarize(chain);
      for (const auto& p : summary.parameters)
        if (!p.iact.defined)
          throw ConvergenceError("LPDS fold " + std::to_string(b) + ": IACT of " + p.name + " is undefined");
      const std::size_t K = std::min(config.max_draws, chain.draws.size());
      for (std::size_t k = 0; k < K; ++k) draws.push_back(chain.draws[k * chain.draws.size() / K]);
      points = chain.points;
    }
    const auto lp = predictive_log_density(test_lik, param, draws, points * config.point_multiplier, cfg.stream,
                                           derive_seed(config.seed, b, 2));
    double s = 0.0;
    for (double v : lp) s += v;
    out.per_fold.push_back(s);
    out.total += s;
  }
  return out;
}

}  // namespace dcop::diag
