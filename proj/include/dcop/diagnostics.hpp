#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dcop/copula.hpp"
#include "dcop/likelihood.hpp"
#include "dcop/pm.hpp"

namespace dcop::diag {

struct IactResult {
  double value = 0.0;  // NaN when undefined
  std::size_t window = 0;
  bool defined = false;
};

// 1 + 2 sum rho_k truncated at the smallest window M >= c * tau(M).
IactResult iact(std::span<const double> series, double c = 5.0);

double tnv(double iact, double seconds);
double relative_tnv(double tnv_run, double tnv_baseline);

struct ParameterSummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double q025 = 0.0;
  double q975 = 0.0;
  IactResult iact;
};

struct ChainSummary {
  std::vector<ParameterSummary> parameters;
  double mean_iact = 0.0;
  double seconds = 0.0;
  double tnv = 0.0;
  double acceptance = 0.0;
  std::size_t draws = 0;
};

ChainSummary summarize(const pm::ChainOutput& chain);

struct VarianceCell {
  std::size_t points = 0;
  lik::StreamKind stream = lik::StreamKind::MC;
  std::size_t reps = 0;
  std::size_t zeros = 0;
  double mean = 0.0;
  double variance = 0.0;
  double se = 0.0;  // standard error of the variance under normality
};

// Sample variance of log L-hat per (M, stream) cell at a fixed model.
std::vector<VarianceCell> loglik_variance_study(const lik::Likelihood& likelihood, const copula::Model& model,
                                                std::span<const std::size_t> points,
                                                std::span<const lik::StreamKind> streams, std::size_t reps,
                                                std::uint64_t seed);

// One row per M, one variance column per stream, then zero counts.
void write_variance_table(std::ostream& os, const std::vector<VarianceCell>& cells);

// Seed-deterministic balanced assignment of n observations to B folds.
std::vector<std::size_t> fold_assignment(std::size_t n, std::size_t folds, std::uint64_t seed);

// log p-hat(x_t | draws) for each observation of `test`: log of the mean of
// L-hat_t(theta_k) over draws, each estimate using fresh points.
std::vector<double> predictive_log_density(const lik::Likelihood& test, const copula::Parameterization& param,
                                           const std::vector<std::vector<double>>& natural_draws, std::size_t points,
                                           lik::StreamKind stream, std::uint64_t seed);

struct LpdsConfig {
  std::size_t folds = 5;
  pm::PMConfig sampler;
  std::size_t max_draws = 200;      // posterior draws used per fold, evenly spaced
  std::size_t point_multiplier = 4; // held-out estimates use this multiple of the chain's M
  std::uint64_t seed = 1;
};

struct LpdsResult {
  double total = 0.0;
  std::vector<double> per_fold;
  std::vector<std::size_t> fold_of;
};

LpdsResult lpds(const std::vector<lik::ObservationBounds>& data, const copula::Parameterization& param,
                const copula::PriorSpec& prior, std::span<const double> eta0, const LpdsConfig& config);

struct KdeCurve {
  std::vector<double> grid;
  std::vector<double> density;
  double bandwidth = 0.0;
};

double silverman_bandwidth(std::span<const double> series);
KdeCurve kde(std::span<const double> series, std::size_t grid_points = 512);
KdeCurve kde(std::span<const double> series, std::vector<double> grid);
double trapezoid(std::span<const double> x, std::span<const double> y);

}  // namespace dcop::diag
