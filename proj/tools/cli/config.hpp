#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cli/output.hpp"
#include "dcop/copula.hpp"
#include "dcop/likelihood.hpp"
#include "dcop/pm.hpp"
#include "dcop/vbil.hpp"

namespace dcop::cli {

struct MarginSpec {
  std::string column;
  std::string kind;  // bernoulli | empirical | gaussian | fixed | poisson
  std::optional<double> p;
  std::optional<double> mean;
  std::optional<double> sd;
  std::optional<double> rate;
  int max_value = 30;
  std::vector<double> support;
  std::vector<double> probs;
  bool continuous = false;  // empirical only
};

struct EstimatorSection {
  lik::StreamKind stream = lik::StreamKind::RQMC;
  std::optional<std::size_t> points;  // nullopt = tune
  pm::TuningConfig tuning;
  std::size_t pilot_iterations = 400;
  std::size_t pilot_points = 256;
};

struct SamplerSection {
  std::string method = "pm";  // pm | vbil | da
  pm::PMConfig pm;
  std::optional<std::vector<double>> init;  // natural scale
};

struct VbilSection {
  vbil::VBILConfig config;
  double init_a = 2.0;
  double init_b = 1.0;
  double init_sd = 0.1;  // Gaussian family, eta scale
};

struct SimulateSection {
  std::size_t n = 0;
  std::optional<double> theta;
  std::optional<std::vector<std::vector<double>>> loadings;
};

struct VarianceSection {
  std::optional<std::vector<double>> theta;  // natural scale
  std::string from_summary;
  std::vector<std::size_t> points{256, 512, 1024, 2048, 4096, 8192};
  std::vector<lik::StreamKind> streams{lik::StreamKind::MC, lik::StreamKind::RQMC};
  std::size_t reps = 50;
};

struct LpdsSection {
  std::size_t folds = 5;
  std::size_t max_draws = 200;
  std::size_t point_multiplier = 4;
};

struct RunConfig {
  copula::Family family = copula::Family::Clayton;
  std::size_t factors = 0;
  copula::PriorSpec prior;
  std::vector<MarginSpec> margins;
  EstimatorSection estimator;
  SamplerSection sampler;
  VbilSection vbil;
  SimulateSection simulate;
  VarianceSection variance;
  LpdsSection lpds;
  std::optional<std::uint64_t> seed;
  json raw;

  std::size_t dim() const { return margins.size(); }
  copula::Parameterization parameterization() const { return {family, dim(), factors}; }
  std::uint64_t require_seed() const;
};

// Parses and validates; unknown keys raise ConfigError.
RunConfig parse_config(const json& j);
RunConfig load_config(const std::string& path);

// Natural parameter vector for a Gaussian factor model from a J x k matrix.
std::vector<double> flatten_loadings(const std::vector<std::vector<double>>& rows, std::size_t factors);

}  // namespace dcop::cli
