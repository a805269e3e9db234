#pragma once

#include <string>
#include <vector>

#include "cli/config.hpp"
#include "dcop/copula.hpp"
#include "dcop/likelihood.hpp"
#include "dcop/marginals.hpp"

namespace dcop::cli {

struct Dataset {
  std::vector<std::string> names;
  copula::RowMatrix values;  // n x columns
  std::string provenance;

  std::size_t n() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t column_index(const std::string& name) const;
};

Dataset read_csv(const std::string& path);
std::string to_csv(const Dataset& data);

// Fits each configured margin on its column (parameters left unset in the
// config are estimated) and returns the margins in config order.
std::vector<lik::Marginal> fit_margins(const RunConfig& config, const Dataset& data);

// Margins for simulation; every parameter must be given.
std::vector<lik::Marginal> simulation_margins(const RunConfig& config);

// Rows of the configured columns mapped to rectangle bounds.
std::vector<lik::ObservationBounds> build_bounds(const RunConfig& config, const Dataset& data,
                                                 const std::vector<lik::Marginal>& margins);

Dataset simulate(const RunConfig& config, std::uint64_t seed);

// Natural parameters of the simulation model.
std::vector<double> simulation_theta(const RunConfig& config);

}  // namespace dcop::cli
