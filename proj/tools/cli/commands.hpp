#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cli/config.hpp"
#include "cli/dataset.hpp"
#include "dcop/diagnostics.hpp"

namespace dcop::cli {

struct FitOutcome {
  std::string method;
  std::vector<std::string> names;
  pm::ChainOutput chain;  // VBIL: draws from q
  diag::ChainSummary summary;
  std::optional<pm::TuningReport> tuning;
  std::optional<vbil::VBILResult> vbil;
  std::vector<std::string> warnings;
  double seconds = 0.0;
  json manifest;
  json summary_doc;
};

std::vector<double> default_init(const copula::Parameterization& param);

// fit marginals -> bounds -> (pilot -> tune) -> sampler or VBIL -> diagnostics,
// writing artifacts under out.
FitOutcome cmd_fit(const RunConfig& config, const Dataset& data, const std::filesystem::path& out);
void cmd_simulate(const RunConfig& config, const std::filesystem::path& data_path, const std::filesystem::path& out);
void cmd_variance_study(const RunConfig& config, const Dataset& data, const std::filesystem::path& out);
void cmd_compare(const RunConfig& a, const RunConfig& b, const Dataset& data, const std::filesystem::path& out);
void cmd_lpds(const RunConfig& config, const Dataset& data, const std::filesystem::path& out);

// Parses arguments and dispatches; returns the process exit code.
int main(int argc, char** argv);

}  // namespace dcop::cli
