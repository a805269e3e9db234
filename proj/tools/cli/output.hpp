#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "dcop/diagnostics.hpp"
#include "dcop/pm.hpp"
#include "dcop/vbil.hpp"

namespace dcop::cli {

using json = nlohmann::ordered_json;

// Shortest decimal with 17 significant digits.
std::string fmt(double x);

// Writes via a temporary sibling and a rename.
void write_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);
std::uint64_t fnv1a(const std::string& bytes);

std::string chain_csv(const pm::ChainOutput& chain);
std::string kde_csv(const pm::ChainOutput& chain, std::size_t grid_points = 256);
std::string trace_csv(const vbil::VBILResult& result);

json summary_json(const diag::ChainSummary& summary);
json tuning_json(const pm::TuningReport& report);
json vbil_json(const vbil::VBILResult& result, const std::vector<std::string>& names);

// JSON number that keeps NaN/inf readable.
json number(double x);

}  // namespace dcop::cli
