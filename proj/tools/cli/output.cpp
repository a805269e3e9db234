#include "cli/output.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dcop/error.hpp"

namespace dcop::cli {

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << contents;
    if (!out) throw DataError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string chain_csv(const pm::ChainOutput& chain) {
  std::string out = "iteration";
  for (const auto& n : chain.names) out += "," + n;
  out += ",log_like,accept\n";
  for (std::size_t r = 0; r < chain.draws.size(); ++r) {
    out += std::to_string(chain.iteration[r]);
    for (double v : chain.draws[r]) out += "," + fmt(v);
    out += "," + fmt(chain.log_like[r]) + "," + std::to_string(chain.accepted[r]) + "\n";
  }
  return out;
}

std::string kde_csv(const pm::ChainOutput& chain, std::size_t grid_points) {
  std::string out = "parameter,x,density\n";
  for (std::size_t k = 0; k < chain.names.size(); ++k) {
    const auto col = chain.column(k);
    diag::KdeCurve curve;
    try {
      curve = diag::kde(col, grid_points);
    } catch (const DataError&) {
      continue;
    }
    for (std::size_t i = 0; i < curve.grid.size(); ++i)
      out += chain.names[k] + "," + fmt(curve.grid[i]) + "," + fmt(curve.density[i]) + "\n";
  }
  return out;
}

std::string trace_csv(const vbil::VBILResult& result) {
  std::string out = "iteration";
  for (const auto& n : result.family->param_names()) out += "," + n;
  out += ",lower_bound,lower_bound_total,windowed,gradient_norm,rate\n";
  for (const auto& row : result.trace) {
    out += std::to_string(row.iteration);
    for (double v : row.lambda) out += "," + fmt(v);
    out += "," + fmt(row.lower_bound) + "," + fmt(row.lower_bound_total) + "," + fmt(row.windowed) + "," +
           fmt(row.gradient_norm) + "," + fmt(row.rate) + "\n";
  }
  return out;
}

json number(double x) {
  if (std::isfinite(x)) return x;
  return fmt(x);
}

json summary_json(const diag::ChainSummary& summary) {
  json params = json::array();
  for (const auto& p : summary.parameters)
    params.push_back({{"name", p.name},
                      {"mean", number(p.mean)},
                      {"sd", number(p.sd)},
                      {"q025", number(p.q025)},
                      {"q975", number(p.q975)},
                      {"iact", number(p.iact.value)},
                      {"iact_window", p.iact.window},
                      {"iact_defined", p.iact.defined}});
  return {{"parameters", params},
          {"mean_iact", number(summary.mean_iact)},
          {"seconds", summary.seconds},
          {"tnv", number(summary.tnv)},
          {"acceptance", summary.acceptance},
          {"draws", summary.draws}};
}

json tuning_json(const pm::TuningReport& report) {
  json cells = json::array();
  for (const auto& c : report.cells)
    cells.push_back({{"points", c.points},
                     {"variance", number(c.variance)},
                     {"rho", number(c.rho)},
                     {"sigma2_opt", number(c.sigma2_opt)}});
  return {{"rho", number(report.rho)},
          {"sigma2_opt", number(report.sigma2_opt)},
          {"points", report.points},
          {"theta_bar", report.theta_bar},
          {"clamped", report.clamped},
          {"satisfied", report.satisfied},
          {"warnings", report.warnings},
          {"cells", cells}};
}

json vbil_json(const vbil::VBILResult& result, const std::vector<std::string>& names) {
  json mean = json::object();
  json sd = json::object();
  for (std::size_t k = 0; k < names.size(); ++k) {
    mean[names[k]] = number(result.mean[k]);
    sd[names[k]] = number(result.sd[k]);
  }
  const Eigen::VectorXd lambda = result.family->params();
  json params = json::object();
  const auto pn = result.family->param_names();
  for (std::size_t k = 0; k < pn.size(); ++k) params[pn[k]] = lambda[static_cast<Eigen::Index>(k)];
  const double lb = result.trace.empty() ? std::nan("") : result.trace.back().lower_bound;
  const double lb_total = result.trace.empty() ? std::nan("") : result.trace.back().lower_bound_total;
  return {{"family", result.family->name()},
          {"converged", result.converged},
          {"iterations", result.iterations},
          {"seconds", result.seconds},
          {"lambda", params},
          {"lower_bound", number(lb)},
          {"lower_bound_total", number(lb_total)},
          {"mean", mean},
          {"sd", sd}};
}

}  // namespace dcop::cli
