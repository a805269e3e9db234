#include "cli/commands.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <iostream>

#include "dcop/augmentation.hpp"
#include "dcop/error.hpp"

namespace dcop::cli {

namespace {

namespace fs = std::filesystem;

constexpr const char* kVersion = "0.1.0";

enum SeedTag : std::uint64_t { kSimTag = 11, kPilotTag = 12, kTuneTag = 13, kChainTag = 14, kVbilTag = 15, kLpdsTag = 16,
                               kStudyTag = 17 };

double elapsed(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

json effective_config(const RunConfig& config) {
  json j = config.raw;
  j["seed"] = config.require_seed();
  return j;
}

json manifest_base(const std::string& command, const RunConfig& config, const Dataset* data) {
  json m;
  m["tool"] = "dcopula";
  m["version"] = kVersion;
  m["command"] = command;
  m["config"] = effective_config(config);
  if (data) {
    json d;
    d["path"] = data->provenance;
    d["rows"] = data->n();
    d["columns"] = data->names;
    d["fnv1a"] = std::to_string(fnv1a(to_csv(*data)));
    m["data"] = d;
  }
  m["threads"] = omp_get_max_threads();
  return m;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

pm::ChainOutput draws_from_q(const vbil::Family& q, const pm::Target& target, std::size_t n, std::uint64_t seed) {
  pm::ChainOutput out;
  out.names = target.names();
  for (std::size_t i = 0; i < n; ++i) {
    CounterRng rng(derive_seed(seed, i));
    out.iteration.push_back(i);
    out.draws.push_back(target.natural(q.sample_eta(rng)));
    out.log_like.push_back(std::nan(""));
    out.accepted.push_back(0);
  }
  return out;
}

std::size_t tune(const RunConfig& config, const pm::CopulaTarget& target, std::span<const double> eta0,
                 std::uint64_t seed, const pm::PMConfig& variant, std::optional<pm::TuningReport>& report) {
  pm::PMConfig pilot = variant;
  pilot.points = config.estimator.pilot_points;
  pilot.iterations = config.estimator.pilot_iterations;
  pilot.burn_in = config.estimator.pilot_iterations / 2;
  pilot.thin = 1;
  pilot.seed = derive_seed(seed, kPilotTag);
  if (pilot.variant == pm::Variant::Block) pilot.blocks = std::min(pilot.blocks, target.likelihood().n());
  const pm::ChainOutput chain = pm::Sampler(target, pilot).run(eta0);
  std::vector<double> bar(target.size(), 0.0);
  for (std::size_t k = 0; k < bar.size(); ++k) bar[k] = chain.mean(k);
  pm::TuningConfig tc = config.estimator.tuning;
  tc.seed = derive_seed(seed, kTuneTag);
  report = pm::tune_points(target, target.eta(bar), variant, tc);
  return report->points;
}

json parameter_table(const std::vector<std::string>& names, const pm::ChainOutput& chain) {
  json out = json::object();
  for (std::size_t k = 0; k < names.size(); ++k) out[names[k]] = {{"mean", number(chain.mean(k))}, {"sd", number(chain.sd(k))}};
  return out;
}

}  // namespace

std::vector<double> default_init(const copula::Parameterization& param) {
  switch (param.family()) {
    case copula::Family::Clayton: return {1.0};
    case copula::Family::Gumbel: return {1.5};
    case copula::Family::Gaussian: return std::vector<double>(param.size(), 0.5);
  }
  return {};
}

FitOutcome cmd_fit(const RunConfig& config, const Dataset& data, const fs::path& out) {
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t seed = config.require_seed();
  const auto margins = fit_margins(config, data);
  const auto bounds = build_bounds(config, data, margins);
  const lik::Likelihood likelihood(config.family, bounds);
  const auto param = config.parameterization();
  const pm::CopulaTarget target(likelihood, param, config.prior);
  const std::vector<double> init = config.sampler.init.value_or(default_init(param));
  if (init.size() != param.size()) throw ConfigError("sampler.init has the wrong length");
  const std::vector<double> eta0 = param.eta(init);
  if (param.size() == 0) throw ConfigError("the model has no free parameters to fit");

  FitOutcome res;
  res.method = config.sampler.method;
  res.names = param.names();
  pm::PMConfig pmc = config.sampler.pm;
  pmc.validate(likelihood.n());
  pmc.seed = derive_seed(seed, kChainTag);

  json manifest = manifest_base("fit", config, &data);
  json margin_doc = json::array();
  for (std::size_t j = 0; j < margins.size(); ++j)
    margin_doc.push_back({{"column", config.margins[j].column}, {"kind", margins[j].kind_name()}});
  manifest["margins"] = margin_doc;

  double tuning_seconds = 0.0;
  if (res.method != "da" && !config.estimator.points) {
    const auto t0 = std::chrono::steady_clock::now();
    pm::PMConfig variant = pmc;
    if (res.method == "vbil") variant.variant = pm::Variant::Standard;
    pmc.points = tune(config, target, eta0, seed, variant, res.tuning);
    tuning_seconds = elapsed(t0);
    for (const auto& w : res.tuning->warnings) res.warnings.push_back(w);
  }

  if (res.method == "pm") {
    res.chain = pm::Sampler(target, pmc).run(eta0);
  } else if (res.method == "da") {
    da::DAConfig dc;
    dc.iterations = pmc.iterations;
    dc.burn_in = pmc.burn_in;
    dc.thin = pmc.thin;
    dc.garthwaite = pmc.garthwaite;
    dc.seed = pmc.seed;
    auto result = da::run(bounds, param, config.prior, eta0, dc);
    for (const auto& w : result.warnings) res.warnings.push_back(w);
    res.chain = std::move(result.chain);
  } else {
    vbil::VBILConfig vc = config.vbil.config;
    vc.points = pmc.points;
    vc.stream = pmc.stream;
    vc.seed = derive_seed(seed, kVbilTag);
    std::unique_ptr<vbil::Family> q;
    if (config.family == copula::Family::Gaussian) {
      const Eigen::Map<const Eigen::VectorXd> mu(eta0.data(), static_cast<Eigen::Index>(eta0.size()));
      const Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(mu.size(), mu.size()) * config.vbil.init_sd * config.vbil.init_sd;
      q = std::make_unique<vbil::Gaussian>(mu, sigma);
    } else {
      q = std::make_unique<vbil::InverseGamma>(config.vbil.init_a, config.vbil.init_b);
    }
    res.vbil = vbil::run(*q, target, vc, likelihood.n());
    if (!res.vbil->converged) res.warnings.push_back("VBIL stopped at max_iterations before the lower bound settled");
    res.chain = draws_from_q(*res.vbil->family, target, 5000, derive_seed(seed, kVbilTag, 1));
    res.chain.seconds = res.vbil->seconds;
  }
  if (res.method != "vbil") {
    res.summary = diag::summarize(res.chain);
    for (const auto& p : res.summary.parameters)
      if (!p.iact.defined) res.warnings.push_back("IACT of " + p.name + " is undefined; the chain may be too short");
  }
  res.seconds = elapsed(start);

  json summary;
  summary["method"] = res.method;
  summary["family"] = std::string(copula::family_name(config.family));
  summary["points"] = pmc.points;
  summary["stream"] = lik::stream_name(pmc.stream);
  if (res.method == "vbil") {
    summary["vbil"] = vbil_json(*res.vbil, res.names);
    json params = json::array();
    for (std::size_t k = 0; k < res.names.size(); ++k)
      params.push_back({{"name", res.names[k]}, {"mean", number(res.vbil->mean[k])}, {"sd", number(res.vbil->sd[k])}});
    summary["parameters"] = params;
  } else {
    summary["variant"] = res.method == "pm" ? pm::variant_name(pmc.variant) : "data-augmentation";
    const json chain_doc = summary_json(res.summary);
    for (auto it = chain_doc.begin(); it != chain_doc.end(); ++it) summary[it.key()] = it.value();
  }
  if (res.tuning) summary["tuning"] = tuning_json(*res.tuning);
  summary["warnings"] = res.warnings;

  manifest["seeds"] = {{"master", seed},
                       {"chain", pmc.seed},
                       {"pilot", derive_seed(seed, kPilotTag)},
                       {"tuning", derive_seed(seed, kTuneTag)},
                       {"vbil", derive_seed(seed, kVbilTag)}};
  manifest["points"] = pmc.points;
  if (res.tuning) manifest["tuning"] = tuning_json(*res.tuning);
  if (res.vbil) manifest["variational"] = vbil_json(*res.vbil, res.names);
  manifest["timings"] = {{"total_seconds", res.seconds},
                         {"tuning_seconds", tuning_seconds},
                         {"sampling_seconds", res.chain.seconds}};
  std::vector<std::string> outputs{"summary.json", "manifest.json", "kde.csv"};
  outputs.push_back(res.method == "vbil" ? "trace.csv" : "chain.csv");
  manifest["outputs"] = outputs;
  manifest["warnings"] = res.warnings;

  if (res.method == "vbil")
    write_atomic(out / "trace.csv", trace_csv(*res.vbil));
  else
    write_atomic(out / "chain.csv", chain_csv(res.chain));
  write_atomic(out / "kde.csv", kde_csv(res.chain));
  write_atomic(out / "summary.json", dump(summary));
  write_atomic(out / "manifest.json", dump(manifest));
  res.manifest = std::move(manifest);
  res.summary_doc = std::move(summary);
  return res;
}

void cmd_simulate(const RunConfig& config, const fs::path& data_path, const fs::path& out) {
  const std::uint64_t seed = config.require_seed();
  const Dataset d = simulate(config, derive_seed(seed, kSimTag));
  const fs::path target = data_path.empty() ? out / "data.csv" : data_path;
  write_atomic(target, to_csv(d));
  json m = manifest_base("simulate", config, nullptr);
  m["data"] = {{"path", target.string()}, {"rows", d.n()}, {"columns", d.names}, {"fnv1a", std::to_string(fnv1a(to_csv(d)))}};
  m["seeds"] = {{"master", seed}, {"simulation", derive_seed(seed, kSimTag)}};
  m["theta"] = simulation_theta(config);
  m["outputs"] = {target.filename().string(), "manifest.json"};
  write_atomic(out / "manifest.json", dump(m));
}

void cmd_variance_study(const RunConfig& config, const Dataset& data, const fs::path& out) {
  const std::uint64_t seed = config.require_seed();
  const auto margins = fit_margins(config, data);
  const lik::Likelihood likelihood(config.family, build_bounds(config, data, margins));
  const auto param = config.parameterization();
  std::vector<double> theta;
  if (config.variance.theta) {
    theta = *config.variance.theta;
  } else if (!config.variance.from_summary.empty()) {
    json s;
    try {
      s = json::parse(read_file(config.variance.from_summary));
      for (const auto& p : s.at("parameters")) theta.push_back(p.at("mean").get<double>());
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("cannot read posterior means from " + config.variance.from_summary + ": " + e.what());
    }
  } else {
    throw ConfigError("variance_study needs theta or from_summary");
  }
  if (theta.size() != param.size()) throw ConfigError("variance_study.theta has the wrong length");
  const copula::Model model = param.model_natural(theta);
  const auto start = std::chrono::steady_clock::now();
  const auto cells = diag::loglik_variance_study(likelihood, model, config.variance.points, config.variance.streams,
                                                 config.variance.reps, derive_seed(seed, kStudyTag));
  std::ostringstream table;
  diag::write_variance_table(table, cells);
  write_atomic(out / "variance_table.csv", table.str());
  json m = manifest_base("variance-study", config, &data);
  m["theta"] = theta;
  m["seeds"] = {{"master", seed}, {"study", derive_seed(seed, kStudyTag)}};
  m["timings"] = {{"total_seconds", elapsed(start)}};
  m["outputs"] = {"variance_table.csv", "manifest.json"};
  write_atomic(out / "manifest.json", dump(m));
}

void cmd_compare(const RunConfig& a, const RunConfig& b, const Dataset& data, const fs::path& out) {
  if (a.family != b.family || a.dim() != b.dim() || a.factors != b.factors)
    throw ConfigError("compared configs must share the family, margins and factor count");
  const FitOutcome ra = cmd_fit(a, data, out / "a");
  const FitOutcome rb = cmd_fit(b, data, out / "b");
  auto side = [](const FitOutcome& r) {
    json j;
    j["method"] = r.method;
    if (r.vbil) {
      json params = json::object();
      for (std::size_t k = 0; k < r.names.size(); ++k)
        params[r.names[k]] = {{"mean", number(r.vbil->mean[k])}, {"sd", number(r.vbil->sd[k])}};
      j["parameters"] = params;
      j["mean_iact"] = number(std::nan(""));
      j["seconds"] = r.vbil->seconds;
      j["tnv"] = number(std::nan(""));
    } else {
      j["parameters"] = parameter_table(r.names, r.chain);
      j["mean_iact"] = number(r.summary.mean_iact);
      j["seconds"] = r.summary.seconds;
      j["tnv"] = number(r.summary.tnv);
    }
    return j;
  };
  json report;
  report["baseline"] = "a";
  report["a"] = side(ra);
  report["b"] = side(rb);
  const double rel = ra.vbil || rb.vbil ? std::nan("") : diag::relative_tnv(rb.summary.tnv, ra.summary.tnv);
  report["relative_tnv"] = {{"a", number(ra.vbil || rb.vbil ? std::nan("") : 1.0)}, {"b", number(rel)}};
  report["manifests"] = {{"a", ra.manifest}, {"b", rb.manifest}};
  write_atomic(out / "compare.json", dump(report));
}

void cmd_lpds(const RunConfig& config, const Dataset& data, const fs::path& out) {
  const std::uint64_t seed = config.require_seed();
  const auto margins = fit_margins(config, data);
  const auto bounds = build_bounds(config, data, margins);
  const auto param = config.parameterization();
  diag::LpdsConfig lc;
  lc.folds = config.lpds.folds;
  lc.max_draws = config.lpds.max_draws;
  lc.point_multiplier = config.lpds.point_multiplier;
  lc.sampler = config.sampler.pm;
  lc.seed = derive_seed(seed, kLpdsTag);
  const auto start = std::chrono::steady_clock::now();
  std::optional<pm::TuningReport> report;
  if (param.size() > 0 && !config.estimator.points) {
    const lik::Likelihood likelihood(config.family, bounds);
    const pm::CopulaTarget target(likelihood, param, config.prior);
    const auto eta0 = param.eta(config.sampler.init.value_or(default_init(param)));
    lc.sampler.points = tune(config, target, eta0, seed, lc.sampler, report);
  }
  const auto init = config.sampler.init.value_or(default_init(param));
  const auto result = diag::lpds(bounds, param, config.prior, param.eta(init), lc);
  json doc;
  doc["lpds"] = result.total;
  doc["folds"] = lc.folds;
  doc["per_fold"] = result.per_fold;
  doc["points"] = lc.sampler.points;
  write_atomic(out / "lpds.json", dump(doc));
  json m = manifest_base("lpds", config, &data);
  m["seeds"] = {{"master", seed}, {"lpds", lc.seed}};
  if (report) m["tuning"] = tuning_json(*report);
  m["timings"] = {{"total_seconds", elapsed(start)}};
  m["outputs"] = {"lpds.json", "manifest.json"};
  write_atomic(out / "manifest.json", dump(m));
}

int main(int argc, char** argv) {
  CLI::App app{"Bayesian copula models for discrete and mixed margins"};
  app.require_subcommand(1);
  std::vector<std::string> configs;
  std::string data_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  int threads = 0;
  auto add_common = [&](CLI::App* cmd, bool needs_data, std::size_t n_configs) {
    auto* opt = cmd->add_option("--config", configs, "JSON run configuration")->required();
    opt->expected(static_cast<int>(n_configs));
    auto* d = cmd->add_option("--data", data_path, needs_data ? "Headered CSV data" : "Output CSV path");
    if (needs_data) d->required();
    cmd->add_option("--out", out_dir, "Output directory");
    cmd->add_option("--seed", seed, "Master seed, overrides the config");
    cmd->add_option("--threads", threads, "Worker thread cap")->check(CLI::NonNegativeNumber);
  };
  auto* sim = app.add_subcommand("simulate", "Simulate a data set from a copula model");
  add_common(sim, false, 1);
  auto* fit = app.add_subcommand("fit", "Fit a copula model");
  add_common(fit, true, 1);
  auto* study = app.add_subcommand("variance-study", "Variance of the log-likelihood estimator");
  add_common(study, true, 1);
  auto* cmp = app.add_subcommand("compare", "Fit two configurations and compare efficiency");
  add_common(cmp, true, 2);
  auto* lp = app.add_subcommand("lpds", "Cross-validated log predictive density score");
  add_common(lp, true, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ErrorKind::Config);
  }

  try {
    if (threads > 0) omp_set_num_threads(threads);
    std::vector<RunConfig> cfgs;
    for (const auto& path : configs) {
      cfgs.push_back(load_config(path));
      if (seed) cfgs.back().seed = seed;
      cfgs.back().require_seed();
    }
    const fs::path out(out_dir);
    std::optional<Dataset> data;
    auto load_data = [&] {
      data = read_csv(data_path);
      for (const auto& c : cfgs)
        for (const auto& m : c.margins) data->column_index(m.column);
    };
    if (sim->parsed()) {
      cmd_simulate(cfgs[0], data_path, out);
    } else if (fit->parsed()) {
      load_data();
      const auto r = cmd_fit(cfgs[0], *data, out);
      for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
    } else if (study->parsed()) {
      load_data();
      cmd_variance_study(cfgs[0], *data, out);
    } else if (cmp->parsed()) {
      load_data();
      cmd_compare(cfgs[0], cfgs[1], *data, out);
    } else if (lp->parsed()) {
      load_data();
      cmd_lpds(cfgs[0], *data, out);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace dcop::cli
