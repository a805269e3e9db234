#include "cli/config.hpp"

#include <set>

#include "dcop/error.hpp"

namespace dcop::cli {

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

template <class T>
T get(const json& j, const char* key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + "." + key + " is missing or has the wrong type");
  }
}

template <class T>
void maybe(const json& j, const char* key, T& out, const std::string& where) {
  if (j.contains(key)) out = get<T>(j, key, where);
}

template <class T>
void maybe_opt(const json& j, const char* key, std::optional<T>& out, const std::string& where) {
  if (j.contains(key)) out = get<T>(j, key, where);
}

copula::PriorSpec parse_prior(const json& j, copula::Family family) {
  check_keys(j, {"type", "alpha", "beta", "lo", "hi", "mean", "variance"}, "prior");
  const auto type = get<std::string>(j, "type", "prior");
  copula::PriorSpec spec;
  if (type == "inverse-gamma") {
    copula::InverseGammaPrior p;
    maybe(j, "alpha", p.alpha, "prior");
    maybe(j, "beta", p.beta, "prior");
    spec = p;
  } else if (type == "uniform") {
    copula::UniformPrior p;
    maybe(j, "lo", p.lo, "prior");
    maybe(j, "hi", p.hi, "prior");
    spec = p;
  } else if (type == "normal") {
    copula::NormalLoadingsPrior p;
    maybe(j, "mean", p.mean, "prior");
    maybe(j, "variance", p.variance, "prior");
    spec = p;
  } else {
    throw ConfigError("unknown prior type '" + type + "'");
  }
  copula::check_prior(family, spec);
  return spec;
}

MarginSpec parse_margin(const json& j, std::size_t index) {
  const std::string where = "margins[" + std::to_string(index) + "]";
  check_keys(j, {"column", "kind", "p", "mean", "sd", "rate", "max", "support", "probs", "continuous"}, where);
  MarginSpec m;
  m.column = get<std::string>(j, "column", where);
  m.kind = get<std::string>(j, "kind", where);
  maybe_opt(j, "p", m.p, where);
  maybe_opt(j, "mean", m.mean, where);
  maybe_opt(j, "sd", m.sd, where);
  maybe_opt(j, "rate", m.rate, where);
  maybe(j, "max", m.max_value, where);
  maybe(j, "support", m.support, where);
  maybe(j, "probs", m.probs, where);
  maybe(j, "continuous", m.continuous, where);
  static const std::set<std::string> kinds{"bernoulli", "empirical", "gaussian", "fixed", "poisson"};
  if (!kinds.count(m.kind)) throw ConfigError(where + ": unknown margin kind '" + m.kind + "'");
  if (m.kind == "fixed" && (m.support.empty() || m.support.size() != m.probs.size()))
    throw ConfigError(where + ": fixed margins need matching support and probs");
  return m;
}

qmc::CorrDepth parse_depth(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "infinite") return qmc::CorrDepth::infinite();
    throw ConfigError("sampler.depth must be an integer or \"inf\"");
  }
  if (!j.is_number_integer() || j.get<long long>() < 0) throw ConfigError("sampler.depth must be an integer or \"inf\"");
  return qmc::CorrDepth{j.get<unsigned>()};
}

void parse_estimator(const json& j, EstimatorSection& e) {
  check_keys(j, {"stream", "points", "tuning", "pilot_iterations", "pilot_points"}, "estimator");
  if (j.contains("stream")) e.stream = lik::parse_stream(get<std::string>(j, "stream", "estimator").c_str());
  if (j.contains("points")) {
    const auto& p = j.at("points");
    if (p.is_string() && p.get<std::string>() == "auto")
      e.points.reset();
    else if (p.is_number_integer() && p.get<long long>() > 0)
      e.points = p.get<std::size_t>();
    else
      throw ConfigError("estimator.points must be a positive integer or \"auto\"");
  }
  maybe(j, "pilot_iterations", e.pilot_iterations, "estimator");
  maybe(j, "pilot_points", e.pilot_points, "estimator");
  if (j.contains("tuning")) {
    const auto& t = j.at("tuning");
    check_keys(t, {"min_points", "max_points", "pairs", "policy", "block_analytic"}, "estimator.tuning");
    maybe(t, "min_points", e.tuning.min_points, "estimator.tuning");
    maybe(t, "max_points", e.tuning.max_points, "estimator.tuning");
    maybe(t, "pairs", e.tuning.pairs, "estimator.tuning");
    maybe(t, "block_analytic", e.tuning.block_analytic, "estimator.tuning");
    if (t.contains("policy")) {
      const auto p = get<std::string>(t, "policy", "estimator.tuning");
      if (p == "formula")
        e.tuning.policy = pm::TuningPolicy::Formula;
      else if (p == "unit-variance")
        e.tuning.policy = pm::TuningPolicy::UnitVariance;
      else
        throw ConfigError("unknown tuning policy '" + p + "'");
    }
  }
}

void parse_sampler(const json& j, SamplerSection& s) {
  check_keys(j,
             {"method", "variant", "phi", "depth", "refresh", "blocks", "iterations", "burn_in", "thin", "garthwaite",
              "init"},
             "sampler");
  maybe(j, "method", s.method, "sampler");
  if (s.method != "pm" && s.method != "vbil" && s.method != "da") throw ConfigError("sampler.method must be pm, vbil or da");
  if (j.contains("variant")) s.pm.variant = pm::parse_variant(get<std::string>(j, "variant", "sampler"));
  maybe(j, "phi", s.pm.phi, "sampler");
  if (j.contains("depth")) s.pm.depth = parse_depth(j.at("depth"));
  maybe(j, "refresh", s.pm.refresh_probability, "sampler");
  maybe(j, "blocks", s.pm.blocks, "sampler");
  maybe(j, "iterations", s.pm.iterations, "sampler");
  maybe(j, "burn_in", s.pm.burn_in, "sampler");
  maybe(j, "thin", s.pm.thin, "sampler");
  maybe(j, "garthwaite", s.pm.garthwaite, "sampler");
  if (j.contains("init")) s.init = get<std::vector<double>>(j, "init", "sampler");
}

void parse_vbil(const json& j, VbilSection& v) {
  check_keys(j,
             {"samples", "schedule", "a0", "tau", "window", "epsilon", "max_iterations", "control_variate",
              "common_randomness", "init_a", "init_b", "init_sd"},
             "vbil");
  auto& c = v.config;
  maybe(j, "samples", c.samples, "vbil");
  if (j.contains("schedule")) {
    const auto s = get<std::string>(j, "schedule", "vbil");
    if (s == "ratio")
      c.schedule = vbil::Schedule::Ratio;
    else if (s == "harmonic")
      c.schedule = vbil::Schedule::Harmonic;
    else if (s == "constant")
      c.schedule = vbil::Schedule::Constant;
    else
      throw ConfigError("unknown vbil schedule '" + s + "'");
  }
  maybe(j, "a0", c.a0, "vbil");
  maybe(j, "tau", c.tau, "vbil");
  maybe(j, "window", c.window, "vbil");
  maybe(j, "epsilon", c.epsilon, "vbil");
  maybe(j, "max_iterations", c.max_iterations, "vbil");
  maybe(j, "control_variate", c.control_variate, "vbil");
  maybe(j, "common_randomness", c.common_randomness, "vbil");
  maybe(j, "init_a", v.init_a, "vbil");
  maybe(j, "init_b", v.init_b, "vbil");
  maybe(j, "init_sd", v.init_sd, "vbil");
  c.validate();
}

void parse_simulate(const json& j, SimulateSection& s) {
  check_keys(j, {"n", "theta", "loadings"}, "simulate");
  s.n = get<std::size_t>(j, "n", "simulate");
  maybe_opt(j, "theta", s.theta, "simulate");
  maybe_opt(j, "loadings", s.loadings, "simulate");
}

void parse_variance(const json& j, VarianceSection& v) {
  check_keys(j, {"theta", "from_summary", "points", "streams", "reps"}, "variance_study");
  maybe_opt(j, "theta", v.theta, "variance_study");
  maybe(j, "from_summary", v.from_summary, "variance_study");
  maybe(j, "points", v.points, "variance_study");
  maybe(j, "reps", v.reps, "variance_study");
  if (j.contains("streams")) {
    v.streams.clear();
    for (const auto& s : get<std::vector<std::string>>(j, "streams", "variance_study"))
      v.streams.push_back(lik::parse_stream(s.c_str()));
  }
  if (v.reps < 2) throw ConfigError("variance_study.reps must be at least 2");
}

void parse_lpds(const json& j, LpdsSection& l) {
  check_keys(j, {"folds", "max_draws", "point_multiplier"}, "lpds");
  maybe(j, "folds", l.folds, "lpds");
  maybe(j, "max_draws", l.max_draws, "lpds");
  maybe(j, "point_multiplier", l.point_multiplier, "lpds");
}

}  // namespace

std::uint64_t RunConfig::require_seed() const {
  if (!seed) throw ConfigError("a seed is required (config key \"seed\" or --seed)");
  return *seed;
}

RunConfig parse_config(const json& j) {
  check_keys(j, {"family", "factors", "prior", "margins", "estimator", "sampler", "vbil", "simulate", "variance_study",
                 "lpds", "seed"},
             "config");
  RunConfig c;
  c.raw = j;
  try {
    c.family = copula::parse_family(get<std::string>(j, "family", "config"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  maybe(j, "factors", c.factors, "config");
  if (c.family == copula::Family::Gaussian && c.factors == 0 && !j.contains("factors"))
    throw ConfigError("gaussian family needs \"factors\"");
  c.prior = j.contains("prior") ? parse_prior(j.at("prior"), c.family) : copula::default_prior(c.family);
  if (!j.contains("margins") || !j.at("margins").is_array() || j.at("margins").empty())
    throw ConfigError("config needs a non-empty \"margins\" array");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < j.at("margins").size(); ++i) {
    c.margins.push_back(parse_margin(j.at("margins")[i], i));
    if (!seen.insert(c.margins.back().column).second)
      throw ConfigError("column '" + c.margins.back().column + "' appears twice in margins");
  }
  if (c.family != copula::Family::Gaussian && c.margins.size() < 2) throw ConfigError("copula needs at least two margins");
  if (c.family == copula::Family::Gaussian && c.factors >= c.margins.size())
    throw ConfigError("factor count must be below the number of margins");
  if (j.contains("estimator")) parse_estimator(j.at("estimator"), c.estimator);
  if (j.contains("sampler")) parse_sampler(j.at("sampler"), c.sampler);
  if (j.contains("vbil")) parse_vbil(j.at("vbil"), c.vbil);
  if (j.contains("simulate")) parse_simulate(j.at("simulate"), c.simulate);
  if (j.contains("variance_study")) parse_variance(j.at("variance_study"), c.variance);
  if (j.contains("lpds")) parse_lpds(j.at("lpds"), c.lpds);
  if (j.contains("seed")) c.seed = get<std::uint64_t>(j, "seed", "config");
  c.sampler.pm.stream = c.estimator.stream;
  if (c.estimator.points) c.sampler.pm.points = *c.estimator.points;
  c.vbil.config.stream = c.estimator.stream;
  if (c.estimator.points) c.vbil.config.points = *c.estimator.points;
  return c;
}

RunConfig load_config(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("cannot parse " + path + ": " + e.what());
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  return parse_config(j);
}

std::vector<double> flatten_loadings(const std::vector<std::vector<double>>& rows, std::size_t factors) {
  std::vector<double> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != factors) throw ConfigError("loadings rows must have one entry per factor");
    for (std::size_t c = 0; c < factors && c <= i; ++c) out.push_back(rows[i][c]);
  }
  return out;
}

}  // namespace dcop::cli
