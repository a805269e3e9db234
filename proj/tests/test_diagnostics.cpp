#include <doctest.h>

#include <boost/math/distributions/fisher_f.hpp>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "dcop/diagnostics.hpp"
#include "dcop/error.hpp"
#include "support.hpp"

using namespace dcop;
using namespace dcop::diag;

namespace {

std::vector<double> ar1(double phi, std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed);
  std::vector<double> x(n);
  double v = rng.normal() / std::sqrt(1 - phi * phi);
  for (std::size_t i = 0; i < n; ++i) {
    v = phi * v + rng.normal();
    x[i] = v;
  }
  return x;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("IACT of white noise is one") {
  const auto x = ar1(0.0, 100000, 1);
  const auto r = iact(x);
  CHECK(r.defined);
  CHECK(r.value > 0.9);
  CHECK(r.value < 1.1);
}

TEST_CASE("IACT of AR(1) matches (1 + phi) / (1 - phi)") {
  for (double phi : {0.0, 0.5, 0.9}) {
    const auto r = iact(ar1(phi, 1000000, 2 + static_cast<std::uint64_t>(phi * 10)));
    CHECK(r.defined);
    CHECK(r.value == doctest::Approx((1 + phi) / (1 - phi)).epsilon(0.1));
    CHECK(static_cast<double>(r.window) >= 5 * r.value);
  }
}

TEST_CASE("IACT guards") {
  const std::vector<double> flat(500, 2.0);
  const auto r = iact(flat);
  CHECK(!r.defined);
  CHECK(std::isnan(r.value));
  CHECK_THROWS(iact(std::vector<double>(99, 0.0)));
}

TEST_CASE("TNV arithmetic") {
  CHECK(tnv(4.31, 1817.5) == doctest::Approx(7833.425).epsilon(1e-12));
  CHECK(std::round(tnv(4.31, 1817.5) * 10) / 10 == 7833.4);
  CHECK(tnv(1.0, 12.5) == 12.5);
  CHECK(relative_tnv(tnv(3.0, 7.0), tnv(3.0, 7.0)) == 1.0);
  for (double k : {0.25, 2.0, 1024.0})
    CHECK(relative_tnv(tnv(3.0, 7.0 * k), tnv(5.0, 11.0 * k)) == relative_tnv(tnv(3.0, 7.0), tnv(5.0, 11.0)));
  CHECK(relative_tnv(tnv(3.0, 7.0 * 3.7), tnv(5.0, 11.0 * 3.7)) ==
        doctest::Approx(relative_tnv(tnv(3.0, 7.0), tnv(5.0, 11.0))).epsilon(1e-15));
}

TEST_CASE("chain summary") {
  pm::ChainOutput chain;
  chain.names = {"a", "b"};
  const auto x = ar1(0.5, 4000, 11);
  for (std::size_t i = 0; i < x.size(); ++i) {
    chain.draws.push_back({x[i], 3.0});
    chain.accepted.push_back(i % 4 == 0);
  }
  chain.total_steps = 4000;
  chain.total_accepted = 1000;
  chain.seconds = 2.0;
  const auto s = summarize(chain);
  CHECK(s.draws == 4000);
  CHECK(s.acceptance == doctest::Approx(0.25));
  CHECK(s.parameters[0].mean == doctest::Approx(testing::mean(x)));
  CHECK(s.parameters[0].q025 < s.parameters[0].mean);
  CHECK(s.parameters[0].q975 > s.parameters[0].mean);
  CHECK(!s.parameters[1].iact.defined);
  CHECK(s.mean_iact == doctest::Approx(s.parameters[0].iact.value));
  CHECK(s.tnv == doctest::Approx(2.0 * s.mean_iact));
}

TEST_CASE("variance study under independence is zero") {
  const auto model = copula::GaussianFactor::independence(5);
  const lik::Likelihood L(copula::Family::Gaussian, testing::binary_data(model, 100, 5, 21));
  const std::vector<std::size_t> grid{4, 16};
  const std::vector<lik::StreamKind> streams{lik::StreamKind::MC, lik::StreamKind::RQMC};
  for (const auto& c : loglik_variance_study(L, model, grid, streams, 30, 22)) {
    CHECK(c.variance == doctest::Approx(0.0).scale(1e-20));
    CHECK(c.zeros == 0);
  }
}

TEST_CASE("variance study falls as M doubles") {
  const lik::Likelihood L(copula::Family::Clayton, testing::binary_data(copula::Clayton(1.0), 200, 10, 31));
  const std::vector<std::size_t> grid{8, 16, 32, 64};
  const std::vector<lik::StreamKind> streams{lik::StreamKind::MC, lik::StreamKind::RQMC};
  const auto cells = loglik_variance_study(L, copula::Clayton(1.0), grid, streams, 200, 32);
  const boost::math::fisher_f F(199, 199);
  const double crit = boost::math::quantile(F, 0.95);
  for (std::size_t k = 0; k + 1 < cells.size(); ++k) {
    if (cells[k].stream != cells[k + 1].stream) continue;
    CHECK(cells[k + 1].variance / cells[k].variance < crit);
  }
}

TEST_CASE("RQMC is no worse than MC at large M on a 50-dimensional Clayton testbed") {
  const lik::Likelihood L(copula::Family::Clayton, testing::binary_data(copula::Clayton(1.0), 60, 50, 41));
  const std::vector<std::size_t> grid{1024};
  const std::vector<lik::StreamKind> streams{lik::StreamKind::MC, lik::StreamKind::RQMC};
  const auto cells = loglik_variance_study(L, copula::Clayton(1.0), grid, streams, 30, 42);
  MESSAGE("MC " << cells[0].variance << ", RQMC " << cells[1].variance);
  // One-sided F test at 5%; at this scale the two streams are close.
  const boost::math::fisher_f F(29, 29);
  CHECK(cells[1].variance / cells[0].variance < boost::math::quantile(F, 0.95));
}

TEST_CASE("variance table layout and standard errors") {
  const lik::Likelihood L(copula::Family::Clayton, testing::binary_data(copula::Clayton(1.0), 50, 10, 51));
  const std::vector<std::size_t> grid{256, 512, 1024, 2048, 4096, 8192};
  const std::vector<lik::StreamKind> streams{lik::StreamKind::MC, lik::StreamKind::RQMC};
  const auto cells = loglik_variance_study(L, copula::Clayton(1.0), grid, streams, 3, 52);
  std::ostringstream os;
  write_variance_table(os, cells);
  const auto rows = lines(os.str());
  REQUIRE(rows.size() == 7);
  CHECK(rows[0] == "M,var_mc,var_rqmc,se_mc,se_rqmc,zeros_mc,zeros_rqmc");
  CHECK(rows[1].rfind("256,", 0) == 0);
  CHECK(rows[6].rfind("8192,", 0) == 0);
  for (const auto& c : cells) CHECK(c.se == doctest::Approx(c.variance * std::sqrt(2.0 / (c.reps - 1))));
  CHECK_THROWS_AS(loglik_variance_study(L, copula::Clayton(1.0), grid, streams, 1, 52), ConfigError);
}

TEST_CASE("fold assignment is balanced and seed-deterministic") {
  const auto a = fold_assignment(103, 5, 61);
  CHECK(a == fold_assignment(103, 5, 61));
  CHECK(a != fold_assignment(103, 5, 62));
  std::vector<std::size_t> counts(5, 0);
  for (auto f : a) ++counts[f];
  for (auto c : counts) CHECK((c == 20 || c == 21));
  CHECK_THROWS_AS(fold_assignment(3, 5, 1), ConfigError);
}

TEST_CASE("leave-one-out LPDS matches a direct computation") {
  const copula::Parameterization param(copula::Family::Clayton, 3);
  const auto data = testing::binary_data(copula::Clayton(1.0), 5, 3, 71);
  LpdsConfig cfg;
  cfg.folds = 5;
  cfg.sampler.points = 8;
  cfg.sampler.iterations = 2000;
  cfg.max_draws = 50;
  cfg.seed = 72;
  const auto eta0 = param.eta(std::vector<double>{1.0});
  const auto res = lpds(data, param, copula::InverseGammaPrior{}, eta0, cfg);
  REQUIRE(res.per_fold.size() == 5);
  double total = 0.0;
  for (std::size_t b = 0; b < 5; ++b) {
    std::vector<lik::ObservationBounds> train, test;
    for (std::size_t t = 0; t < 5; ++t) (res.fold_of[t] == b ? test : train).push_back(data[t]);
    CHECK(test.size() == 1);
    const lik::Likelihood train_lik(copula::Family::Clayton, train);
    const pm::CopulaTarget target(train_lik, param, copula::InverseGammaPrior{});
    pm::PMConfig pc = cfg.sampler;
    pc.seed = derive_seed(cfg.seed, b, 1);
    const auto chain = pm::Sampler(target, pc).run(eta0);
    std::vector<std::vector<double>> draws;
    for (std::size_t k = 0; k < 50; ++k) draws.push_back(chain.draws[k * chain.draws.size() / 50]);
    const lik::Likelihood test_lik(copula::Family::Clayton, test);
    const auto lp = predictive_log_density(test_lik, param, draws, 8 * 4, pc.stream, derive_seed(cfg.seed, b, 2));
    CHECK(res.per_fold[b] == lp[0]);
    total += lp[0];
  }
  CHECK(res.total == total);
}

TEST_CASE("LPDS prefers the true one-factor model over independence") {
  const copula::Parameterization one(copula::Family::Gaussian, 4, 1);
  const copula::Parameterization zero(copula::Family::Gaussian, 4, 0);
  const std::vector<double> truth{1.2, 1.0, 0.8, 1.1};
  const auto data = testing::binary_data(one.model(one.eta(truth)), 200, 4, 81);
  LpdsConfig cfg;
  cfg.sampler.points = 8;
  cfg.sampler.iterations = 2500;
  cfg.sampler.burn_in = 500;
  cfg.max_draws = 50;
  cfg.seed = 82;
  const auto a = lpds(data, one, copula::NormalLoadingsPrior{}, one.eta(truth), cfg);
  const auto b = lpds(data, zero, copula::NormalLoadingsPrior{}, std::vector<double>{}, cfg);
  MESSAGE("one-factor " << a.total << ", independence " << b.total);
  CHECK(a.total > b.total);
  CHECK(a.fold_of == b.fold_of);
}

TEST_CASE("kernel density estimate") {
  CounterRng rng(91);
  std::vector<double> x(100000);
  for (auto& v : x) v = rng.normal();
  const auto curve = kde(x);
  CHECK(trapezoid(curve.grid, curve.density) == doctest::Approx(1.0).epsilon(1e-3));
  double worst = 0.0;
  for (std::size_t i = 0; i < curve.grid.size(); ++i)
    worst = std::max(worst, std::abs(curve.density[i] - norm_pdf(curve.grid[i])));
  CHECK(worst < 0.02);
  CHECK(curve.bandwidth == doctest::Approx(silverman_bandwidth(x)));
  CHECK_THROWS_AS(kde(std::vector<double>(100, 1.0)), DataError);
  CHECK_THROWS_AS(kde(std::vector<double>(10, 1.0)), DataError);
}
