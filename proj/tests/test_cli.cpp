#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "cli/dataset.hpp"
#include "cli/output.hpp"
#include "dcop/error.hpp"
#include "support.hpp"

using namespace dcop;
using dcop::cli::json;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() / ("dcop_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "dcopula");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::main(static_cast<int>(argv.size()), argv.data());
}

json binary_config(const std::string& family, std::size_t J, std::size_t n, double theta) {
  json margins = json::array();
  for (std::size_t j = 0; j < J; ++j) margins.push_back({{"column", "x" + std::to_string(j + 1)}, {"kind", "bernoulli"}, {"p", 0.5}});
  return {{"family", family}, {"margins", margins}, {"simulate", {{"n", n}, {"theta", theta}}}, {"seed", 12345}};
}

fs::path write_json(const TempDir& dir, const std::string& name, const json& j) {
  const fs::path p = dir / name;
  std::ofstream(p) << j.dump(2);
  return p;
}

json read_json(const fs::path& p) { return json::parse(cli::read_file(p)); }

cli::Dataset simulated(const json& config, const TempDir& dir) {
  const auto cfg = write_json(dir, "sim.json", config);
  REQUIRE(run_cli({"simulate", "--config", cfg.string(), "--data", (dir / "data.csv").string(), "--out", dir.path().string()}) == 0);
  return cli::read_csv((dir / "data.csv").string());
}

std::vector<double> column(const cli::Dataset& d, std::size_t j) {
  std::vector<double> x(d.n());
  for (std::size_t i = 0; i < d.n(); ++i) x[i] = d.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return x;
}

json small_fit(std::size_t J) {
  json c = binary_config("clayton", J, 200, 1.0);
  c["estimator"] = {{"stream", "rqmc"}, {"points", 8}};
  c["sampler"] = {{"method", "pm"}, {"variant", "block"}, {"blocks", 10}, {"iterations", 300}, {"burn_in", 100}};
  return c;
}

}  // namespace

TEST_CASE("simulate is deterministic and has the right margins") {
  TempDir dir;
  const auto cfg = write_json(dir, "c.json", binary_config("clayton", 10, 1000, 1.0));
  const auto a = (dir / "a.csv").string(), b = (dir / "b.csv").string();
  REQUIRE(run_cli({"simulate", "--config", cfg.string(), "--data", a, "--out", dir.path().string()}) == 0);
  REQUIRE(run_cli({"simulate", "--config", cfg.string(), "--data", b, "--out", dir.path().string()}) == 0);
  CHECK(cli::read_file(a) == cli::read_file(b));
  const auto d = cli::read_csv(a);
  CHECK(d.n() == 1000);
  CHECK(d.names.size() == 10);
  for (std::size_t j = 0; j < 10; ++j) CHECK(std::abs(testing::mean(column(d, j)) - 0.5) < 3 * 0.5 / std::sqrt(1000.0));
  const auto m = read_json(dir / "manifest.json");
  CHECK(m["command"] == "simulate");
  CHECK(m["seeds"]["master"] == 12345);
}

TEST_CASE("simulated Gumbel at theta one has uncorrelated columns") {
  TempDir dir;
  const auto d = simulated(binary_config("gumbel", 4, 4000, 1.0), dir);
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = a + 1; b < 4; ++b)
      CHECK(std::abs(testing::correlation(column(d, a), column(d, b))) < 3 / std::sqrt(4000.0));
}

TEST_CASE("simulated Clayton pair matches the corner probability") {
  TempDir dir;
  const std::size_t n = 20000;
  const auto d = simulated(binary_config("clayton", 2, n, 1.0), dir);
  double both = 0.0;
  for (std::size_t i = 0; i < n; ++i) both += d.values(static_cast<Eigen::Index>(i), 0) * d.values(static_cast<Eigen::Index>(i), 1);
  const double p_hat = both / static_cast<double>(n);
  // P(U1 > 1/2, U2 > 1/2) = 1 - 1/2 - 1/2 + C(1/2, 1/2).
  const lik::ObservationBounds box{{0.5, 0.5}, {1.0, 1.0}, {0.0, 0.0}, {1, 1}};
  const double p = testing::inclusion_exclusion(box, [](std::span<const double> u) { return copula::Clayton(1.0).cdf(u); });
  CHECK(p == doctest::Approx(1.0 / 3.0));
  CHECK(std::abs(p_hat - p) < 3 * std::sqrt(p * (1 - p) / static_cast<double>(n)));
}

TEST_CASE("fit reruns are bit-identical and artifacts are complete") {
  TempDir dir;
  const json config = small_fit(4);
  simulated(config, dir);
  const auto cfg = write_json(dir, "fit.json", config);
  const auto data = (dir / "data.csv").string();
  REQUIRE(run_cli({"fit", "--config", cfg.string(), "--data", data, "--out", (dir / "r1").string()}) == 0);
  REQUIRE(run_cli({"fit", "--config", cfg.string(), "--data", data, "--out", (dir / "r2").string(), "--threads", "1"}) == 0);
  CHECK(cli::read_file(dir / "r1" / "chain.csv") == cli::read_file(dir / "r2" / "chain.csv"));
  for (const char* f : {"chain.csv", "kde.csv", "summary.json", "manifest.json"}) CHECK(fs::exists(dir / "r1" / f));
  const auto manifest = read_json(dir / "r1" / "manifest.json");
  CHECK(manifest["points"] == 8);
  CHECK(manifest["config"]["seed"] == 12345);
  CHECK(manifest["data"]["fnv1a"] == std::to_string(cli::fnv1a(cli::read_file(data))));

  // Regenerate from the manifest alone.
  const auto replay = write_json(dir, "replay.json", manifest["config"]);
  REQUIRE(run_cli({"fit", "--config", replay.string(), "--data", data, "--out", (dir / "r3").string()}) == 0);
  CHECK(cli::read_file(dir / "r3" / "chain.csv") == cli::read_file(dir / "r1" / "chain.csv"));

  // A different seed changes the chain.
  REQUIRE(run_cli({"fit", "--config", cfg.string(), "--data", data, "--out", (dir / "r4").string(), "--seed", "9"}) == 0);
  CHECK(cli::read_file(dir / "r4" / "chain.csv") != cli::read_file(dir / "r1" / "chain.csv"));
}

TEST_CASE("fit recovers theta from simulated Clayton data") {
  TempDir dir;
  json config = binary_config("clayton", 10, 1000, 1.0);
  simulated(config, dir);
  config["estimator"] = {{"stream", "rqmc"}, {"points", 16}};
  config["sampler"] = {{"method", "pm"}, {"variant", "block"}, {"blocks", 100}, {"iterations", 2000}, {"burn_in", 500}};
  const auto cfg = write_json(dir, "fit.json", config);
  REQUIRE(run_cli({"fit", "--config", cfg.string(), "--data", (dir / "data.csv").string(), "--out", dir.path().string()}) == 0);
  const auto s = read_json(dir / "summary.json");
  const double mean = s["parameters"][0]["mean"].get<double>();
  MESSAGE("posterior mean " << mean);
  CHECK(mean >= 0.9);
  CHECK(mean <= 1.2);
}

TEST_CASE("auto-tuned fit records the tuning report") {
  TempDir dir;
  json config = small_fit(3);
  simulated(config, dir);
  config["estimator"] = {{"stream", "rqmc"}, {"points", "auto"}, {"pilot_iterations", 100}, {"pilot_points", 32},
                         {"tuning", {{"pairs", 20}, {"max_points", 64}}}};
  const auto cfg = write_json(dir, "fit.json", config);
  REQUIRE(run_cli({"fit", "--config", cfg.string(), "--data", (dir / "data.csv").string(), "--out", dir.path().string()}) == 0);
  const auto m = read_json(dir / "manifest.json");
  REQUIRE(m.contains("tuning"));
  CHECK(m["points"] == m["tuning"]["points"]);
}

TEST_CASE("VBIL and DA fits write their artifacts") {
  TempDir dir;
  json config = small_fit(3);
  simulated(config, dir);
  config["sampler"]["method"] = "vbil";
  config["vbil"] = {{"samples", 20}, {"max_iterations", 30}};
  const auto v = write_json(dir, "vbil.json", config);
  REQUIRE(run_cli({"fit", "--config", v.string(), "--data", (dir / "data.csv").string(), "--out", (dir / "v").string()}) == 0);
  CHECK(fs::exists(dir / "v" / "trace.csv"));
  CHECK(read_json(dir / "v" / "summary.json")["method"] == "vbil");
  config["sampler"] = {{"method", "da"}, {"iterations", 200}};
  config.erase("vbil");
  const auto d = write_json(dir, "da.json", config);
  REQUIRE(run_cli({"fit", "--config", d.string(), "--data", (dir / "data.csv").string(), "--out", (dir / "d").string()}) == 0);
  CHECK(read_json(dir / "d" / "summary.json")["variant"] == "data-augmentation");
}

TEST_CASE("configuration errors exit with code 2 before any output") {
  TempDir dir;
  const json config = small_fit(3);
  simulated(config, dir);
  const auto data = (dir / "data.csv").string();

  json missing = config;
  missing["margins"][2]["column"] = "nope";
  const auto m = write_json(dir, "missing.json", missing);
  CHECK(run_cli({"fit", "--config", m.string(), "--data", data, "--out", (dir / "m").string()}) == 2);
  CHECK(!fs::exists(dir / "m"));

  json typo = config;
  typo["sampler"]["iteration"] = 10;
  const auto t = write_json(dir, "typo.json", typo);
  CHECK(run_cli({"fit", "--config", t.string(), "--data", data, "--out", (dir / "t").string()}) == 2);

  json seedless = config;
  seedless.erase("seed");
  const auto s = write_json(dir, "seedless.json", seedless);
  CHECK(run_cli({"fit", "--config", s.string(), "--data", data, "--out", (dir / "s").string()}) == 2);
  CHECK(run_cli({"fit", "--config", s.string(), "--data", data, "--out", (dir / "s").string(), "--seed", "3"}) == 0);

  CHECK(run_cli({"fit", "--config", m.string()}) == 2);
  CHECK(run_cli({"bogus"}) == 2);
}

TEST_CASE("malformed data exits with code 3") {
  TempDir dir;
  const auto cfg = write_json(dir, "c.json", small_fit(3));
  std::ofstream(dir / "bad.csv") << "x1,x2,x3\n1,0\n";
  CHECK(run_cli({"fit", "--config", cfg.string(), "--data", (dir / "bad.csv").string(), "--out", dir.path().string()}) == 3);
}

TEST_CASE("variance study under independence gives a zero table of the expected shape") {
  TempDir dir;
  json config = small_fit(4);
  simulated(config, dir);
  config["family"] = "gaussian";
  config["factors"] = 0;
  config["variance_study"] = {{"theta", json::array()}, {"reps", 3}};
  const auto cfg = write_json(dir, "v.json", config);
  REQUIRE(run_cli({"variance-study", "--config", cfg.string(), "--data", (dir / "data.csv").string(), "--out",
                   dir.path().string()}) == 0);
  std::ifstream in(dir / "variance_table.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "M,var_mc,var_rqmc,se_mc,se_rqmc,zeros_mc,zeros_rqmc");
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line); ++rows) {
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    std::getline(ss, cell, ',');
    CHECK(std::abs(std::stod(cell)) < 1e-20);
    std::getline(ss, cell, ',');
    CHECK(std::abs(std::stod(cell)) < 1e-20);
  }
  CHECK(rows == 6);
}

TEST_CASE("variance study standard errors scale with the square root of reps") {
  TempDir dir;
  json config = small_fit(4);
  simulated(config, dir);
  auto se_of = [&](std::size_t reps, const std::string& sub) {
    config["variance_study"] = {{"theta", {1.0}}, {"reps", reps}, {"points", {16}}, {"streams", {"mc"}}};
    const auto cfg = write_json(dir, sub + ".json", config);
    REQUIRE(run_cli({"variance-study", "--config", cfg.string(), "--data", (dir / "data.csv").string(), "--out",
                     (dir / sub).string()}) == 0);
    std::ifstream in(dir / sub / "variance_table.csv");
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    std::stringstream ss(line);
    std::string m, var, se;
    std::getline(ss, m, ',');
    std::getline(ss, var, ',');
    std::getline(ss, se, ',');
    return std::stod(se);
  };
  const double a = se_of(200, "a");
  const double b = se_of(800, "b");
  CHECK(b / a == doctest::Approx(0.5).epsilon(0.25));
}

TEST_CASE("compare reports both runs and their manifests") {
  TempDir dir;
  const json config = small_fit(3);
  simulated(config, dir);
  const auto a = write_json(dir, "a.json", config);
  REQUIRE(run_cli({"compare", "--config", a.string(), a.string(), "--data", (dir / "data.csv").string(), "--out",
                   dir.path().string()}) == 0);
  const auto r = read_json(dir / "compare.json");
  CHECK(r["relative_tnv"]["a"] == 1.0);
  const double rel = r["relative_tnv"]["b"].get<double>();
  CHECK(rel > 0.5);
  CHECK(rel < 2.0);
  CHECK(r["manifests"]["a"]["config"] == r["manifests"]["b"]["config"]);
  CHECK(r["a"]["parameters"] == r["b"]["parameters"]);

  json other = config;
  other["family"] = "gumbel";
  const auto b = write_json(dir, "b.json", other);
  CHECK(run_cli({"compare", "--config", a.string(), b.string(), "--data", (dir / "data.csv").string(), "--out",
                 (dir / "x").string()}) == 2);
}

TEST_CASE("lpds command") {
  TempDir dir;
  json config = small_fit(3);
  simulated(config, dir);
  config["sampler"]["iterations"] = 600;
  config["lpds"] = {{"folds", 3}, {"max_draws", 20}};
  const auto cfg = write_json(dir, "l.json", config);
  REQUIRE(run_cli({"lpds", "--config", cfg.string(), "--data", (dir / "data.csv").string(), "--out", dir.path().string()}) == 0);
  const auto r = read_json(dir / "lpds.json");
  CHECK(r["per_fold"].size() == 3);
  double s = 0.0;
  for (const auto& v : r["per_fold"]) s += v.get<double>();
  CHECK(r["lpds"].get<double>() == doctest::Approx(s));
  CHECK(r["lpds"].get<double>() < 0.0);
}

TEST_CASE("number formatting round-trips") {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, 123456789.123456789, -2.5})
    CHECK(std::stod(cli::fmt(x)) == x);
}

TEST_CASE("shipped configs parse and simulate") {
  std::size_t count = 0;
  for (const auto& entry : fs::directory_iterator(DCOP_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    CAPTURE(entry.path().string());
    const auto cfg = cli::load_config(entry.path().string());
    const auto data = cli::simulate(cfg, cfg.require_seed());
    CHECK(data.n() == cfg.simulate.n);
    CHECK(cli::build_bounds(cfg, data, cli::fit_margins(cfg, data)).size() == data.n());
    ++count;
  }
  CHECK(count >= 4);
}

TEST_CASE("integer fields accept signed JSON integers") {
  json c = binary_config("clayton", 3, 10, 1.0);
  c["estimator"] = {{"points", 32}};
  c["sampler"] = {{"variant", "correlated-rqmc"}, {"depth", 4}};
  const auto cfg = cli::parse_config(c);
  CHECK(*cfg.estimator.points == 32);
  CHECK(cfg.sampler.pm.depth == qmc::CorrDepth{4});
  c["estimator"]["points"] = -1;
  CHECK_THROWS_AS(cli::parse_config(c), ConfigError);
}
