// OpenMP kernels against their serial references. Wall time is reported
// because CPU time only counts the calling thread.

#include <benchmark/benchmark.h>

#include <vector>

#include "dcop/copula.hpp"
#include "dcop/likelihood.hpp"
#include "dcop/marginals.hpp"
#include "dcop/qmc.hpp"
#include "dcop/rng.hpp"

using namespace dcop;

namespace {

// Clayton J=10 with Bernoulli(0.5) margins.
std::vector<lik::ObservationBounds> binary_data(std::size_t n) {
  const copula::Model model = copula::Clayton(1.0);
  const auto u = copula::sample_copula(model, n, 10, 42);
  const std::vector<lik::Marginal> margins(10, lik::Marginal::bernoulli(0.5));
  std::vector<lik::ObservationBounds> out;
  std::vector<double> x(10);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < 10; ++j) x[j] = u(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > 0.5 ? 1.0 : 0.0;
    out.push_back(lik::bounds_from_data(x, margins));
  }
  return out;
}

const lik::Likelihood& testbed() {
  static const lik::Likelihood L(copula::Family::Clayton, binary_data(1000));
  return L;
}

template <bool Serial>
void BM_Loglik(benchmark::State& state) {
  const auto& L = testbed();
  const copula::Model model = copula::Clayton(1.0);
  const auto aux = L.make_aux(lik::StreamKind::RQMC, static_cast<std::size_t>(state.range(0)), 7);
  for (auto _ : state) {
    const auto est = Serial ? L.evaluate_serial(model, aux) : L.evaluate(model, aux);
    benchmark::DoNotOptimize(est.log_total);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(L.n()));
}

template <bool Serial>
void BM_Scramble(benchmark::State& state) {
  const auto net = qmc::generate_net({2, static_cast<unsigned>(state.range(0)), 16, static_cast<unsigned>(state.range(0))});
  const qmc::ScrambleTree tree(11);
  for (auto _ : state) {
    const auto p = Serial ? qmc::owen_scramble_serial(net, tree) : qmc::owen_scramble(net, tree);
    benchmark::DoNotOptimize(p.values.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(net.values.size()));
}

}  // namespace

BENCHMARK(BM_Loglik<true>)->Name("loglik/serial")->Arg(16)->Arg(64)->Arg(256)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Loglik<false>)->Name("loglik/openmp")->Arg(16)->Arg(64)->Arg(256)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Scramble<true>)->Name("scramble/serial")->Arg(10)->Arg(14)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Scramble<false>)->Name("scramble/openmp")->Arg(10)->Arg(14)->UseRealTime()->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
