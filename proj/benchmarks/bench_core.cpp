#include <benchmark/benchmark.h>

#include "rfim/metrics.hpp"
#include "rfim/network.hpp"
#include "rfim/optim.hpp"
#include "rfim/rng.hpp"

namespace {

std::vector<rfim::Vector> random_batch(std::size_t n, std::size_t dim, std::uint64_t seed) {
  rfim::Rng rng(seed);
  std::vector<rfim::Vector> xs(n, rfim::Vector(dim));
  for (auto& x : xs) {
    for (double& v : x) v = rng.uniform();
  }
  return xs;
}

void BM_BatchNeuronMetric(benchmark::State& state) {
  const std::size_t dim = static_cast<std::size_t>(state.range(0));
  const auto xs = random_batch(64, dim, 1);
  rfim::Rng rng(2);
  rfim::Vector w(dim + 1);
  for (double& v : w) v = 0.1 * rng.normal();
  const auto kind = rfim::ActivationKind::relu_smooth();
  for (auto _ : state) {
    benchmark::DoNotOptimize(rfim::batch_neuron_rfim(kind, w, xs));
  }
}
BENCHMARK(BM_BatchNeuronMetric)->Arg(32)->Arg(128)->Arg(512);

void BM_RegularizedSolve(benchmark::State& state) {
  const std::size_t dim = static_cast<std::size_t>(state.range(0));
  const auto xs = random_batch(2 * dim, dim - 1, 3);
  rfim::Rng rng(4);
  rfim::Vector w(dim);
  for (double& v : w) v = 0.1 * rng.normal();
  const auto g = rfim::batch_neuron_rfim(rfim::ActivationKind::sigm_unit(), w, xs);
  rfim::Vector b(dim);
  for (double& v : b) v = rng.normal();
  const double eps = rfim::trace_scaled_epsilon(g, 1e-2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rfim::regularized_solve(g, b, eps));
  }
}
BENCHMARK(BM_RegularizedSolve)->Arg(64)->Arg(256);

void BM_ForwardBackward(benchmark::State& state) {
  rfim::MlpSpec spec;
  spec.layer_sizes = {static_cast<std::size_t>(state.range(0)), 32, 32, 10};
  const auto params = rfim::init_params(spec, 5);
  const auto xs = random_batch(64, spec.inputs(), 6);
  std::vector<int> labels(64);
  rfim::Rng rng(7);
  for (int& l : labels) l = static_cast<int>(rng.below(10));
  for (auto _ : state) {
    auto trace = rfim::forward(spec, params, xs);
    benchmark::DoNotOptimize(rfim::loss_cross_entropy(spec, trace, labels));
    benchmark::DoNotOptimize(rfim::backward(spec, params, trace, labels));
  }
}
BENCHMARK(BM_ForwardBackward)->Arg(128)->Arg(784);

void BM_RngdEmaUpdate(benchmark::State& state) {
  rfim::MlpSpec spec;
  spec.layer_sizes = {static_cast<std::size_t>(state.range(0)), 32, 32, 10};
  const auto params = rfim::init_params(spec, 8);
  const auto xs = random_batch(64, spec.inputs(), 9);
  auto trace = rfim::forward(spec, params, xs);
  auto rngd = rfim::RngdState::make(spec, 0.995, 100, 1e-2);
  for (auto _ : state) {
    rfim::rngd_ema_update(rngd, spec, trace);
  }
}
BENCHMARK(BM_RngdEmaUpdate)->Arg(128)->Arg(784);

}  // namespace

BENCHMARK_MAIN();
