#include <benchmark/benchmark.h>

#include <memory>
#include <random>

#include <gridquant/algorithms.hpp>
#include <gridquant/channel.hpp>
#include <gridquant/graph.hpp>
#include <gridquant/problems.hpp>
#include <gridquant/quantizer.hpp>
#include <gridquant/runner.hpp>
#include <gridquant/spectral.hpp>

using namespace gridquant;

static void BM_Quantize(benchmark::State& state) {
  const auto d = static_cast<Eigen::Index>(state.range(0));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const GridSpec grid(Eigen::VectorXd::Zero(d), 1.0, 12);
  const Eigen::VectorXd c = Eigen::VectorXd::NullaryExpr(d, [&] { return u(rng); });
  for (auto _ : state) benchmark::DoNotOptimize(quantize(c, grid));
  state.SetItemsProcessed(state.iterations() * d);
}
BENCHMARK(BM_Quantize)->Arg(16)->Arg(256)->Arg(4096);

static void BM_PackBits(benchmark::State& state) {
  const GridSpec grid(Eigen::VectorXd::Zero(1024), 1.0, 11);
  std::vector<std::uint64_t> idx(1024);
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = (i * 37) % 2048;
  for (auto _ : state) benchmark::DoNotOptimize(pack_bits(idx, grid.bits()));
}
BENCHMARK(BM_PackBits);

static void BM_EigSym(benchmark::State& state) {
  const auto g = random_geometric_graph(static_cast<std::size_t>(state.range(0)), 0.4, 2024);
  const Eigen::MatrixXd lap = laplacian(g);
  for (auto _ : state) benchmark::DoNotOptimize(eig_sym(lap));
}
BENCHMARK(BM_EigSym)->Arg(10)->Arg(20)->Arg(50);

static void BM_QuantizedGdRun(benchmark::State& state) {
  const auto q = std::make_shared<QuadraticProblem>(random_quadratic(20, 20, 1.0, 10.0, 3));
  const DecentralizedGD gd(q);
  QuantizedRunConfig cfg;
  cfg.bits = 12;
  cfg.horizon = 50;
  cfg.bound_d = q->minimizer()->norm();
  for (auto _ : state) benchmark::DoNotOptimize(run_quantized(gd, cfg));
  state.SetItemsProcessed(state.iterations() * 50);
}
BENCHMARK(BM_QuantizedGdRun);

static void BM_DualStep(benchmark::State& state) {
  const auto q = std::make_shared<QuadraticProblem>(random_quadratic(20, 5, 1.0, 4.0, 4));
  const DualDecomposition dual(q, random_geometric_graph(20, 0.3, 2024));
  Eigen::VectorXd x = dual.initial_state();
  for (auto _ : state) {
    x = dual.step(x);
    benchmark::DoNotOptimize(x.data());
  }
}
BENCHMARK(BM_DualStep);

static void BM_SampleRetransmissions(benchmark::State& state) {
  std::mt19937_64 rng(5);
  const auto links = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sample_retransmissions(links, 0.05, rng));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SampleRetransmissions)->Arg(2)->Arg(20)->Arg(400);

BENCHMARK_MAIN();
