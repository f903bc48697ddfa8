#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "driveintent/hmm.hpp"
#include "driveintent/kmeans.hpp"
#include "driveintent/rng.hpp"

using namespace driveintent;

namespace {

DiscreteHmm random_model(int q, int k, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  auto row = [&](int n) {
    std::vector<double> r(n);
    double s = 0.0;
    for (double& v : r) {
      v = u(rng);
      s += v;
    }
    for (double& v : r) v /= s;
    return r;
  };
  DiscreteHmm m;
  m.num_states = q;
  m.num_symbols = k;
  m.initial = row(q);
  for (int i = 0; i < q; ++i) {
    auto a = row(q);
    m.transition.insert(m.transition.end(), a.begin(), a.end());
    auto b = row(k);
    m.emission.insert(m.emission.end(), b.begin(), b.end());
  }
  return m;
}

}  // namespace

static void BM_ForwardBackward(benchmark::State& state) {
  const int q = static_cast<int>(state.range(0));
  auto rng = make_rng(1);
  const auto model = random_model(q, 8, rng);
  std::uniform_int_distribution<int> sym(0, 7);
  std::vector<int> seq(9);
  for (int& o : seq) o = sym(rng);
  for (auto _ : state) {
    auto post = forward_backward(model, seq);
    benchmark::DoNotOptimize(post.log_likelihood);
  }
}
BENCHMARK(BM_ForwardBackward)->Arg(2)->Arg(4)->Arg(8);

static void BM_TrainDiscretePooled(benchmark::State& state) {
  auto rng = make_rng(2);
  const auto gen = random_model(2, 6, rng);
  std::uniform_int_distribution<int> sym(0, 5);
  std::vector<std::vector<int>> seqs(140, std::vector<int>(9));
  for (auto& seq : seqs)
    for (int& o : seq) o = sym(rng);
  TrainOptions opts;
  opts.max_iter = 20;
  for (auto _ : state) {
    auto result = train_discrete(seqs, 4, 6, opts);
    benchmark::DoNotOptimize(result.iterations);
  }
}
BENCHMARK(BM_TrainDiscretePooled);

static void BM_GmmEmission(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  GmmParams params = GmmParams::zeros(n, 4, 2);
  auto rng = make_rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < n; ++i)
    for (int q = 0; q < 4; ++q)
      for (int m = 0; m < 2; ++m) {
        params.w(i, q, m) = 0.5;
        params.mu(i, q, m) = g(rng);
        params.sigma(i, q, m) = 0.5 + std::abs(g(rng));
      }
  std::vector<double> row(n);
  for (double& v : row) v = g(rng);
  for (auto _ : state) {
    for (int q = 0; q < 4; ++q)
      benchmark::DoNotOptimize(state_log_emission(params, q, row));
  }
}
BENCHMARK(BM_GmmEmission)->Arg(4)->Arg(22);

static void BM_KmeansAssign(benchmark::State& state) {
  auto rng = make_rng(4);
  std::normal_distribution<double> g(0.0, 1.0);
  const int rows = 1800, arity = 4, k = 8;
  std::vector<double> data(rows * arity);
  for (double& v : data) v = g(rng);
  const auto fit = kmeans_fit(data, rows, arity, k, 1);
  for (auto _ : state) {
    auto seq = assign_sequence(fit.codebook, data, rows);
    benchmark::DoNotOptimize(seq.data());
  }
}
BENCHMARK(BM_KmeansAssign);

BENCHMARK_MAIN();
