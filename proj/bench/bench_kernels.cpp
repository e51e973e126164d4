#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "isoembed/kernels.hpp"

using namespace isoembed;

namespace {

// n = 2 normal system: r = n + s_n = 5 rows, q = 10 columns
constexpr int R = 5, Q = 10;

std::vector<double> random_batch(std::size_t count, int r, int q) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> d;
  std::vector<double> m(count * r * q);
  for (auto& x : m) x = d(rng);
  return m;
}

Exec mode(const benchmark::State& s) { return s.range(1) ? Exec::parallel : Exec::serial; }

void BM_pinv(benchmark::State& s) {
  const std::size_t count = s.range(0);
  auto mats = random_batch(count, R, Q);
  std::vector<double> pinv(count * R * Q), sigma(count);
  for (auto _ : s) {
    pinv_batch(mats.data(), count, R, Q, pinv.data(), sigma.data(), mode(s));
    benchmark::DoNotOptimize(pinv.data());
  }
  s.SetItemsProcessed(s.iterations() * count);
}

void BM_apply(benchmark::State& s) {
  const std::size_t count = s.range(0);
  auto pinv = random_batch(count, Q, R);
  auto rhs = random_batch(count, R, 1);
  std::vector<double> out(count * Q);
  for (auto _ : s) {
    apply_batch(pinv.data(), rhs.data(), count, R, Q, out.data(), mode(s));
    benchmark::DoNotOptimize(out.data());
  }
  s.SetItemsProcessed(s.iterations() * count);
}

void BM_scaled_sigma(benchmark::State& s) {
  const std::size_t count = s.range(0);
  auto mats = random_batch(count, R, Q);
  std::vector<double> scale(R, 1.0), sigma(count);
  for (auto _ : s) {
    scaled_sigma_batch(mats.data(), count, R, Q, scale.data(), sigma.data(), mode(s));
    benchmark::DoNotOptimize(sigma.data());
  }
  s.SetItemsProcessed(s.iterations() * count);
}

void BM_gram(benchmark::State& s) {
  const std::size_t count = s.range(0);
  auto mats = random_batch(count, R, Q);
  std::vector<double> out(count * R * (R + 1) / 2);
  for (auto _ : s) {
    gram_batch(mats.data(), count, R, Q, out.data(), mode(s));
    benchmark::DoNotOptimize(out.data());
  }
  s.SetItemsProcessed(s.iterations() * count);
}

// second argument: 0 serial reference, 1 OpenMP
#define GRID_ARGS ArgsProduct({{1024, 4096, 16384}, {0, 1}})->ArgNames({"points", "omp"})

}  // namespace

BENCHMARK(BM_pinv)->GRID_ARGS;
BENCHMARK(BM_apply)->GRID_ARGS;
BENCHMARK(BM_scaled_sigma)->GRID_ARGS;
BENCHMARK(BM_gram)->GRID_ARGS;

BENCHMARK_MAIN();
