#include <benchmark/benchmark.h>

#include "pcmp/codec.hpp"
#include "pcmp/metrics.hpp"
#include "pcmp/shapes.hpp"

namespace {

pcmp::PointCloud bench_cloud(std::size_t n) {
  return pcmp::generate_shape(pcmp::ShapeKind{0}, n, 42, 0.01).cloud;
}

void BM_Encode(benchmark::State& state) {
  const auto cloud = bench_cloud(static_cast<std::size_t>(state.range(0)));
  const int depth = static_cast<int>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(pcmp::encode_cloud(cloud, depth));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Encode)->Args({1024, 6})->Args({1024, 10})->Args({16384, 10});

void BM_Decode(benchmark::State& state) {
  const auto cloud = bench_cloud(static_cast<std::size_t>(state.range(0)));
  const int depth = static_cast<int>(state.range(1));
  const auto stream = pcmp::encode_cloud(cloud, depth);
  for (auto _ : state) {
    benchmark::DoNotOptimize(pcmp::decode_cloud(stream, depth));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Decode)->Args({1024, 6})->Args({1024, 10})->Args({16384, 10});

void BM_DecodePrefix(benchmark::State& state) {
  const auto cloud = bench_cloud(16384);
  const auto stream = pcmp::encode_cloud(cloud, 10);
  const int depth = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(pcmp::decode_cloud(stream, depth));
  }
}
BENCHMARK(BM_DecodePrefix)->Arg(2)->Arg(5)->Arg(8)->Arg(10);

void BM_D1Psnr(benchmark::State& state) {
  const auto cloud = bench_cloud(static_cast<std::size_t>(state.range(0)));
  const auto stream = pcmp::encode_cloud(cloud, 8);
  const auto recon = pcmp::decode_cloud(stream, 8).cloud;
  for (auto _ : state) {
    benchmark::DoNotOptimize(pcmp::d1_psnr(cloud, recon, 1.0));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_D1Psnr)->Arg(1024)->Arg(16384);

}  // namespace

BENCHMARK_MAIN();
