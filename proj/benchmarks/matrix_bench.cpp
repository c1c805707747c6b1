#include <benchmark/benchmark.h>

#include "common.hpp"
#include "ncdkit/ncd.hpp"

namespace {

std::vector<ncdkit::Document> docs(std::size_t n, std::uint64_t seed) {
  std::vector<ncdkit::Document> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({"d" + std::to_string(seed) + "_" + std::to_string(i),
                   bench_text(200 + (i * 37) % 100, seed * 1000 + i), 0});
  }
  return out;
}

void BM_DistanceMatrix(benchmark::State& state) {
  const auto compressor = ncdkit::make_compressor("gzip");
  const auto train = docs(static_cast<std::size_t>(state.range(0)), 1);
  const auto test = docs(20, 2);
  ncdkit::DistanceOptions opts;
  opts.workers = static_cast<std::size_t>(state.range(1));
  opts.log_pairs = false;
  for (auto _ : state) benchmark::DoNotOptimize(ncdkit::distance_matrix(*compressor, train, test, opts));
  state.counters["pairs"] = static_cast<double>(train.size() * test.size());
}

BENCHMARK(BM_DistanceMatrix)->Args({20, 1})->Args({100, 1})->Args({100, 0})->Unit(benchmark::kMillisecond);

}  // namespace
