#include <benchmark/benchmark.h>

#include "common.hpp"
#include "ncdkit/codec/arithmetic_coder.hpp"
#include "ncdkit/codec/frequency_table.hpp"
#include "ncdkit/codec/models.hpp"

namespace {

std::vector<ncdkit::Symbol> symbols(std::size_t n) {
  const std::string text = bench_text(n);
  return {text.begin(), text.end()};
}

void BM_Encode(benchmark::State& state, const char* model) {
  const auto input = symbols(static_cast<std::size_t>(state.range(0)));
  const auto factory = *ncdkit::builtin_model_factory(model);
  for (auto _ : state) {
    auto m = factory();
    benchmark::DoNotOptimize(ncdkit::encode(*m, input));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * input.size()));
}

void BM_Decode(benchmark::State& state, const char* model) {
  const auto input = symbols(static_cast<std::size_t>(state.range(0)));
  const auto factory = *ncdkit::builtin_model_factory(model);
  auto enc = factory();
  const auto stream = ncdkit::encode(*enc, input);
  for (auto _ : state) {
    auto m = factory();
    benchmark::DoNotOptimize(ncdkit::decode(*m, stream));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * input.size()));
}

void BM_QuantizeWeights(benchmark::State& state) {
  std::vector<std::uint64_t> w(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = 1 + (i * 7919) % 97;
  for (auto _ : state) benchmark::DoNotOptimize(ncdkit::quantize_weights(w));
}

void BM_QuantizeProbabilities(benchmark::State& state) {
  std::vector<double> p(static_cast<std::size_t>(state.range(0)));
  double sum = 0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += p[i] = 1.0 / static_cast<double>(i + 1);
  for (auto& x : p) x /= sum;
  for (auto _ : state) benchmark::DoNotOptimize(ncdkit::quantize(p));
}

BENCHMARK_CAPTURE(BM_Encode, uniform, "uniform")->Arg(4096);
BENCHMARK_CAPTURE(BM_Encode, order0, "order0")->Arg(4096);
BENCHMARK_CAPTURE(BM_Encode, order2, "order2")->Arg(4096);
BENCHMARK_CAPTURE(BM_Decode, order0, "order0")->Arg(4096);
BENCHMARK_CAPTURE(BM_Decode, order2, "order2")->Arg(4096);
BENCHMARK(BM_QuantizeWeights)->Arg(256)->Arg(50257);
BENCHMARK(BM_QuantizeProbabilities)->Arg(256)->Arg(50257);

}  // namespace
