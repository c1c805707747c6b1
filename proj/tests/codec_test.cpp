#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "ncdkit/codec/arithmetic_coder.hpp"
#include "ncdkit/codec/frequency_table.hpp"
#include "ncdkit/codec/models.hpp"
#include "ncdkit/error.hpp"

namespace ncdkit {
namespace {

#include "quantize_softmax_256.inc"

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an ncdkit::Error";
  return ErrorKind::usage;
}

std::vector<Symbol> random_symbols(std::mt19937_64& rng, std::size_t n, std::size_t alphabet,
                                   bool skewed) {
  std::vector<Symbol> out(n);
  std::geometric_distribution<unsigned> geo(0.3);
  std::uniform_int_distribution<unsigned> uni(0, static_cast<unsigned>(alphabet - 1));
  for (auto& s : out) s = skewed ? std::min<unsigned>(geo(rng), alphabet - 1) : uni(rng);
  return out;
}

TEST(FrequencyTable, RejectsBadTables) {
  EXPECT_EQ(kind_of([] { FrequencyTable({65535}); }), ErrorKind::degenerate_distribution);
  EXPECT_EQ(kind_of([] { FrequencyTable({65536, 0}); }), ErrorKind::degenerate_distribution);
  EXPECT_EQ(kind_of([] { FrequencyTable(std::vector<std::uint32_t>{}); }),
            ErrorKind::invalid_argument);
  EXPECT_NO_THROW(FrequencyTable({1, 65535}));
}

TEST(FrequencyTable, UniformSplitsRemainderLow) {
  const auto t = FrequencyTable::uniform(3);
  EXPECT_EQ(t.freq(0), 21846u);
  EXPECT_EQ(t.freq(1), 21845u);
  EXPECT_EQ(t.freq(2), 21845u);
  EXPECT_EQ(t.cum_low(2), 43691u);
}

TEST(FrequencyTable, FindLocatesIntervals) {
  const FrequencyTable t({10, 65516, 10});
  EXPECT_EQ(t.find(0), 0u);
  EXPECT_EQ(t.find(9), 0u);
  EXPECT_EQ(t.find(10), 1u);
  EXPECT_EQ(t.find(65525), 1u);
  EXPECT_EQ(t.find(65526), 2u);
  EXPECT_EQ(t.find(65535), 2u);
}

TEST(Quantize, SmallExamples) {
  const std::vector<double> half{0.5, 0.5};
  EXPECT_EQ(quantize(half), FrequencyTable({32768, 32768}));
  const std::vector<double> point{1.0, 0.0};
  EXPECT_EQ(quantize(point), FrequencyTable({65535, 1}));
  // Equal remainders: the spare unit goes to the lower index.
  const std::vector<double> thirds{1.0, 1.0, 1.0};
  EXPECT_EQ(quantize(thirds), FrequencyTable({21845 + 1, 21845, 21845}));
}

TEST(Quantize, UnnormalizedInputScalesOut) {
  const std::vector<double> a{0.2, 0.3, 0.5};
  const std::vector<double> b{2.0, 3.0, 5.0};
  EXPECT_EQ(quantize(a), quantize(b));
}

TEST(Quantize, RejectsInvalidInput) {
  const std::vector<double> zeros{0.0, 0.0};
  EXPECT_EQ(kind_of([&] { quantize(zeros); }), ErrorKind::degenerate_distribution);
  const std::vector<double> negative{0.5, -0.1};
  EXPECT_EQ(kind_of([&] { quantize(negative); }), ErrorKind::invalid_argument);
  const std::vector<double> nan{0.5, std::nan("")};
  EXPECT_EQ(kind_of([&] { quantize(nan); }), ErrorKind::invalid_argument);
  const std::vector<double> inf{0.5, INFINITY};
  EXPECT_EQ(kind_of([&] { quantize(inf); }), ErrorKind::invalid_argument);
  EXPECT_EQ(kind_of([] { quantize(std::span<const double>{}); }), ErrorKind::invalid_argument);
  const std::vector<double> huge(65537, 1.0);
  EXPECT_EQ(kind_of([&] { quantize(huge); }), ErrorKind::invalid_argument);
}

TEST(Quantize, FullAlphabetGetsOneEach) {
  const std::vector<double> flat(65536, 1.0);
  const auto t = quantize(flat);
  for (Symbol s = 0; s < 65536; s += 4097) EXPECT_EQ(t.freq(s), 1u);
}

TEST(Quantize, MatchesExactRationalOracle) {
  const auto t = quantize(std::span<const double>(kSoftmaxProbs));
  for (std::size_t i = 0; i < 256; ++i) EXPECT_EQ(t.freq(i), kSoftmaxTable[i]) << "symbol " << i;
}

TEST(Quantize, SpreadExponentsStayExact) {
  // Exponent range far beyond 64 bits forces the wide-integer path.
  const std::vector<double> p{1e-300, 1.0, 1e-200, 0.25};
  const auto t = quantize(p);
  EXPECT_EQ(t.freq(0), 1u);
  EXPECT_EQ(t.freq(2), 1u);
  // 65532 spare units split 4:1.
  EXPECT_EQ(t.freq(1), 1u + 52425u + 1u);
  EXPECT_EQ(t.freq(3), 1u + 13106u);
}

TEST(Quantize, WeightsAgreeWithReals) {
  std::mt19937_64 rng(7);
  for (int round = 0; round < 50; ++round) {
    std::vector<std::uint64_t> w(1 + rng() % 300);
    std::vector<double> d(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
      w[i] = rng() % 5000;
      d[i] = static_cast<double>(w[i]);
    }
    w[0] += 1;
    d[0] += 1;
    EXPECT_EQ(quantize_weights(w), quantize(d));
  }
  const std::vector<std::uint64_t> big{~std::uint64_t{0}, ~std::uint64_t{0} / 3};
  const auto t = quantize_weights(big);
  EXPECT_EQ(t.freq(0) + t.freq(1), 65536u);
  EXPECT_EQ(t.freq(0), 49152u);
}

TEST(Quantize, LargeVocabularyMatchesIntegerPath) {
  // Same ratios through both entry points; the real-valued one spans more
  // than eight binary orders and takes the estimate-then-verify route.
  std::mt19937_64 rng(11);
  for (int round = 0; round < 12; ++round) {
    const std::size_t n = round < 6 ? 50257 : 1 + rng() % 3000;
    std::vector<std::uint64_t> w(n);
    for (auto& x : w) {
      switch (round % 3) {
        case 0: x = rng() % (1u << 20); break;                 // wide, random
        case 1: x = 1 + rng() % 4; break;                      // heavy ties
        default: x = (rng() % 8 == 0) ? (1u << 20) : 1 + rng() % 64; break;
      }
    }
    w[n / 2] = std::max<std::uint64_t>(w[n / 2], 1u << 19);
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = std::ldexp(static_cast<double>(w[i]), -30);
    EXPECT_EQ(quantize(d), quantize_weights(w)) << "round " << round;
  }
  std::vector<double> flat(50257, 0x1p-40);
  flat[0] = 1.0;
  std::vector<std::uint64_t> flat_w(50257, 1);
  flat_w[0] = std::uint64_t{1} << 40;
  EXPECT_EQ(quantize(flat), quantize_weights(flat_w));

  // Subnormal inputs carry short mantissas; ratios must still be exact.
  std::vector<double> tiny(3000);
  std::vector<std::uint64_t> tiny_w(3000);
  for (std::size_t i = 0; i < tiny.size(); ++i) {
    tiny_w[i] = 1 + (i * 7919) % 5000;
    tiny[i] = std::ldexp(static_cast<double>(tiny_w[i]), -1074);
  }
  tiny_w[5] = std::uint64_t{1} << 62;
  tiny[5] = std::ldexp(1.0, 62 - 1074);
  EXPECT_EQ(quantize(tiny), quantize_weights(tiny_w));
}

TEST(Coder, RoundTripsEveryBuiltinModel) {
  std::mt19937_64 rng(11);
  for (const auto& name : builtin_model_names()) {
    const auto factory = *builtin_model_factory(name);
    for (std::size_t len : {0, 1, 2, 7, 100, 3000}) {
      const auto symbols = random_symbols(rng, len, 256, len % 2 == 0);
      auto enc_model = factory();
      const auto stream = encode(*enc_model, symbols);
      auto dec_model = factory();
      EXPECT_EQ(decode(*dec_model, stream), symbols) << name << " len " << len;
    }
  }
}

TEST(Coder, EmptyInputIsEmptyStreamWithTerminator) {
  UniformModel m(256);
  const auto stream = encode(m, std::span<const Symbol>{});
  EXPECT_EQ(stream.symbol_count, 0u);
  EXPECT_EQ(stream.bit_count, 2u);
  EXPECT_EQ(stream.byte_length(), 1u);
}

TEST(Coder, LengthTracksIdealCodeLength) {
  std::mt19937_64 rng(5);
  for (const auto& name : {"uniform", "order0", "order2"}) {
    const auto factory = *builtin_model_factory(name);
    for (int round = 0; round < 30; ++round) {
      const auto symbols = random_symbols(rng, rng() % 2048, 256, round % 3 != 0);
      auto a = factory();
      auto b = factory();
      const auto stream = encode(*a, symbols);
      const double ideal = ideal_code_length(*b, symbols);
      EXPECT_DOUBLE_EQ(stream.ideal_bits, ideal);
      const double slack = 8.0 * static_cast<double>(stream.byte_length()) - ideal;
      EXPECT_GE(slack, 0.0);
      EXPECT_LE(slack, 33.0);
    }
  }
}

TEST(Coder, UniformByteStreamCostsEightBitsPerSymbol) {
  std::mt19937_64 rng(3);
  const auto symbols = random_symbols(rng, 1000, 256, false);
  UniformModel m(256);
  const auto stream = encode(m, symbols);
  EXPECT_EQ(stream.byte_length(), 1001u);
}

// Puts the interval in the straddle state at every step: two symbols each
// just under one half, so long runs of pending bits build up.
TEST(Coder, SurvivesLongUnderflowRuns) {
  const FrequencyTable table({32767, 2, 32767});
  std::vector<Symbol> symbols(20000, 1);
  for (std::size_t i = 0; i < symbols.size(); i += 97) symbols[i] = i % 2 ? 0 : 2;
  ArithmeticEncoder enc;
  for (Symbol s : symbols) enc.encode(table, s);
  const auto stream = enc.finish();
  ArithmeticDecoder dec(stream.bytes);
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    ASSERT_EQ(dec.decode(table), symbols[i]) << "position " << i;
  }
}

TEST(Coder, DetectsTruncation) {
  std::mt19937_64 rng(9);
  const auto symbols = random_symbols(rng, 2000, 256, false);
  UniformModel m(256);
  auto stream = encode(m, symbols);
  stream.bytes.resize(100);
  UniformModel d(256);
  EXPECT_EQ(kind_of([&] { decode(d, stream); }), ErrorKind::truncated_stream);
}

TEST(Coder, RejectsSymbolsOutsideAlphabet) {
  UniformModel m(16);
  const std::vector<Symbol> symbols{1, 2, 16};
  EXPECT_EQ(kind_of([&] { encode(m, symbols); }), ErrorKind::alphabet_violation);
  UniformModel m2(16);
  EXPECT_EQ(kind_of([&] { ideal_code_length(m2, symbols); }), ErrorKind::alphabet_violation);
  AdaptiveOrder0Model o(4);
  EXPECT_EQ(kind_of([&] { o.update(4); }), ErrorKind::alphabet_violation);
}

TEST(Models, ContextModelFallsBackToShorterContexts) {
  AdaptiveContextModel m(4, 2);
  EXPECT_EQ(m.active_order(), 0u);
  m.update(1);
  EXPECT_EQ(m.active_order(), 0u);  // context "1" never seen before a symbol
  m.update(2);
  EXPECT_EQ(m.active_order(), 0u);
  m.update(1);
  EXPECT_EQ(m.active_order(), 1u);  // "1" was followed by 2 once
  m.update(2);
  EXPECT_EQ(m.active_order(), 2u);  // "1 2" was followed by 1
}

TEST(Models, Order0IsLaplace) {
  AdaptiveOrder0Model m(2);
  EXPECT_EQ(m.next_distribution(), FrequencyTable({32768, 32768}));
  m.update(0);
  m.update(0);
  // weights 3:1
  EXPECT_EQ(m.next_distribution(), FrequencyTable({49152, 16384}));
}

TEST(Models, FactoryNames) {
  EXPECT_TRUE(builtin_model_factory("uniform"));
  EXPECT_EQ((*builtin_model_factory("uniform16"))()->alphabet_size(), 16u);
  EXPECT_TRUE(builtin_model_factory("order3"));
  EXPECT_FALSE(builtin_model_factory("order4"));
  EXPECT_FALSE(builtin_model_factory("uniformx"));
  EXPECT_FALSE(builtin_model_factory("ppm"));
  EXPECT_EQ(kind_of([] { AdaptiveContextModel(256, 4); }), ErrorKind::invalid_argument);
}

TEST(Models, DeterministicTables) {
  std::mt19937_64 rng(1);
  const auto symbols = random_symbols(rng, 500, 256, true);
  AdaptiveContextModel a(256, 3), b(256, 3);
  for (Symbol s : symbols) {
    ASSERT_EQ(a.next_distribution(), b.next_distribution());
    a.update(s);
    b.update(s);
  }
}

}  // namespace
}  // namespace ncdkit
