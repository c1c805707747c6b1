#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ncdkit/codec/frequency_table.hpp"

namespace ncdkit {

class ProbabilityModel;

// Raw coder output. No container header: the symbol count travels with the
// stream out-of-band.
struct CodedStream {
  std::vector<std::uint8_t> bytes;
  std::size_t bit_count = 0;
  std::size_t symbol_count = 0;
  // Sum of -log2 p over the coded symbols under the quantized tables.
  double ideal_bits = 0.0;

  std::size_t byte_length() const noexcept { return bytes.size(); }
};

// Binary arithmetic coder over 32-bit low/high registers. The interval width
// is split in units of floor(range / 2^16), which never widens a symbol's
// interval beyond its quantized probability. Underflow (the straddle around
// one half) is handled with deferred opposite bits, which is the bitwise form
// of carry propagation.
class ArithmeticEncoder {
 public:
  void encode(const FrequencyTable& table, Symbol symbol);

  // Flushes two disambiguating bits plus any pending bits. The encoder must
  // not be used afterwards.
  CodedStream finish();

 private:
  void put_bit(bool bit);
  void emit(bool bit);

  std::uint32_t low_ = 0;
  std::uint32_t high_ = 0xFFFFFFFFu;
  std::uint64_t pending_ = 0;
  std::size_t symbols_ = 0;
  std::size_t bits_ = 0;
  std::uint8_t acc_ = 0;
  std::vector<std::uint8_t> out_;
};

class ArithmeticDecoder {
 public:
  explicit ArithmeticDecoder(std::span<const std::uint8_t> bytes);

  // Throws Error(truncated_stream) when the decoder would need bits beyond
  // what any valid stream of this length can imply, and
  // Error(corrupt_stream) when the code value falls outside every symbol.
  Symbol decode(const FrequencyTable& table);

 private:
  bool next_bit();

  std::span<const std::uint8_t> bytes_;
  std::size_t bit_pos_ = 0;
  std::size_t bit_limit_ = 0;
  std::uint32_t low_ = 0;
  std::uint32_t high_ = 0xFFFFFFFFu;
  std::uint32_t value_ = 0;
};

// Drives `model` through `symbols`: the distribution for step t is taken
// before symbol t is coded, and the model is updated with symbol t only after
// its interval has been coded. Decoding follows the identical order.
CodedStream encode(ProbabilityModel& model, std::span<const Symbol> symbols);

std::vector<Symbol> decode(ProbabilityModel& model,
                           std::span<const std::uint8_t> bytes,
                           std::size_t symbol_count);

inline std::vector<Symbol> decode(ProbabilityModel& model, const CodedStream& stream) {
  return decode(model, stream.bytes, stream.symbol_count);
}

// -sum_t log2(freq_t(x_t) / 2^16) along the same adaptive trajectory that
// encode() follows.
double ideal_code_length(ProbabilityModel& model, std::span<const Symbol> symbols);

}  // namespace ncdkit
