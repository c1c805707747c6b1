#include "ncdkit/codec/arithmetic_coder.hpp"

#include <cmath>
#include <string>

#include "ncdkit/codec/models.hpp"
#include "ncdkit/error.hpp"

namespace ncdkit {
namespace {

constexpr std::uint32_t kHalf = 0x80000000u;
constexpr std::uint32_t kQuarter = 0x40000000u;
constexpr std::uint32_t kThreeQuarters = 0xC0000000u;

// A valid stream of B bits lets the decoder read at most B + 30 bit positions
// (32 priming bits plus one per interval doubling, of which the encoder had
// B - 2).
constexpr std::size_t kDecoderLookahead = 30;

void check_symbol(const FrequencyTable& table, Symbol symbol) {
  if (symbol >= table.size()) {
    raise(ErrorKind::alphabet_violation,
          "symbol " + std::to_string(symbol) + " outside alphabet of " +
              std::to_string(table.size()));
  }
}

}  // namespace

void ArithmeticEncoder::emit(bool bit) {
  acc_ = static_cast<std::uint8_t>((acc_ << 1) | (bit ? 1 : 0));
  ++bits_;
  if (bits_ % 8 == 0) {
    out_.push_back(acc_);
    acc_ = 0;
  }
}

void ArithmeticEncoder::put_bit(bool bit) {
  emit(bit);
  for (; pending_ > 0; --pending_) emit(!bit);
}

void ArithmeticEncoder::encode(const FrequencyTable& table, Symbol symbol) {
  check_symbol(table, symbol);
  const std::uint64_t range = std::uint64_t{high_} - low_ + 1;
  const std::uint64_t unit = range >> kFrequencyBits;
  const std::uint64_t lo = table.cum_low(symbol);
  const std::uint64_t hi = lo + table.freq(symbol);
  high_ = static_cast<std::uint32_t>(low_ + unit * hi - 1);
  low_ = static_cast<std::uint32_t>(low_ + unit * lo);

  for (;;) {
    if (high_ < kHalf) {
      put_bit(false);
    } else if (low_ >= kHalf) {
      put_bit(true);
      low_ -= kHalf;
      high_ -= kHalf;
    } else if (low_ >= kQuarter && high_ < kThreeQuarters) {
      ++pending_;
      low_ -= kQuarter;
      high_ -= kQuarter;
    } else {
      break;
    }
    low_ <<= 1;
    high_ = (high_ << 1) | 1u;
  }
  ++symbols_;
}

CodedStream ArithmeticEncoder::finish() {
  // The interval still straddles one half with width > 2^30, so two more bits
  // name a point inside it (trailing zeros implied).
  ++pending_;
  put_bit(low_ >= kQuarter);
  if (bits_ % 8 != 0) {
    out_.push_back(static_cast<std::uint8_t>(acc_ << (8 - bits_ % 8)));
    acc_ = 0;
  }
  CodedStream stream;
  stream.bytes = std::move(out_);
  stream.bit_count = bits_;
  stream.symbol_count = symbols_;
  out_.clear();
  return stream;
}

ArithmeticDecoder::ArithmeticDecoder(std::span<const std::uint8_t> bytes)
    : bytes_(bytes), bit_limit_(bytes.size() * 8 + kDecoderLookahead) {
  for (int i = 0; i < 32; ++i) value_ = (value_ << 1) | (next_bit() ? 1u : 0u);
}

bool ArithmeticDecoder::next_bit() {
  if (bit_pos_ >= bit_limit_) {
    raise(ErrorKind::truncated_stream, "coded stream exhausted after " +
                                           std::to_string(bytes_.size()) + " bytes");
  }
  const std::size_t pos = bit_pos_++;
  if (pos >= bytes_.size() * 8) return false;
  return ((bytes_[pos / 8] >> (7 - pos % 8)) & 1u) != 0;
}

Symbol ArithmeticDecoder::decode(const FrequencyTable& table) {
  const std::uint64_t range = std::uint64_t{high_} - low_ + 1;
  const std::uint64_t unit = range >> kFrequencyBits;
  const std::uint64_t target = (std::uint64_t{value_} - low_) / unit;
  if (target >= kFrequencyTotal) {
    raise(ErrorKind::corrupt_stream, "code value outside the coded interval");
  }
  const Symbol symbol = table.find(static_cast<std::uint32_t>(target));
  const std::uint64_t lo = table.cum_low(symbol);
  const std::uint64_t hi = lo + table.freq(symbol);
  high_ = static_cast<std::uint32_t>(low_ + unit * hi - 1);
  low_ = static_cast<std::uint32_t>(low_ + unit * lo);

  for (;;) {
    if (high_ < kHalf) {
      // nothing to subtract
    } else if (low_ >= kHalf) {
      low_ -= kHalf;
      high_ -= kHalf;
      value_ -= kHalf;
    } else if (low_ >= kQuarter && high_ < kThreeQuarters) {
      low_ -= kQuarter;
      high_ -= kQuarter;
      value_ -= kQuarter;
    } else {
      break;
    }
    low_ <<= 1;
    high_ = (high_ << 1) | 1u;
    value_ = (value_ << 1) | (next_bit() ? 1u : 0u);
  }
  return symbol;
}

CodedStream encode(ProbabilityModel& model, std::span<const Symbol> symbols) {
  const std::size_t alphabet = model.alphabet_size();
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (symbols[i] >= alphabet) {
      raise(ErrorKind::alphabet_violation,
            "symbol " + std::to_string(symbols[i]) + " at position " + std::to_string(i) +
                " outside alphabet of " + std::to_string(alphabet));
    }
  }
  ArithmeticEncoder encoder;
  double bits = 0.0;
  for (Symbol s : symbols) {
    const FrequencyTable& table = model.next_distribution();
    bits -= std::log2(static_cast<double>(table.freq(s)) / kFrequencyTotal);
    encoder.encode(table, s);
    model.update(s);
  }
  CodedStream stream = encoder.finish();
  stream.ideal_bits = bits;
  return stream;
}

std::vector<Symbol> decode(ProbabilityModel& model, std::span<const std::uint8_t> bytes,
                           std::size_t symbol_count) {
  std::vector<Symbol> out;
  if (symbol_count == 0) return out;
  out.reserve(symbol_count);
  ArithmeticDecoder decoder(bytes);
  for (std::size_t i = 0; i < symbol_count; ++i) {
    const Symbol s = decoder.decode(model.next_distribution());
    model.update(s);
    out.push_back(s);
  }
  return out;
}

double ideal_code_length(ProbabilityModel& model, std::span<const Symbol> symbols) {
  const std::size_t alphabet = model.alphabet_size();
  double bits = 0.0;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (symbols[i] >= alphabet) {
      raise(ErrorKind::alphabet_violation,
            "symbol " + std::to_string(symbols[i]) + " at position " + std::to_string(i) +
                " outside alphabet of " + std::to_string(alphabet));
    }
    const FrequencyTable& table = model.next_distribution();
    bits -= std::log2(static_cast<double>(table.freq(symbols[i])) / kFrequencyTotal);
    model.update(symbols[i]);
  }
  return bits;
}

}  // namespace ncdkit
