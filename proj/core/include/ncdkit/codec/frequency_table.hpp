#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ncdkit {

using Symbol = std::uint32_t;

inline constexpr unsigned kFrequencyBits = 16;
inline constexpr std::uint32_t kFrequencyTotal = std::uint32_t{1} << kFrequencyBits;

// Quantized next-symbol distribution. Every entry is at least 1 and the
// entries sum to exactly kFrequencyTotal, so any symbol of the alphabet stays
// codable.
class FrequencyTable {
 public:
  FrequencyTable() = default;

  // Throws Error(degenerate_distribution) unless `freqs` satisfies the
  // invariants above.
  explicit FrequencyTable(std::vector<std::uint32_t> freqs);

  // Equal split of kFrequencyTotal, remainder to the lowest symbols.
  static FrequencyTable uniform(std::size_t alphabet_size);

  std::size_t size() const noexcept { return freqs_.size(); }
  std::uint32_t freq(Symbol s) const { return freqs_[s]; }
  std::uint32_t cum_low(Symbol s) const { return cum_[s]; }
  std::uint32_t total() const noexcept { return kFrequencyTotal; }

  // Symbol whose interval [cum_low, cum_low + freq) contains `target`.
  // `target` must be below kFrequencyTotal.
  Symbol find(std::uint32_t target) const;

  std::span<const std::uint32_t> freqs() const noexcept { return freqs_; }

  friend bool operator==(const FrequencyTable& a, const FrequencyTable& b) {
    return a.freqs_ == b.freqs_;
  }

 private:
  std::vector<std::uint32_t> freqs_;
  std::vector<std::uint32_t> cum_;
};

// Largest-remainder quantization of a real-valued distribution to a table
// over kFrequencyTotal with a floor of 1 per symbol. The arithmetic is exact
// on the binary values of the inputs, so bit-identical inputs always give the
// identical table. Remainder ties go to the lower symbol index.
//
// Throws Error(degenerate_distribution) if no entry is strictly positive and
// Error(invalid_argument) for negative or non-finite entries, an empty input,
// or more than kFrequencyTotal symbols.
FrequencyTable quantize(std::span<const double> probs);

// Same rounding rule for integer weights (the built-in count models).
FrequencyTable quantize_weights(std::span<const std::uint64_t> weights);

}  // namespace ncdkit
