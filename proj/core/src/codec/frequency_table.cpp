#include "ncdkit/codec/frequency_table.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "ncdkit/error.hpp"

namespace ncdkit {
namespace {

void check_alphabet(std::size_t n) {
  if (n == 0) {
    raise(ErrorKind::invalid_argument, "frequency table needs at least one symbol");
  }
  if (n > kFrequencyTotal) {
    raise(ErrorKind::invalid_argument,
          "alphabet of " + std::to_string(n) + " symbols exceeds the 2^16 quantization total");
  }
}

// Largest-remainder apportionment of R = 2^16 - n units over the weights,
// on top of a floor of one unit per symbol. `Int` must hold w * R and the
// weight sum without overflow.
template <class Int>
std::vector<std::uint32_t> apportion(const std::vector<Int>& weights) {
  const std::size_t n = weights.size();
  const std::uint32_t spare = kFrequencyTotal - static_cast<std::uint32_t>(n);
  Int sum = 0;
  for (const Int& w : weights) sum += w;

  std::vector<std::uint32_t> freqs(n, 1);
  std::vector<Int> remainders(n);
  std::uint64_t assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    Int scaled = weights[i] * Int(spare);
    Int quotient = scaled / sum;
    remainders[i] = scaled - quotient * sum;
    const auto q = static_cast<std::uint32_t>(quotient);
    freqs[i] += q;
    assigned += q;
  }

  const std::size_t leftover = spare - assigned;
  if (leftover > 0) {
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    auto before = [&](std::uint32_t a, std::uint32_t b) {
      if (remainders[a] != remainders[b]) return remainders[a] > remainders[b];
      return a < b;
    };
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(leftover - 1),
                     order.end(), before);
    for (std::size_t i = 0; i < leftover; ++i) ++freqs[order[i]];
  }
  return freqs;
}

// Fast path for sums below 2^47: a remainder fits in 47 bits, so remainder
// and inverted index pack into one sortable 64-bit key.
std::vector<std::uint32_t> apportion_small(std::span<const std::uint64_t> weights,
                                           std::uint64_t sum) {
  const std::size_t n = weights.size();
  const std::uint64_t spare = kFrequencyTotal - n;
  std::vector<std::uint32_t> freqs(n);
  thread_local std::vector<std::uint64_t> keys;
  keys.resize(n);
  // The quotient is below 2^16, so a floating estimate is off by at most one
  // and a single integer correction makes it exact.
  const double inverse = 1.0 / static_cast<double>(sum);
  std::uint64_t assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t scaled = weights[i] * spare;
    auto quotient = static_cast<std::uint64_t>(static_cast<double>(scaled) * inverse);
    auto remainder = static_cast<std::int64_t>(scaled - quotient * sum);
    if (remainder < 0) {
      --quotient;
      remainder += static_cast<std::int64_t>(sum);
    } else if (static_cast<std::uint64_t>(remainder) >= sum) {
      ++quotient;
      remainder -= static_cast<std::int64_t>(sum);
    }
    freqs[i] = static_cast<std::uint32_t>(quotient) + 1;
    assigned += quotient;
    keys[i] = (static_cast<std::uint64_t>(remainder) << 16) | (0xFFFFu - i);
  }
  const std::size_t leftover = spare - assigned;
  if (leftover > 0) {
    if (leftover < n) {
      std::nth_element(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(leftover - 1),
                       keys.end(), std::greater<>());
    }
    for (std::size_t i = 0; i < leftover; ++i) ++freqs[0xFFFFu - (keys[i] & 0xFFFFu)];
  }
  return freqs;
}

// Largest remainder for weights m_i * 2^shift_i (probs_i * 2^-min_exponent),
// equal to apportion() on the exact integers but with the bulk of the work in
// doubles. Each quotient estimate is within 2^-33 of the true value
// w_i * R / S; only estimates that land near an integer, and remainders that
// cannot be ranked apart at the cutoff, are settled with `Int` arithmetic.
template <class Int>
std::vector<std::uint32_t> apportion_wide(std::span<const double> probs,
                                          const std::vector<std::uint64_t>& mantissas,
                                          const std::vector<int>& shifts, int max_shift,
                                          int min_exponent) {
  constexpr double kNear = 0x1p-30;
  constexpr double kWindow = 0x1p-16;
  const std::size_t n = mantissas.size();
  const std::uint32_t spare = kFrequencyTotal - static_cast<std::uint32_t>(n);
  auto weight = [&](std::size_t i) { return Int(mantissas[i]) << shifts[i]; };

  // Exact sum in 64-bit limbs with wide accumulators, carried once at the end.
  std::vector<unsigned __int128> limbs(static_cast<std::size_t>(max_shift) / 64 + 3, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (mantissas[i] == 0) continue;
    const auto placed = static_cast<unsigned __int128>(mantissas[i]) << (shifts[i] % 64);
    const auto limb = static_cast<std::size_t>(shifts[i]) / 64;
    limbs[limb] += static_cast<std::uint64_t>(placed);
    limbs[limb + 1] += static_cast<std::uint64_t>(placed >> 64);
  }
  Int sum = 0;
  unsigned __int128 carry = 0;
  for (std::size_t j = 0; j < limbs.size(); ++j) {
    carry += limbs[j];
    sum += Int(static_cast<std::uint64_t>(carry)) << (64 * j);
    carry >>= 64;
  }
  // Doubles carry weights scaled by 2^-drop, leaving the sum 63 bits wide.
  const auto drop = static_cast<int>(std::max<std::size_t>(boost::multiprecision::msb(sum), 62) - 62);
  auto to_double = [drop](const Int& v) {
    return static_cast<Int>(v >> drop).template convert_to<double>();
  };
  const double sum_d = to_double(sum);
  auto exact_remainder = [&](std::size_t i, std::uint32_t q) {
    return Int(weight(i) * spare - Int(q) * sum);
  };

  // probs_i * 2^scale_exponent = m_i * 2^(shift_i - drop), split in two
  // factors so neither overflows.
  const int scale_exponent = -(min_exponent + drop);
  const double low_scale = std::ldexp(1.0, scale_exponent / 2);
  const double high_scale = std::ldexp(1.0, scale_exponent - scale_exponent / 2);
  const double unit = spare / sum_d;
  std::vector<std::uint32_t> freqs(n, 1);
  std::vector<double> fraction(n, 0.0);
  std::uint64_t assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (mantissas[i] == 0) continue;
    const double w = probs[i] * low_scale * high_scale;
    const double est = w * unit;
    auto q = static_cast<std::uint32_t>(est);
    double f = est - q;
    if ((f < kNear && q > 0) || f > 1.0 - kNear) {
      const Int scaled = weight(i) * spare;
      q = static_cast<std::uint32_t>(Int(scaled / sum));
      const Int r = scaled - Int(q) * sum;
      f = to_double(r) / sum_d;
    }
    freqs[i] += q;
    assigned += q;
    fraction[i] = f;
  }

  const std::size_t leftover = spare - assigned;
  if (leftover == 0) return freqs;
  // Ranking by estimate is exact wherever neighbours differ by more than the
  // estimate error; the run straddling the cutoff is ranked exactly.
  auto by_estimate = [&](std::uint32_t a, std::uint32_t b) {
    if (fraction[a] != fraction[b]) return fraction[a] > fraction[b];
    return a < b;
  };
  // The leftover-th largest estimate: bucket counts narrow it to one bucket.
  constexpr std::size_t kBuckets = 4096;
  auto bucket_of = [](double f) {
    return std::min(kBuckets - 1, static_cast<std::size_t>(f * kBuckets));
  };
  std::vector<std::size_t> counts(kBuckets, 0);
  for (double f : fraction) ++counts[bucket_of(f)];
  std::size_t bucket = kBuckets - 1, before = 0;
  while (before + counts[bucket] < leftover) before += counts[bucket--];
  std::vector<double> ranked;
  ranked.reserve(counts[bucket]);
  for (double f : fraction) {
    if (bucket_of(f) == bucket) ranked.push_back(f);
  }
  const auto cut = static_cast<std::ptrdiff_t>(leftover - before);
  std::nth_element(ranked.begin(), ranked.begin() + cut - 1, ranked.end(), std::greater<>());
  const double pivot = ranked[static_cast<std::size_t>(cut - 1)];

  std::vector<std::uint32_t> above, window;
  for (std::uint32_t i = 0; i < n; ++i) {
    if (fraction[i] > pivot + kWindow) above.push_back(i);
    else if (fraction[i] >= pivot - kWindow) window.push_back(i);
  }
  std::sort(window.begin(), window.end(), by_estimate);
  const std::size_t need = leftover - above.size();
  std::size_t lo = need - 1, hi = need;
  while (lo > 0 && fraction[window[lo - 1]] - fraction[window[lo]] < 2 * kNear) --lo;
  while (hi < window.size() && fraction[window[hi - 1]] - fraction[window[hi]] < 2 * kNear) ++hi;
  const bool contained =
      (lo > 0 || fraction[window[0]] < pivot + kWindow - 2 * kNear) &&
      (hi < window.size() || fraction[window.back()] > pivot - kWindow + 2 * kNear);
  if (!contained) {
    std::vector<Int> w(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      if (mantissas[i] != 0) w[i] = weight(i);
    }
    return apportion(w);
  }

  for (std::uint32_t i : above) ++freqs[i];
  for (std::size_t j = 0; j < lo; ++j) ++freqs[window[j]];
  std::vector<std::pair<Int, std::uint32_t>> run;
  for (std::size_t j = lo; j < hi; ++j) {
    const std::uint32_t i = window[j];
    run.emplace_back(exact_remainder(i, freqs[i] - 1), i);
  }
  std::sort(run.begin(), run.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (std::size_t j = 0; j < need - lo; ++j) ++freqs[run[j].second];
  return freqs;
}

}  // namespace

FrequencyTable::FrequencyTable(std::vector<std::uint32_t> freqs) : freqs_(std::move(freqs)) {
  check_alphabet(freqs_.size());
  cum_.resize(freqs_.size() + 1);
  std::uint64_t running = 0;
  for (std::size_t i = 0; i < freqs_.size(); ++i) {
    if (freqs_[i] == 0) {
      raise(ErrorKind::degenerate_distribution,
            "symbol " + std::to_string(i) + " has zero frequency");
    }
    cum_[i] = static_cast<std::uint32_t>(std::min<std::uint64_t>(running, kFrequencyTotal));
    running += freqs_[i];
  }
  if (running != kFrequencyTotal) {
    raise(ErrorKind::degenerate_distribution,
          "frequencies sum to " + std::to_string(running) + ", expected 65536");
  }
  cum_.back() = kFrequencyTotal;
}

FrequencyTable FrequencyTable::uniform(std::size_t alphabet_size) {
  check_alphabet(alphabet_size);
  std::vector<std::uint64_t> ones(alphabet_size, 1);
  return quantize_weights(ones);
}

Symbol FrequencyTable::find(std::uint32_t target) const {
  auto it = std::upper_bound(cum_.begin(), cum_.end(), target);
  return static_cast<Symbol>(std::distance(cum_.begin(), it) - 1);
}

FrequencyTable quantize_weights(std::span<const std::uint64_t> weights) {
  check_alphabet(weights.size());
  unsigned __int128 sum = 0;
  std::uint64_t max_weight = 0;
  for (std::uint64_t w : weights) {
    sum += w;
    max_weight = std::max(max_weight, w);
  }
  if (sum == 0) {
    raise(ErrorKind::degenerate_distribution, "all weights are zero");
  }
  // 64-bit arithmetic suffices while sum * 2^16 fits; counts stay far below.
  if (sum < (unsigned __int128){1} << 47) {
    return FrequencyTable(apportion_small(weights, static_cast<std::uint64_t>(sum)));
  }
  std::vector<unsigned __int128> w(weights.begin(), weights.end());
  return FrequencyTable(apportion(w));
}

FrequencyTable quantize(std::span<const double> probs) {
  check_alphabet(probs.size());
  using boost::multiprecision::cpp_int;

  // Each finite double is mantissa * 2^exponent exactly. Shifting every
  // mantissa onto the smallest exponent gives integer weights with the exact
  // same ratios as the inputs.
  std::vector<std::uint64_t> mantissas(probs.size(), 0);
  std::vector<int> exponents(probs.size(), 0);
  int min_exponent = 0;
  bool any_positive = false;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = probs[i];
    if (!std::isfinite(p) || p < 0.0) {
      raise(ErrorKind::invalid_argument,
            "probability " + std::to_string(i) + " is negative or not finite");
    }
    if (p == 0.0) continue;
    const auto bits = std::bit_cast<std::uint64_t>(p);
    const auto biased = static_cast<int>(bits >> 52);
    const std::uint64_t fraction = bits & ((std::uint64_t{1} << 52) - 1);
    mantissas[i] = biased == 0 ? fraction : fraction | (std::uint64_t{1} << 52);
    exponents[i] = (biased == 0 ? 1 : biased) - 1075;
    if (!any_positive || exponents[i] < min_exponent) min_exponent = exponents[i];
    any_positive = true;
  }
  if (!any_positive) {
    raise(ErrorKind::degenerate_distribution, "distribution has no positive probability");
  }

  int max_shift = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (mantissas[i] != 0) max_shift = std::max(max_shift, exponents[i] - min_exponent);
  }
  if (max_shift <= 8) {
    // Narrow dynamic range: 53 + 8 bits per weight stays within uint64.
    std::vector<std::uint64_t> w(probs.size(), 0);
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (mantissas[i] != 0) w[i] = mantissas[i] << (exponents[i] - min_exponent);
    }
    return quantize_weights(w);
  }

  std::vector<int> shifts(probs.size(), 0);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (mantissas[i] != 0) shifts[i] = exponents[i] - min_exponent;
  }
  auto exact = [&]<class Int>() {
    return FrequencyTable(apportion_wide<Int>(probs, mantissas, shifts, max_shift, min_exponent));
  };
  // Fixed-width integers avoid heap traffic: a weight takes 53 + max_shift
  // bits, the sum up to 16 more and the scaling by the spare units 16 more.
  if (max_shift <= 256 - 53 - 32) return exact.operator()<boost::multiprecision::uint256_t>();
  if (max_shift <= 512 - 53 - 32) return exact.operator()<boost::multiprecision::uint512_t>();
  return exact.operator()<cpp_int>();
}

}  // namespace ncdkit
