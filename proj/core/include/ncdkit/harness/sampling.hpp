#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ncdkit/harness/dataset.hpp"

namespace ncdkit {

struct FewShotConfig {
  std::size_t shots_per_class = 5;
  std::size_t test_samples = 100;
  std::size_t trials = 5;
  std::size_t k = 3;
  std::uint64_t seed = 0;
};

inline const std::vector<std::size_t>& default_shot_counts() {
  static const std::vector<std::size_t> shots{5, 10, 50, 100};
  return shots;
}

// splitmix64 generator; portable, so samples are identical everywhere.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();
  // Uniform in [0, bound), without modulo bias. `bound` must be positive.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t state_;
};

// Per-trial stream seed, a hash of (seed, trial) alone.
std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial);

// Largest-remainder apportionment of `total` over `populations`
// proportionally to their sizes; ties go to the lower index.
std::vector<std::size_t> apportion(std::span<const std::size_t> populations, std::size_t total);

struct FewShotSample {
  std::vector<Document> train;
  std::vector<Document> test;
};

// Exactly shots_per_class train documents per class (drawn from the train
// split when the dataset has one) and test_samples test documents
// stratified by class frequency in the test pool. The test pool is the
// dataset's test split when present, otherwise every document not drawn for
// training. Throws Error(insufficient_population) when a class or the test
// pool is too small, Error(invalid_argument) for a zero shot count.
FewShotSample sample_few_shot(const Dataset& dataset, const FewShotConfig& config,
                              std::size_t trial);

}  // namespace ncdkit
