#include "ncdkit/harness/sampling.hpp"

#include <algorithm>
#include <numeric>

#include "ncdkit/error.hpp"

namespace ncdkit {
namespace {

// Moves k uniformly chosen elements of `pool` to its front.
void partial_shuffle(std::vector<std::size_t>& pool, std::size_t k, SplitMix64& rng) {
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
}

}  // namespace

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t SplitMix64::below(std::uint64_t bound) {
  // Rejection on the top of the range keeps every residue equally likely.
  const std::uint64_t limit = bound * (~std::uint64_t{0} / bound);
  for (;;) {
    const std::uint64_t x = next();
    if (x < limit) return x % bound;
  }
}

std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial) {
  SplitMix64 mix(seed);
  const std::uint64_t a = mix.next();
  SplitMix64 per_trial(a ^ (0xD1B54A32D192ED03ull * (static_cast<std::uint64_t>(trial) + 1)));
  return per_trial.next();
}

std::vector<std::size_t> apportion(std::span<const std::size_t> populations, std::size_t total) {
  const std::size_t sum = std::accumulate(populations.begin(), populations.end(), std::size_t{0});
  std::vector<std::size_t> counts(populations.size(), 0);
  if (total == 0) return counts;
  if (sum == 0) raise(ErrorKind::insufficient_population, "apportioning over empty populations");
  std::vector<std::size_t> remainders(populations.size());
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < populations.size(); ++i) {
    const unsigned __int128 scaled = static_cast<unsigned __int128>(populations[i]) * total;
    counts[i] = static_cast<std::size_t>(scaled / sum);
    remainders[i] = static_cast<std::size_t>(scaled % sum);
    assigned += counts[i];
  }
  std::vector<std::size_t> order(populations.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
  for (std::size_t i = 0; assigned < total; ++i, ++assigned) ++counts[order[i]];
  return counts;
}

FewShotSample sample_few_shot(const Dataset& dataset, const FewShotConfig& config,
                              std::size_t trial) {
  if (config.shots_per_class == 0) {
    raise(ErrorKind::invalid_argument, "shots_per_class must be at least 1");
  }
  const std::size_t classes = dataset.class_names.size();
  if (classes == 0) raise(ErrorKind::insufficient_population, "dataset has no classes");
  SplitMix64 rng(trial_seed(config.seed, trial));

  const bool split_test = dataset.has_test_split();
  std::vector<std::vector<std::size_t>> train_pool(classes);
  for (std::size_t i = 0; i < dataset.documents.size(); ++i) {
    if (split_test && dataset.splits[i] == Split::test) continue;
    train_pool[dataset.documents[i].label].push_back(i);
  }

  FewShotSample sample;
  std::vector<bool> taken(dataset.documents.size(), false);
  for (std::size_t c = 0; c < classes; ++c) {
    auto& pool = train_pool[c];
    if (pool.size() < config.shots_per_class) {
      raise(ErrorKind::insufficient_population,
            "class \"" + dataset.class_names[c] + "\" has " + std::to_string(pool.size()) +
                " train candidates, needs " + std::to_string(config.shots_per_class));
    }
    partial_shuffle(pool, config.shots_per_class, rng);
    for (std::size_t i = 0; i < config.shots_per_class; ++i) {
      sample.train.push_back(dataset.documents[pool[i]]);
      taken[pool[i]] = true;
    }
  }

  std::vector<std::vector<std::size_t>> test_pool(classes);
  for (std::size_t i = 0; i < dataset.documents.size(); ++i) {
    const bool eligible = split_test ? dataset.splits[i] == Split::test : !taken[i];
    if (eligible) test_pool[dataset.documents[i].label].push_back(i);
  }
  std::vector<std::size_t> sizes(classes);
  std::size_t available = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    sizes[c] = test_pool[c].size();
    available += sizes[c];
  }
  if (available < config.test_samples) {
    raise(ErrorKind::insufficient_population,
          "test pool holds " + std::to_string(available) + " documents, needs " +
              std::to_string(config.test_samples));
  }
  const std::vector<std::size_t> per_class = apportion(sizes, config.test_samples);
  std::vector<std::size_t> chosen;
  for (std::size_t c = 0; c < classes; ++c) {
    partial_shuffle(test_pool[c], per_class[c], rng);
    chosen.insert(chosen.end(), test_pool[c].begin(),
                  test_pool[c].begin() + static_cast<std::ptrdiff_t>(per_class[c]));
  }
  std::sort(chosen.begin(), chosen.end());
  for (std::size_t i : chosen) sample.test.push_back(dataset.documents[i]);
  return sample;
}

}  // namespace ncdkit
