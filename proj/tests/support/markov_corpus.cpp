#include "markov_corpus.hpp"

#include <cmath>

#include "ncdkit/harness/sampling.hpp"

namespace ncdkit::testing {
namespace {

constexpr std::size_t kContexts = MarkovChain2::kAlphabet * MarkovChain2::kAlphabet;

std::size_t draw(const std::array<std::uint64_t, MarkovChain2::kAlphabet>& w, SplitMix64& rng) {
  std::uint64_t total = 0;
  for (auto x : w) total += x;
  std::uint64_t target = rng.below(total);
  for (std::size_t s = 0; s < w.size(); ++s) {
    if (target < w[s]) return s;
    target -= w[s];
  }
  return w.size() - 1;
}

}  // namespace

MarkovChain2 make_chain(std::uint64_t seed) {
  SplitMix64 rng(seed);
  MarkovChain2 chain;
  chain.weights.resize(kContexts);
  for (auto& row : chain.weights) {
    for (auto& w : row) {
      w = rng.below(1000) + 101;
    }
  }
  return chain;
}

std::array<MarkovChain2, 2> corpus_chains(std::uint64_t seed) {
  return {make_chain(seed ^ 0xA5A5A5A5ull), make_chain(seed ^ 0x5A5A5A5Aull)};
}

double kl_rate_bits(const MarkovChain2& a, const MarkovChain2& b) {
  constexpr std::size_t n = MarkovChain2::kAlphabet;
  auto prob = [](const MarkovChain2& c, std::size_t ctx, std::size_t s) {
    double total = 0;
    for (auto x : c.weights[ctx]) total += static_cast<double>(x);
    return static_cast<double>(c.weights[ctx][s]) / total;
  };
  std::vector<double> pi(kContexts, 1.0 / kContexts);
  for (int iter = 0; iter < 2000; ++iter) {
    std::vector<double> next(kContexts, 0.0);
    for (std::size_t ctx = 0; ctx < kContexts; ++ctx) {
      const std::size_t p1 = ctx % n;
      for (std::size_t s = 0; s < n; ++s) next[p1 * n + s] += pi[ctx] * prob(a, ctx, s);
    }
    pi.swap(next);
  }
  double kl = 0;
  for (std::size_t ctx = 0; ctx < kContexts; ++ctx) {
    for (std::size_t s = 0; s < n; ++s) {
      const double p = prob(a, ctx, s);
      kl += pi[ctx] * p * std::log2(p / prob(b, ctx, s));
    }
  }
  return kl;
}

Dataset make_markov_corpus(const MarkovCorpusConfig& config) {
  const auto chains = corpus_chains(config.seed);
  Dataset ds;
  ds.name = "markov2";
  ds.class_names = {"chain_a", "chain_b"};
  SplitMix64 rng(config.seed);
  const std::size_t span = config.max_length - config.min_length + 1;
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t d = 0; d < config.docs_per_class; ++d) {
      const std::size_t length = config.min_length + rng.below(span);
      std::size_t p2 = rng.below(MarkovChain2::kAlphabet);
      std::size_t p1 = rng.below(MarkovChain2::kAlphabet);
      std::string text;
      text.reserve(length);
      text.push_back(static_cast<char>('a' + p2));
      text.push_back(static_cast<char>('a' + p1));
      while (text.size() < length) {
        const std::size_t s = draw(chains[c].weights[p2 * MarkovChain2::kAlphabet + p1], rng);
        text.push_back(static_cast<char>('a' + s));
        p2 = p1;
        p1 = s;
      }
      ds.documents.push_back(
          {"markov:" + std::to_string(ds.documents.size()), std::move(text), static_cast<ClassId>(c)});
      ds.splits.push_back(Split::unspecified);
    }
  }
  return ds;
}

std::uint64_t corpus_fingerprint(const Dataset& dataset) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto feed = [&](const std::string& s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 0x100000001b3ull;
    }
  };
  for (const auto& doc : dataset.documents) {
    feed(doc.id + "\t" + dataset.class_names[doc.label] + "\t" + doc.text + "\n");
  }
  return h;
}

}  // namespace ncdkit::testing
