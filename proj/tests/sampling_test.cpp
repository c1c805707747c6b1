#include <gtest/gtest.h>

#include <set>

#include "ncdkit/error.hpp"
#include "ncdkit/harness/sampling.hpp"

namespace ncdkit {
namespace {

Dataset synthetic(std::vector<std::size_t> per_class, bool with_test_split = false) {
  Dataset ds;
  ds.name = "synthetic";
  for (std::size_t c = 0; c < per_class.size(); ++c) {
    ds.class_names.push_back("c" + std::to_string(c));
    for (std::size_t i = 0; i < per_class[c]; ++i) {
      const std::string id = "c" + std::to_string(c) + "_" + std::to_string(i);
      ds.documents.push_back({id, "text " + id, static_cast<ClassId>(c)});
      ds.splits.push_back(with_test_split ? (i % 2 ? Split::test : Split::train)
                                          : Split::unspecified);
    }
  }
  return ds;
}

TEST(SplitMix64, ReferenceVectors) {
  SplitMix64 rng(1234567);
  EXPECT_EQ(rng.next(), 6457827717110365317ull);
  EXPECT_EQ(rng.next(), 3203168211198807973ull);
  EXPECT_EQ(rng.next(), 9817491932198370423ull);
  SplitMix64 zero(0);
  EXPECT_EQ(zero.next(), 0xE220A8397B1DCDAFull);
}

TEST(SplitMix64, BelowStaysInRange) {
  SplitMix64 rng(3);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) ++hits.at(rng.below(7));
  for (int h : hits) EXPECT_GT(h, 800);
  EXPECT_EQ(rng.below(1), 0u);
}

TEST(Sampling, TrialSeedsDiffer) {
  EXPECT_NE(trial_seed(0, 0), trial_seed(0, 1));
  EXPECT_NE(trial_seed(0, 0), trial_seed(1, 0));
  EXPECT_EQ(trial_seed(5, 2), trial_seed(5, 2));
}

TEST(Apportion, LargestRemainder) {
  const std::vector<std::size_t> a{50, 30, 20};
  EXPECT_EQ(apportion(a, 10), (std::vector<std::size_t>{5, 3, 2}));
  const std::vector<std::size_t> b{1, 1, 1};
  EXPECT_EQ(apportion(b, 2), (std::vector<std::size_t>{1, 1, 0}));
  const std::vector<std::size_t> c{7, 2};
  EXPECT_EQ(apportion(c, 3), (std::vector<std::size_t>{2, 1}));
  EXPECT_EQ(apportion(c, 0), (std::vector<std::size_t>{0, 0}));
  const std::vector<std::size_t> empty{0, 0};
  EXPECT_THROW(apportion(empty, 1), Error);
}

TEST(Sampling, ShotsPerClassAndDisjointSets) {
  const auto ds = synthetic({40, 30, 30});
  FewShotConfig cfg;
  cfg.shots_per_class = 5;
  cfg.test_samples = 20;
  const auto s = sample_few_shot(ds, cfg, 0);
  ASSERT_EQ(s.train.size(), 15u);
  ASSERT_EQ(s.test.size(), 20u);
  std::vector<std::size_t> per_class(3, 0);
  std::set<std::string> train_ids;
  for (const auto& d : s.train) {
    ++per_class[d.label];
    train_ids.insert(d.id);
  }
  EXPECT_EQ(per_class, (std::vector<std::size_t>{5, 5, 5}));
  std::vector<std::size_t> test_per_class(3, 0);
  for (const auto& d : s.test) {
    EXPECT_FALSE(train_ids.contains(d.id));
    ++test_per_class[d.label];
  }
  // pools after removing train: 35, 25, 25
  EXPECT_EQ(test_per_class, (std::vector<std::size_t>{8, 6, 6}));
}

TEST(Sampling, DeterministicPerTrial) {
  const auto ds = synthetic({20, 20});
  FewShotConfig cfg;
  cfg.test_samples = 10;
  cfg.seed = 77;
  const auto a = sample_few_shot(ds, cfg, 3);
  const auto b = sample_few_shot(ds, cfg, 3);
  const auto c = sample_few_shot(ds, cfg, 4);
  auto ids = [](const FewShotSample& s) {
    std::vector<std::string> out;
    for (const auto& d : s.train) out.push_back(d.id);
    for (const auto& d : s.test) out.push_back(d.id);
    return out;
  };
  EXPECT_EQ(ids(a), ids(b));
  EXPECT_NE(ids(a), ids(c));
}

TEST(Sampling, UsesDeclaredTestSplit) {
  const auto ds = synthetic({20, 20}, true);
  FewShotConfig cfg;
  cfg.shots_per_class = 4;
  cfg.test_samples = 12;
  const auto s = sample_few_shot(ds, cfg, 0);
  auto split_of = [&](const Document& d) {
    for (std::size_t i = 0; i < ds.documents.size(); ++i) {
      if (ds.documents[i].id == d.id) return ds.splits[i];
    }
    return Split::unspecified;
  };
  for (const auto& d : s.train) EXPECT_EQ(split_of(d), Split::train);
  for (const auto& d : s.test) EXPECT_EQ(split_of(d), Split::test);
}

TEST(Sampling, InsufficientPopulation) {
  const auto ds = synthetic({3, 30});
  FewShotConfig cfg;
  cfg.shots_per_class = 5;
  try {
    sample_few_shot(ds, cfg, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::insufficient_population);
    EXPECT_NE(std::string(e.what()).find("c0"), std::string::npos);
  }
  cfg.shots_per_class = 2;
  cfg.test_samples = 100;
  EXPECT_THROW(sample_few_shot(ds, cfg, 0), Error);
  cfg.shots_per_class = 0;
  EXPECT_THROW(sample_few_shot(ds, cfg, 0), Error);
}

TEST(Sampling, DefaultShotCounts) {
  EXPECT_EQ(default_shot_counts(), (std::vector<std::size_t>{5, 10, 50, 100}));
}

}  // namespace
}  // namespace ncdkit
