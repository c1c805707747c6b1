#include <gtest/gtest.h>

#include <cmath>

#include "ncdkit/classify.hpp"
#include "ncdkit/error.hpp"

namespace ncdkit {
namespace {

TEST(Knn, MajorityVote) {
  const std::vector<double> d{0.1, 0.9, 0.2, 0.3, 0.8};
  const std::vector<ClassId> labels{0, 1, 1, 1, 0};
  EXPECT_EQ(knn_predict(d, labels, 1), 0u);
  EXPECT_EQ(knn_predict(d, labels, 3), 1u);
}

TEST(Knn, NeighborTiesPreferLowerIndex) {
  const std::vector<double> d{0.5, 0.5, 0.5};
  const std::vector<ClassId> labels{2, 1, 0};
  const auto n = nearest_neighbors(d, labels, 2);
  ASSERT_EQ(n.size(), 2u);
  EXPECT_EQ(n[0].train_index, 0u);
  EXPECT_EQ(n[1].train_index, 1u);
  EXPECT_EQ(knn_predict(d, labels, 1), 2u);
}

TEST(Knn, VoteTieGoesToSmallerSummedDistance) {
  const std::vector<double> d{0.2, 0.1, 0.4, 0.3};
  const std::vector<ClassId> labels{0, 1, 0, 1};
  // k=4: two votes each; class 1 sums 0.4, class 0 sums 0.6
  EXPECT_EQ(knn_predict(d, labels, 4), 1u);
}

TEST(Knn, FullTieGoesToLowerClassId) {
  const std::vector<double> d{0.3, 0.3};
  const std::vector<ClassId> labels{1, 0};
  EXPECT_EQ(knn_predict(d, labels, 2), 0u);
}

TEST(Knn, ThreeWaySplitWithKThree) {
  const std::vector<double> d{0.3, 0.1, 0.2};
  const std::vector<ClassId> labels{0, 1, 2};
  EXPECT_EQ(knn_predict(d, labels, 3), 1u);
}

TEST(Knn, ArgumentErrors) {
  const std::vector<double> d{0.1, 0.2};
  const std::vector<ClassId> labels{0, 1};
  const std::vector<ClassId> short_labels{0};
  auto kind = [](auto f) {
    try {
      f();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::usage;
  };
  EXPECT_EQ(kind([&] { knn_predict(d, labels, 0); }), ErrorKind::invalid_argument);
  EXPECT_EQ(kind([&] { knn_predict(d, labels, 3); }), ErrorKind::invalid_argument);
  EXPECT_EQ(kind([&] { knn_predict(d, short_labels, 1); }), ErrorKind::dimension_mismatch);
  EXPECT_EQ(kind([&] { knn_predict({}, {}, 1); }), ErrorKind::empty_input);
}

TEST(Knn, PredictAllRowByRow) {
  DistanceMatrix m;
  m.rows = 2;
  m.cols = 3;
  m.values = {0.1, 0.5, 0.6, 0.9, 0.2, 0.1};
  const std::vector<ClassId> labels{0, 1, 1};
  EXPECT_EQ(knn_predict_all(m, labels, 1), (std::vector<ClassId>{0, 1}));
  EXPECT_EQ(knn_predict_all(m, labels, 1, 4), (std::vector<ClassId>{0, 1}));
}

TEST(Euclidean, Distances) {
  std::vector<LatentVector> train{{{0, 0}, Pooling::mean_tokens}, {{3, 4}, Pooling::mean_tokens}};
  std::vector<LatentVector> test{{{0, 4}, Pooling::mean_tokens}};
  const auto m = euclidean_matrix(train, test);
  EXPECT_EQ(m.at(0, 0), 4.0);
  EXPECT_EQ(m.at(0, 1), 3.0);
}

TEST(Euclidean, NormalizeScalesToUnitLength) {
  std::vector<LatentVector> train{{{10, 0}, Pooling::final_state}};
  std::vector<LatentVector> test{{{0, 0.5}, Pooling::final_state}};
  EuclideanOptions opts;
  opts.normalize = true;
  EXPECT_DOUBLE_EQ(euclidean_matrix(train, test, opts).at(0, 0), std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(euclidean_matrix(train, test).at(0, 0), std::sqrt(100.25));
}

TEST(Euclidean, Errors) {
  std::vector<LatentVector> train{{{1, 2}, Pooling::mean_tokens}};
  std::vector<LatentVector> test{{{1, 2, 3}, Pooling::mean_tokens}};
  EXPECT_THROW(euclidean_matrix(train, test), Error);
  EXPECT_THROW(euclidean_matrix({}, test), Error);
  std::vector<LatentVector> bad{{{NAN, 0}, Pooling::mean_tokens}};
  EXPECT_THROW(euclidean_matrix(train, bad), Error);
}

TEST(Accuracy, Fraction) {
  const std::vector<ClassId> p{0, 1, 1, 0};
  const std::vector<ClassId> t{0, 1, 0, 0};
  EXPECT_DOUBLE_EQ(accuracy(p, t), 0.75);
  EXPECT_THROW(accuracy(p, std::vector<ClassId>{0}), Error);
  EXPECT_THROW(accuracy({}, {}), Error);
}

}  // namespace
}  // namespace ncdkit
