#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ncdkit/document.hpp"
#include "ncdkit/latent.hpp"
#include "ncdkit/ncd.hpp"

namespace ncdkit {

struct LabeledNeighbor {
  std::size_t train_index = 0;
  double distance = 0.0;
  ClassId label = 0;
};

// The k nearest entries of `distances`, nearest first; equal distances are
// ordered by lower train index.
std::vector<LabeledNeighbor> nearest_neighbors(std::span<const double> distances,
                                               std::span<const ClassId> labels, std::size_t k);

// Unweighted majority vote among the k nearest. A vote tie goes to the class
// with the smaller summed neighbor distance, then to the lower class id.
// Throws Error(empty_input) for an empty row, Error(invalid_argument) when k
// is 0 or exceeds the row, Error(dimension_mismatch) when sizes differ.
ClassId knn_predict(std::span<const double> distances, std::span<const ClassId> labels,
                    std::size_t k);

std::vector<ClassId> knn_predict_all(const DistanceMatrix& matrix, std::span<const ClassId> labels,
                                     std::size_t k, std::size_t workers = 1);

struct EuclideanOptions {
  // Scale every vector to unit L2 norm before measuring.
  bool normalize = false;
  std::size_t workers = 1;
};

// entry[i][j] = ||test_i - train_j||_2. Throws Error(dimension_mismatch)
// unless every vector has the same dimension, Error(empty_input) for empty
// sets.
DistanceMatrix euclidean_matrix(std::span<const LatentVector> train,
                                std::span<const LatentVector> test,
                                const EuclideanOptions& options = {});

// Fraction of matching entries. Throws Error(dimension_mismatch) on a length
// mismatch and Error(empty_input) for empty inputs.
double accuracy(std::span<const ClassId> predictions, std::span<const ClassId> truth);

}  // namespace ncdkit
