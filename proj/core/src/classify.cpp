#include "ncdkit/classify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "ncdkit/error.hpp"
#include "ncdkit/parallel.hpp"

namespace ncdkit {

std::vector<LabeledNeighbor> nearest_neighbors(std::span<const double> distances,
                                               std::span<const ClassId> labels, std::size_t k) {
  if (distances.empty()) raise(ErrorKind::empty_input, "kNN over an empty distance row");
  if (distances.size() != labels.size()) {
    raise(ErrorKind::dimension_mismatch, "distance row and label list differ in length");
  }
  if (k == 0 || k > distances.size()) {
    raise(ErrorKind::invalid_argument, "k must be in [1, " + std::to_string(distances.size()) + "]");
  }
  std::vector<std::size_t> order(distances.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto closer = [&](std::size_t a, std::size_t b) {
    if (distances[a] != distances[b]) return distances[a] < distances[b];
    return a < b;
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    closer);
  std::vector<LabeledNeighbor> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back({order[i], distances[order[i]], labels[order[i]]});
  return out;
}

ClassId knn_predict(std::span<const double> distances, std::span<const ClassId> labels,
                    std::size_t k) {
  struct Tally {
    std::size_t votes = 0;
    double summed = 0.0;
  };
  // std::map iterates in class-id order, which settles the last tie-break.
  std::map<ClassId, Tally> tally;
  for (const auto& n : nearest_neighbors(distances, labels, k)) {
    auto& t = tally[n.label];
    ++t.votes;
    t.summed += n.distance;
  }
  auto best = tally.begin();
  for (auto it = std::next(tally.begin()); it != tally.end(); ++it) {
    const Tally& a = it->second;
    const Tally& b = best->second;
    if (a.votes > b.votes || (a.votes == b.votes && a.summed < b.summed)) best = it;
  }
  return best->first;
}

std::vector<ClassId> knn_predict_all(const DistanceMatrix& matrix, std::span<const ClassId> labels,
                                     std::size_t k, std::size_t workers) {
  std::vector<ClassId> out(matrix.rows);
  parallel_for(matrix.rows, workers,
               [&](std::size_t r) { out[r] = knn_predict(matrix.row(r), labels, k); });
  return out;
}

DistanceMatrix euclidean_matrix(std::span<const LatentVector> train,
                                std::span<const LatentVector> test,
                                const EuclideanOptions& options) {
  if (train.empty() || test.empty()) {
    raise(ErrorKind::empty_input, "Euclidean matrix needs non-empty train and test sets");
  }
  const std::size_t dim = train.front().dimension();
  auto check = [&](const LatentVector& v) {
    if (v.dimension() != dim) {
      raise(ErrorKind::dimension_mismatch, "latent vectors of dimension " +
                                               std::to_string(v.dimension()) + " and " +
                                               std::to_string(dim));
    }
    for (double x : v.values) {
      if (!std::isfinite(x)) raise(ErrorKind::invalid_argument, "latent vector is not finite");
    }
  };
  for (const auto& v : train) check(v);
  for (const auto& v : test) check(v);

  auto prepared = [&](std::span<const LatentVector> set) {
    std::vector<std::vector<double>> out;
    out.reserve(set.size());
    for (const auto& v : set) {
      std::vector<double> x = v.values;
      if (options.normalize) {
        double norm = 0.0;
        for (double c : x) norm += c * c;
        norm = std::sqrt(norm);
        if (norm > 0.0) {
          for (double& c : x) c /= norm;
        }
      }
      out.push_back(std::move(x));
    }
    return out;
  };
  const auto a = prepared(test);
  const auto b = prepared(train);

  DistanceMatrix m;
  m.rows = test.size();
  m.cols = train.size();
  m.values.resize(m.rows * m.cols);
  parallel_for(m.rows, options.workers, [&](std::size_t i) {
    for (std::size_t j = 0; j < m.cols; ++j) {
      // Accumulate (a - b)^2 in index order so d(a, b) == d(b, a) bit for bit.
      double sum = 0.0;
      for (std::size_t c = 0; c < dim; ++c) {
        const double d = a[i][c] - b[j][c];
        sum += d * d;
      }
      m.values[i * m.cols + j] = std::sqrt(sum);
    }
  });
  return m;
}

double accuracy(std::span<const ClassId> predictions, std::span<const ClassId> truth) {
  if (predictions.size() != truth.size()) {
    raise(ErrorKind::dimension_mismatch, "prediction and truth lists differ in length");
  }
  if (predictions.empty()) raise(ErrorKind::empty_input, "accuracy of zero predictions");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) correct += predictions[i] == truth[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(truth.size());
}

}  // namespace ncdkit
