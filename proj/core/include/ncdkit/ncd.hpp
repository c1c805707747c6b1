#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ncdkit/compressors.hpp"
#include "ncdkit/document.hpp"

namespace ncdkit {

// (C(xy) - min(C(x), C(y))) / max(C(x), C(y)), unclamped. Throws
// Error(degenerate_input) when both single lengths are zero.
double ncd(std::size_t cx, std::size_t cy, std::size_t cxy);

inline double ncd(const CompressedLength& cx, const CompressedLength& cy,
                  const CompressedLength& cxy) {
  return ncd(cx.bytes, cy.bytes, cxy.bytes);
}

// max(K(x|y), K(y|x)) / max(K(x), K(y)) for caller-supplied complexity
// surrogates. Throws Error(degenerate_input) unless kx and ky are positive.
double nid(double kx_given_y, double ky_given_x, double kx, double ky);

// Compressed lengths behind one matrix entry. `cyx` is set only when the
// matrix was built symmetrized.
struct PairRecord {
  std::size_t cx = 0;
  std::size_t cy = 0;
  std::size_t cxy = 0;
  std::size_t cyx = 0;
};

struct MatrixStats {
  std::size_t pair_compressions = 0;
  std::size_t single_compressions = 0;
  std::size_t cache_hits = 0;
  // Pairs with C(xy) > C(x) + C(y) + 64: telemetry only.
  std::size_t subadditivity_flags = 0;
};

// Test-by-train distances plus the lengths they were computed from. Rows are
// test documents, columns train documents.
struct DistanceMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  std::vector<std::string> row_ids;
  std::vector<std::string> col_ids;
  std::map<std::string, CompressedLength> single_lengths;
  std::vector<PairRecord> pair_log;
  MatrixStats stats;

  double at(std::size_t row, std::size_t col) const { return values[row * cols + col]; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(values).subspan(r * cols, cols);
  }
};

struct DistanceOptions {
  std::string separator;
  // min(C(test.train), C(train.test)) instead of C(test.train) alone.
  bool symmetrize = false;
  // With the cache off every pair recompresses both singles.
  bool cache = true;
  bool log_pairs = true;
  // 0 selects the hardware concurrency.
  std::size_t workers = 0;
};

// entry[i][j] = ncd(C(test_i), C(train_j), C(test_i + sep + train_j)).
// Singles are compressed once per distinct document id in a warmup phase
// before the pair phase. Results are identical for any worker count. A
// backend failure aborts with Error naming the failing document or pair.
DistanceMatrix distance_matrix(const Compressor& compressor, std::span<const Document> train,
                               std::span<const Document> test, const DistanceOptions& options = {});

// Row-major CSV; the header row lists train ids, each row starts with its
// test id.
void write_csv(const DistanceMatrix& matrix, std::ostream& out);

// "NCDM", u32 rows, u32 cols, f64 values row-major, all little-endian.
void write_binary(const DistanceMatrix& matrix, std::ostream& out);
DistanceMatrix read_binary(std::istream& in);

}  // namespace ncdkit
