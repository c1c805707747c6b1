#include "ncdkit/ncd.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>

#include "ncdkit/error.hpp"
#include "ncdkit/parallel.hpp"

namespace ncdkit {
namespace {

constexpr std::size_t kSubadditivitySlack = 64;

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

template <class T>
void put_le(std::ostream& out, T value) {
  static_assert(std::endian::native == std::endian::little, "little-endian host assumed");
  char raw[sizeof(T)];
  std::memcpy(raw, &value, sizeof(T));
  out.write(raw, sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
  char raw[sizeof(T)];
  if (!in.read(raw, sizeof(T))) raise(ErrorKind::parse, "NCDM stream truncated");
  T value;
  std::memcpy(&value, raw, sizeof(T));
  return value;
}

std::string describe(const std::exception& e) { return e.what(); }

}  // namespace

double ncd(std::size_t cx, std::size_t cy, std::size_t cxy) {
  const std::size_t hi = std::max(cx, cy);
  const std::size_t lo = std::min(cx, cy);
  if (hi == 0) raise(ErrorKind::degenerate_input, "NCD of two zero-length compressions");
  return (static_cast<double>(cxy) - static_cast<double>(lo)) / static_cast<double>(hi);
}

double nid(double kx_given_y, double ky_given_x, double kx, double ky) {
  if (!(kx > 0.0) || !(ky > 0.0)) {
    raise(ErrorKind::degenerate_input, "NID needs positive K(x) and K(y)");
  }
  return std::max(kx_given_y, ky_given_x) / std::max(kx, ky);
}

DistanceMatrix distance_matrix(const Compressor& compressor, std::span<const Document> train,
                               std::span<const Document> test, const DistanceOptions& options) {
  if (train.empty() || test.empty()) {
    raise(ErrorKind::empty_input, "distance matrix needs non-empty train and test sets");
  }
  DistanceMatrix m;
  m.rows = test.size();
  m.cols = train.size();
  m.values.assign(m.rows * m.cols, 0.0);
  for (const auto& d : test) m.row_ids.push_back(d.id);
  for (const auto& d : train) m.col_ids.push_back(d.id);

  auto compress_single = [&](const Document& d) {
    try {
      return compressed_length(compressor, d.text);
    } catch (const Error& e) {
      throw Error(e.kind(), "compressing document " + d.id + ": " + describe(e));
    }
  };

  // Warmup: one slot per distinct id, filled in parallel, read-only after.
  std::vector<const Document*> distinct;
  std::map<std::string, std::size_t> slot_of;
  auto register_doc = [&](const Document& d) {
    auto [it, inserted] = slot_of.try_emplace(d.id, distinct.size());
    if (inserted) {
      distinct.push_back(&d);
    } else if (distinct[it->second]->text != d.text) {
      raise(ErrorKind::invalid_argument, "document id " + d.id + " names two different texts");
    }
  };
  for (const auto& d : test) register_doc(d);
  for (const auto& d : train) register_doc(d);

  std::vector<CompressedLength> singles;
  if (options.cache) {
    singles.resize(distinct.size());
    parallel_for(distinct.size(), options.workers,
                 [&](std::size_t i) { singles[i] = compress_single(*distinct[i]); });
    m.stats.single_compressions = distinct.size();
    m.stats.cache_hits = 2 * m.rows * m.cols;
    for (std::size_t i = 0; i < distinct.size(); ++i) m.single_lengths[distinct[i]->id] = singles[i];
  }

  std::vector<PairRecord> log(m.rows * m.cols);
  parallel_for(m.rows * m.cols, options.workers, [&](std::size_t k) {
    const Document& x = test[k / m.cols];
    const Document& y = train[k % m.cols];
    PairRecord& rec = log[k];
    if (options.cache) {
      rec.cx = singles[slot_of.at(x.id)].bytes;
      rec.cy = singles[slot_of.at(y.id)].bytes;
    } else {
      rec.cx = compress_single(x).bytes;
      rec.cy = compress_single(y).bytes;
    }
    try {
      rec.cxy = compressed_length(compressor, concat(x.text, y.text, options.separator)).bytes;
      if (options.symmetrize) {
        rec.cyx = compressed_length(compressor, concat(y.text, x.text, options.separator)).bytes;
      }
    } catch (const Error& e) {
      throw Error(e.kind(), "compressing pair (test " + x.id + ", train " + y.id + "): " +
                                describe(e));
    }
    const std::size_t joint = options.symmetrize ? std::min(rec.cxy, rec.cyx) : rec.cxy;
    m.values[k] = ncd(rec.cx, rec.cy, joint);
  });

  m.stats.pair_compressions = m.rows * m.cols * (options.symmetrize ? 2 : 1);
  if (!options.cache) {
    m.stats.single_compressions = 2 * m.rows * m.cols;
    for (std::size_t k = 0; k < log.size(); ++k) {
      m.single_lengths[test[k / m.cols].id] = {log[k].cx, test[k / m.cols].text.size()};
      m.single_lengths[train[k % m.cols].id] = {log[k].cy, train[k % m.cols].text.size()};
    }
  }
  for (const auto& rec : log) {
    if (rec.cxy > rec.cx + rec.cy + kSubadditivitySlack) ++m.stats.subadditivity_flags;
  }
  if (options.log_pairs) m.pair_log = std::move(log);
  return m;
}

void write_csv(const DistanceMatrix& matrix, std::ostream& out) {
  out << "test_id";
  for (const auto& id : matrix.col_ids) out << ',' << csv_field(id);
  out << '\n';
  char buf[32];
  for (std::size_t r = 0; r < matrix.rows; ++r) {
    out << csv_field(r < matrix.row_ids.size() ? matrix.row_ids[r] : std::to_string(r));
    for (double v : matrix.row(r)) {
      // %.17g round-trips a double exactly.
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << ',' << buf;
    }
    out << '\n';
  }
}

void write_binary(const DistanceMatrix& matrix, std::ostream& out) {
  out.write("NCDM", 4);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(matrix.rows));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(matrix.cols));
  for (double v : matrix.values) put_le<double>(out, v);
}

DistanceMatrix read_binary(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "NCDM", 4) != 0) {
    raise(ErrorKind::parse, "not an NCDM stream");
  }
  DistanceMatrix m;
  m.rows = get_le<std::uint32_t>(in);
  m.cols = get_le<std::uint32_t>(in);
  m.values.resize(m.rows * m.cols);
  for (double& v : m.values) v = get_le<double>(in);
  return m;
}

}  // namespace ncdkit
