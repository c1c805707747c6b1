#include "ncdkit/compressors.hpp"

#include <lzma.h>
#include <zlib.h>
#include <zstd.h>

#include <numeric>
#include <vector>

#include "ncdkit/bridge/bridged_compressor.hpp"
#include "ncdkit/codec/arithmetic_coder.hpp"
#include "ncdkit/error.hpp"

namespace ncdkit {
namespace {

class GzipCompressor final : public Compressor {
 public:
  GzipCompressor(int level, std::size_t max_input) : Compressor(max_input), level_(level) {
    if (level < 0 || level > 9) raise(ErrorKind::invalid_argument, "gzip level must be 0..9");
  }

  std::string id() const override { return "gzip"; }
  std::map<std::string, std::string> config() const override {
    return {{"family", "gzip"}, {"framing", "gzip"}, {"level", std::to_string(level_)},
            {"zlib", zlibVersion()}};
  }

  std::string compress(ByteView data) const override {
    z_stream zs{};
    // 15 window bits + 16 selects the gzip wrapper.
    if (deflateInit2(&zs, level_, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
      raise(ErrorKind::invalid_argument, "deflateInit2 failed");
    }
    std::string out(deflateBound(&zs, static_cast<uLong>(data.size())), '\0');
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
    zs.avail_in = static_cast<uInt>(data.size());
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = deflate(&zs, Z_FINISH);
    const auto written = zs.total_out;
    deflateEnd(&zs);
    if (rc != Z_STREAM_END) raise(ErrorKind::invalid_argument, "deflate did not finish");
    out.resize(written);
    return out;
  }

 private:
  int level_;
};

class LzmaCompressor final : public Compressor {
 public:
  LzmaCompressor(unsigned preset, std::size_t max_input) : Compressor(max_input), preset_(preset) {
    if (preset > 9) raise(ErrorKind::invalid_argument, "lzma preset must be 0..9");
  }

  std::string id() const override { return "lzma"; }
  std::map<std::string, std::string> config() const override {
    return {{"family", "lzma"}, {"framing", "xz"}, {"preset", std::to_string(preset_)},
            {"check", "crc64"}, {"liblzma", lzma_version_string()}};
  }

  // Streaming encoder, as the xz tool and Python's lzma module use; the
  // single-call buffer API writes block sizes into the header and differs.
  std::string compress(ByteView data) const override {
    lzma_stream strm = LZMA_STREAM_INIT;
    if (lzma_easy_encoder(&strm, preset_, LZMA_CHECK_CRC64) != LZMA_OK) {
      raise(ErrorKind::invalid_argument, "lzma_easy_encoder failed");
    }
    std::string out(lzma_stream_buffer_bound(data.size()), '\0');
    strm.next_in = reinterpret_cast<const std::uint8_t*>(data.data());
    strm.avail_in = data.size();
    strm.next_out = reinterpret_cast<std::uint8_t*>(out.data());
    strm.avail_out = out.size();
    const lzma_ret rc = lzma_code(&strm, LZMA_FINISH);
    const std::size_t written = out.size() - strm.avail_out;
    lzma_end(&strm);
    if (rc != LZMA_STREAM_END) raise(ErrorKind::invalid_argument, "lzma encoding did not finish");
    out.resize(written);
    return out;
  }

 private:
  unsigned preset_;
};

class ZstdCompressor final : public Compressor {
 public:
  ZstdCompressor(int level, std::size_t max_input) : Compressor(max_input), level_(level) {
    if (level < 1 || level > ZSTD_maxCLevel()) {
      raise(ErrorKind::invalid_argument, "zstd level out of range");
    }
  }

  std::string id() const override { return "zstd"; }
  std::map<std::string, std::string> config() const override {
    return {{"family", "zstd"}, {"framing", "zstd"}, {"level", std::to_string(level_)},
            {"libzstd", ZSTD_versionString()}};
  }

  std::string compress(ByteView data) const override {
    std::string out(ZSTD_compressBound(data.size()), '\0');
    const std::size_t n = ZSTD_compress(out.data(), out.size(), data.data(), data.size(), level_);
    if (ZSTD_isError(n)) {
      raise(ErrorKind::invalid_argument, std::string("zstd: ") + ZSTD_getErrorName(n));
    }
    out.resize(n);
    return out;
  }

 private:
  int level_;
};

class ArithmeticCompressor final : public Compressor {
 public:
  ArithmeticCompressor(std::string model_name, ModelFactory factory, std::size_t max_input)
      : Compressor(max_input), model_name_(std::move(model_name)), factory_(std::move(factory)) {}

  std::string id() const override { return "ac:" + model_name_; }
  std::map<std::string, std::string> config() const override {
    return {{"family", "arithmetic"}, {"model", model_name_}, {"alphabet", "256"},
            {"frequency_bits", std::to_string(kFrequencyBits)}, {"header", "none"}};
  }

  std::string compress(ByteView data) const override {
    std::vector<Symbol> symbols(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      symbols[i] = static_cast<unsigned char>(data[i]);
    }
    auto model = factory_();
    const CodedStream stream = encode(*model, symbols);
    return std::string(stream.bytes.begin(), stream.bytes.end());
  }

 private:
  std::string model_name_;
  ModelFactory factory_;
};

template <class Range>
double rate_of(const Compressor& compressor, const Range& corpus) {
  if (corpus.empty()) raise(ErrorKind::empty_input, "compression rate of an empty corpus");
  std::size_t compressed = 0;
  std::size_t original = 0;
  for (const auto& doc : corpus) {
    const CompressedLength len = compressed_length(compressor, ByteView(doc));
    compressed += len.bytes;
    original += len.input_bytes;
  }
  if (original == 0) raise(ErrorKind::empty_input, "compression rate of zero input bytes");
  return static_cast<double>(compressed) / static_cast<double>(original);
}

}  // namespace

CompressedLength compressed_length(const Compressor& compressor, ByteView data) {
  if (data.size() > compressor.max_input()) {
    raise(ErrorKind::size_limit, "input of " + std::to_string(data.size()) +
                                     " bytes exceeds the " +
                                     std::to_string(compressor.max_input()) + "-byte limit");
  }
  return CompressedLength{compressor.measure(data), data.size()};
}

double compression_rate(const Compressor& compressor, std::span<const std::string> corpus) {
  return rate_of(compressor, corpus);
}

double compression_rate(const Compressor& compressor, std::span<const ByteView> corpus) {
  return rate_of(compressor, corpus);
}

std::string concat(ByteView x, ByteView y, ByteView separator) {
  std::string out;
  out.reserve(x.size() + separator.size() + y.size());
  out.append(x);
  out.append(separator);
  out.append(y);
  return out;
}

CompressorHandle make_gzip_compressor(int level, std::size_t max_input) {
  return std::make_shared<GzipCompressor>(level, max_input);
}

CompressorHandle make_lzma_compressor(unsigned preset, std::size_t max_input) {
  return std::make_shared<LzmaCompressor>(preset, max_input);
}

CompressorHandle make_zstd_compressor(int level, std::size_t max_input) {
  return std::make_shared<ZstdCompressor>(level, max_input);
}

CompressorHandle make_arithmetic_compressor(const std::string& model_name, ModelFactory factory,
                                            std::size_t max_input) {
  return std::make_shared<ArithmeticCompressor>(model_name, std::move(factory), max_input);
}

CompressorHandle make_compressor(std::string_view spec, const CompressorOptions& options) {
  if (spec == "gzip") return make_gzip_compressor(6, options.max_input);
  if (spec == "zstd") return make_zstd_compressor(3, options.max_input);
  if (spec == "lzma") return make_lzma_compressor(6, options.max_input);
  if (spec.starts_with("ac:")) {
    const std::string_view model = spec.substr(3);
    if (model == "lm" || model.starts_with("lm@")) {
      std::string endpoint =
          model.size() > 3 ? std::string(model.substr(3)) : options.default_endpoint;
      if (endpoint.empty()) {
        raise(ErrorKind::bridge, "\"ac:lm\" needs an endpoint (ac:lm@<endpoint> or NCDKIT_BRIDGE)");
      }
      return make_bridged_compressor(endpoint, options.batch_size, options.max_input);
    }
    if (auto factory = builtin_model_factory(model, 256)) {
      return make_arithmetic_compressor(std::string(model), std::move(*factory), options.max_input);
    }
  }
  raise(ErrorKind::usage, "unknown compressor spec \"" + std::string(spec) + "\"");
}

}  // namespace ncdkit
