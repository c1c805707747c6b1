#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ncdkit/codec/models.hpp"

namespace ncdkit {

using ByteView = std::string_view;

inline constexpr std::size_t kDefaultMaxInput = std::size_t{1} << 20;

struct CompressedLength {
  std::size_t bytes = 0;
  std::size_t input_bytes = 0;
};

// A compressor reduced to what compression distance needs: the length of
// its output. Implementations are immutable and safe to share across
// threads; every call builds private backend state.
class Compressor {
 public:
  explicit Compressor(std::size_t max_input = kDefaultMaxInput) : max_input_(max_input) {}
  virtual ~Compressor() = default;

  Compressor(const Compressor&) = delete;
  Compressor& operator=(const Compressor&) = delete;

  virtual std::string id() const = 0;
  virtual std::map<std::string, std::string> config() const = 0;

  // Complete output stream: the codec's standard framing for codec
  // backends, the raw coder bytes for arithmetic-coding backends.
  virtual std::string compress(ByteView data) const = 0;

  // Output length; backends may override when they can count without
  // materializing the stream.
  virtual std::size_t measure(ByteView data) const { return compress(data).size(); }

  std::size_t max_input() const noexcept { return max_input_; }

 private:
  std::size_t max_input_;
};

using CompressorHandle = std::shared_ptr<const Compressor>;

// Throws Error(size_limit) past the compressor's input cap.
CompressedLength compressed_length(const Compressor& compressor, ByteView data);

// Sum of compressed sizes over sum of original sizes, each document
// compressed on its own. Throws Error(empty_input) for an empty corpus or a
// corpus with zero total bytes.
double compression_rate(const Compressor& compressor, std::span<const std::string> corpus);
double compression_rate(const Compressor& compressor, std::span<const ByteView> corpus);

std::string concat(ByteView x, ByteView y, ByteView separator = {});

// gzip framing (RFC 1952 around raw deflate), zero mtime.
CompressorHandle make_gzip_compressor(int level = 6, std::size_t max_input = kDefaultMaxInput);
// .xz container, CRC64 check.
CompressorHandle make_lzma_compressor(unsigned preset = 6, std::size_t max_input = kDefaultMaxInput);
// zstd frame with content size.
CompressorHandle make_zstd_compressor(int level = 3, std::size_t max_input = kDefaultMaxInput);

// Arithmetic coding of the input bytes (alphabet 256) under a built-in
// model. `model_name` is recorded into the id as "ac:<model_name>".
CompressorHandle make_arithmetic_compressor(const std::string& model_name, ModelFactory factory,
                                            std::size_t max_input = kDefaultMaxInput);

struct CompressorOptions {
  std::size_t max_input = kDefaultMaxInput;
  // Used by "ac:lm" when the spec names no endpoint.
  std::string default_endpoint;
  std::size_t batch_size = 64;
};

// Spec grammar: "gzip", "zstd", "lzma", "ac:<builtin model>", "ac:lm",
// "ac:lm@<endpoint>". Throws Error(usage) for unknown specs.
CompressorHandle make_compressor(std::string_view spec, const CompressorOptions& options = {});

}  // namespace ncdkit
