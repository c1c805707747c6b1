#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ncdkit/bridge/transport.hpp"
#include "ncdkit/codec/frequency_table.hpp"
#include "ncdkit/latent.hpp"

namespace ncdkit {

inline constexpr int kBridgeProtocolVersion = 1;

enum class TokenizerKind { byte, subword };

struct SessionInfo {
  int version = 0;
  std::string model_id;
  std::size_t vocab_size = 0;
  std::size_t max_context = 0;
  bool deterministic = false;
  TokenizerKind tokenizer = TokenizerKind::subword;
  std::size_t hidden_size = 0;
  std::vector<Pooling> pooling;
  bool binary = false;
};

struct SessionOptions {
  std::chrono::milliseconds timeout{30'000};
  // Ask the server for base64 little-endian float64 arrays.
  bool binary = false;
};

// Client half of the model-bridge protocol over one transport.
class ModelSession {
 public:
  // Performs the handshake. Throws Error(protocol) on a version mismatch or
  // a malformed reply and Error(bridge) when the transport fails.
  ModelSession(std::unique_ptr<Transport> transport, SessionOptions options = {});

  static ModelSession open(const std::string& endpoint, SessionOptions options = {});

  const SessionInfo& info() const noexcept { return info_; }

  // Next-token distributions may be used to drive a coder only when the
  // server attests deterministic inference.
  bool allows_coding() const noexcept { return info_.deterministic; }

  // Byte tokenizers map bytes to ids locally; subword tokenizers require
  // valid UTF-8 and ask the server.
  std::vector<Symbol> tokenize(std::string_view text);
  std::string detokenize(std::span<const Symbol> ids);

  // The tokens actually sent for `prefix`: the whole prefix while it is
  // shorter than max_context, otherwise its trailing max_context - 1 tokens.
  std::span<const Symbol> context_window(std::span<const Symbol> prefix) const;

  FrequencyTable next_distribution(std::span<const Symbol> prefix);

  // Distributions after each of the last `count` prefixes of `ids`, i.e.
  // for prefix lengths |ids| - count + 1 .. |ids|. `ids` must be shorter
  // than max_context.
  std::vector<FrequencyTable> next_distributions(std::span<const Symbol> ids, std::size_t count);

  LatentVector embed(std::string_view text, Pooling pooling);

  std::size_t requests() const noexcept { return requests_; }

 private:
  std::string call(const std::string& request);

  std::unique_ptr<Transport> transport_;
  SessionOptions options_;
  SessionInfo info_;
  std::size_t requests_ = 0;
};

}  // namespace ncdkit
