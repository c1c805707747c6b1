#include "ncdkit/bridge/bridged_compressor.hpp"

#include "ncdkit/bridge/bridged_model.hpp"
#include "ncdkit/codec/arithmetic_coder.hpp"
#include "ncdkit/error.hpp"

namespace ncdkit {

SessionPool::Lease::~Lease() {
  if (pool_ != nullptr && session_) pool_->release(std::move(session_));
}

SessionPool::Lease SessionPool::acquire() {
  {
    std::lock_guard lock(mutex_);
    if (!idle_.empty()) {
      auto session = std::move(idle_.back());
      idle_.pop_back();
      return Lease(*this, std::move(session));
    }
  }
  auto session = std::make_unique<ModelSession>(open_transport(endpoint_), options_);
  {
    std::lock_guard lock(mutex_);
    if (!info_) info_ = session->info();
  }
  return Lease(*this, std::move(session));
}

SessionInfo SessionPool::info() {
  {
    std::lock_guard lock(mutex_);
    if (info_) return *info_;
  }
  auto lease = acquire();
  return lease->info();
}

void SessionPool::release(std::unique_ptr<ModelSession> session) {
  std::lock_guard lock(mutex_);
  idle_.push_back(std::move(session));
}

namespace {

class BridgedCompressor final : public Compressor {
 public:
  BridgedCompressor(std::string endpoint, std::size_t batch_size, std::size_t max_input)
      : Compressor(max_input), endpoint_(endpoint), batch_size_(batch_size),
        pool_(std::make_unique<SessionPool>(std::move(endpoint))) {}

  std::string id() const override { return "ac:lm@" + endpoint_; }

  std::map<std::string, std::string> config() const override {
    const SessionInfo info = pool_->info();
    return {{"family", "arithmetic"},
            {"model", "lm"},
            {"endpoint", endpoint_},
            {"model_id", info.model_id},
            {"vocab_size", std::to_string(info.vocab_size)},
            {"max_context", std::to_string(info.max_context)},
            {"tokenizer", info.tokenizer == TokenizerKind::byte ? "byte" : "subword"},
            {"window", "stride 1, trailing max_context-1"},
            {"frequency_bits", std::to_string(kFrequencyBits)},
            {"header", "none"}};
  }

  std::string compress(ByteView data) const override {
    auto lease = pool_->acquire();
    try {
      if (!lease->allows_coding()) {
        raise(ErrorKind::bridge, "model server " + endpoint_ +
                                     " does not attest deterministic inference; refusing to code");
      }
      const std::vector<Symbol> tokens = lease->tokenize(data);
      BridgedModel model(*lease, tokens, batch_size_);
      const CodedStream stream = encode(model, tokens);
      return std::string(stream.bytes.begin(), stream.bytes.end());
    } catch (...) {
      lease.discard();
      throw;
    }
  }

 private:
  std::string endpoint_;
  std::size_t batch_size_;
  std::unique_ptr<SessionPool> pool_;
};

}  // namespace

CompressorHandle make_bridged_compressor(const std::string& endpoint, std::size_t batch_size,
                                         std::size_t max_input) {
  return std::make_shared<BridgedCompressor>(endpoint, batch_size, max_input);
}

}  // namespace ncdkit
