#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ncdkit/bridge/session.hpp"
#include "ncdkit/compressors.hpp"

namespace ncdkit {

// Sessions to one endpoint, handed out one per concurrent caller.
class SessionPool {
 public:
  class Lease {
   public:
    Lease(SessionPool& pool, std::unique_ptr<ModelSession> session)
        : pool_(&pool), session_(std::move(session)) {}
    Lease(Lease&&) noexcept = default;
    Lease& operator=(Lease&&) noexcept = default;
    ~Lease();

    ModelSession& operator*() const { return *session_; }
    ModelSession* operator->() const { return session_.get(); }

    // Drop the session instead of returning it (its stream may be out of
    // sync after a failed request).
    void discard() noexcept { session_.reset(); }

   private:
    SessionPool* pool_;
    std::unique_ptr<ModelSession> session_;
  };

  explicit SessionPool(std::string endpoint, SessionOptions options = {})
      : endpoint_(std::move(endpoint)), options_(options) {}

  Lease acquire();
  const std::string& endpoint() const noexcept { return endpoint_; }

  // Handshake info of the first session opened (opens one if needed).
  SessionInfo info();

 private:
  void release(std::unique_ptr<ModelSession> session);

  std::string endpoint_;
  SessionOptions options_;
  std::mutex mutex_;
  std::vector<std::unique_ptr<ModelSession>> idle_;
  std::optional<SessionInfo> info_;
};

// "ac:lm@<endpoint>": tokenize with the model's tokenizer, then arithmetic
// code under the bridged model. Length is the raw coder byte count.
CompressorHandle make_bridged_compressor(const std::string& endpoint, std::size_t batch_size = 64,
                                         std::size_t max_input = kDefaultMaxInput);

}  // namespace ncdkit
