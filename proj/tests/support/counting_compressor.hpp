#pragma once

#include <atomic>
#include <map>
#include <mutex>
#include <string>

#include "ncdkit/compressors.hpp"

namespace ncdkit::testing {

// Wraps another compressor and counts the calls that reach it.
class CountingCompressor final : public Compressor {
 public:
  explicit CountingCompressor(CompressorHandle inner)
      : Compressor(inner->max_input()), inner_(std::move(inner)) {}

  std::string id() const override { return inner_->id(); }
  std::map<std::string, std::string> config() const override { return inner_->config(); }
  std::string compress(ByteView data) const override {
    record(data);
    return inner_->compress(data);
  }
  std::size_t measure(ByteView data) const override {
    record(data);
    return inner_->measure(data);
  }

  std::size_t calls() const { return calls_.load(); }
  std::map<std::string, std::size_t> inputs() const {
    std::lock_guard lock(mutex_);
    return inputs_;
  }

 private:
  void record(ByteView data) const {
    ++calls_;
    std::lock_guard lock(mutex_);
    ++inputs_[std::string(data)];
  }

  CompressorHandle inner_;
  mutable std::atomic<std::size_t> calls_{0};
  mutable std::mutex mutex_;
  mutable std::map<std::string, std::size_t> inputs_;
};

// Length is a fixed table lookup; anything unknown costs its byte length.
class TableCompressor final : public Compressor {
 public:
  explicit TableCompressor(std::map<std::string, std::size_t> lengths)
      : lengths_(std::move(lengths)) {}
  std::string id() const override { return "table"; }
  std::map<std::string, std::string> config() const override { return {}; }
  std::string compress(ByteView data) const override { return std::string(measure(data), 'z'); }
  std::size_t measure(ByteView data) const override {
    auto it = lengths_.find(std::string(data));
    return it == lengths_.end() ? data.size() : it->second;
  }

 private:
  std::map<std::string, std::size_t> lengths_;
};

}  // namespace ncdkit::testing
