#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace ncdkit {

// One ordered stream of newline-delimited messages. A transport is owned by
// a single session and is not thread-safe.
class Transport {
 public:
  virtual ~Transport() = default;

  // Sends one line (without its terminator) and returns the reply line.
  // Throws Error(timeout) when no full reply arrives within `timeout` and
  // Error(bridge) when the peer goes away.
  virtual std::string round_trip(std::string_view request, std::chrono::milliseconds timeout) = 0;

  virtual std::string describe() const = 0;
};

// Endpoint forms:
//   exec:<command>     spawn `/bin/sh -c <command>` and talk over its stdio
//   unix:<path>        connect to a unix domain socket
//   tcp:<host>:<port>  connect over TCP
//   replay:<file>      answer from a recorded transcript
std::unique_ptr<Transport> open_transport(const std::string& endpoint);

struct TranscriptEntry {
  std::string request;
  std::string response;
};

// Transcript file: alternating lines "> <request>" and "< <response>".
std::vector<TranscriptEntry> read_transcript(const std::filesystem::path& path);
void write_transcript(const std::filesystem::path& path, const std::vector<TranscriptEntry>& entries);

// Serves responses from a transcript, requiring every request to match the
// recorded one byte for byte. Throws Error(protocol) on divergence.
class ReplayTransport final : public Transport {
 public:
  explicit ReplayTransport(std::vector<TranscriptEntry> entries);

  std::string round_trip(std::string_view request, std::chrono::milliseconds timeout) override;
  std::string describe() const override { return "replay"; }

  std::size_t remaining() const noexcept { return entries_.size() - next_; }

 private:
  std::vector<TranscriptEntry> entries_;
  std::size_t next_ = 0;
};

// Pass-through that keeps a copy of every exchange.
class RecordingTransport final : public Transport {
 public:
  explicit RecordingTransport(std::unique_ptr<Transport> inner) : inner_(std::move(inner)) {}

  std::string round_trip(std::string_view request, std::chrono::milliseconds timeout) override;
  std::string describe() const override { return inner_->describe(); }

  const std::vector<TranscriptEntry>& entries() const noexcept { return entries_; }

 private:
  std::unique_ptr<Transport> inner_;
  std::vector<TranscriptEntry> entries_;
};

}  // namespace ncdkit
