#include "ncdkit/bridge/transport.hpp"

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>

#include "ncdkit/error.hpp"

extern char** environ;

namespace ncdkit {
namespace {

[[noreturn]] void bridge_error(const std::string& what) {
  raise(ErrorKind::bridge, what + ": " + std::strerror(errno));
}

// Writes with SIGPIPE blocked for this thread so a vanished peer surfaces as
// EPIPE instead of killing the process.
void write_all(int fd, std::string_view data) {
  sigset_t block;
  sigset_t old;
  sigemptyset(&block);
  sigaddset(&block, SIGPIPE);
  pthread_sigmask(SIG_BLOCK, &block, &old);
  int saved = 0;
  while (!data.empty()) {
    const ssize_t n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      saved = errno;
      break;
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  if (saved == EPIPE) {
    const timespec zero{0, 0};
    sigtimedwait(&block, nullptr, &zero);
  }
  pthread_sigmask(SIG_SETMASK, &old, nullptr);
  if (saved != 0) {
    errno = saved;
    bridge_error("write to model server failed");
  }
}

class FdChannel {
 public:
  FdChannel(int read_fd, int write_fd) : read_fd_(read_fd), write_fd_(write_fd) {}

  std::string round_trip(std::string_view request, std::chrono::milliseconds timeout) {
    std::string line(request);
    line.push_back('\n');
    write_all(write_fd_, line);
    return read_line(timeout);
  }

 private:
  std::string read_line(std::chrono::milliseconds timeout) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
      const auto nl = buffer_.find('\n', scanned_);
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        scanned_ = 0;
        return line;
      }
      scanned_ = buffer_.size();
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) {
        raise(ErrorKind::timeout, "no reply from model server within " +
                                      std::to_string(timeout.count()) + " ms");
      }
      pollfd pfd{read_fd_, POLLIN, 0};
      const int rc = ::poll(&pfd, 1, static_cast<int>(left.count()));
      if (rc < 0) {
        if (errno == EINTR) continue;
        bridge_error("poll on model server failed");
      }
      if (rc == 0) continue;
      char chunk[65536];
      const ssize_t n = ::read(read_fd_, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR || errno == EAGAIN) continue;
        bridge_error("read from model server failed");
      }
      if (n == 0) raise(ErrorKind::bridge, "model server closed the connection");
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  int read_fd_;
  int write_fd_;
  std::string buffer_;
  std::size_t scanned_ = 0;
};

class ProcessTransport final : public Transport {
 public:
  explicit ProcessTransport(std::string command) : command_(std::move(command)) {
    int to_child[2];
    int from_child[2];
    if (::pipe2(to_child, O_CLOEXEC) != 0) bridge_error("pipe failed");
    if (::pipe2(from_child, O_CLOEXEC) != 0) {
      ::close(to_child[0]);
      ::close(to_child[1]);
      bridge_error("pipe failed");
    }
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, to_child[0], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, from_child[1], STDOUT_FILENO);
    const char* argv[] = {"/bin/sh", "-c", command_.c_str(), nullptr};
    const int rc = posix_spawn(&pid_, "/bin/sh", &actions, nullptr,
                               const_cast<char* const*>(argv), environ);
    posix_spawn_file_actions_destroy(&actions);
    ::close(to_child[0]);
    ::close(from_child[1]);
    if (rc != 0) {
      ::close(to_child[1]);
      ::close(from_child[0]);
      errno = rc;
      bridge_error("cannot spawn \"" + command_ + "\"");
    }
    write_fd_ = to_child[1];
    read_fd_ = from_child[0];
    channel_ = std::make_unique<FdChannel>(read_fd_, write_fd_);
  }

  ~ProcessTransport() override {
    ::close(write_fd_);
    ::close(read_fd_);
    int status = 0;
    // Closing stdin asks the server to exit; give it a moment, then insist.
    for (int i = 0; i < 200; ++i) {
      const pid_t r = ::waitpid(pid_, &status, WNOHANG);
      if (r == pid_ || r < 0) return;
      ::usleep(10'000);
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, &status, 0);
  }

  std::string round_trip(std::string_view request, std::chrono::milliseconds timeout) override {
    return channel_->round_trip(request, timeout);
  }

  std::string describe() const override { return "exec:" + command_; }

 private:
  std::string command_;
  pid_t pid_ = -1;
  int write_fd_ = -1;
  int read_fd_ = -1;
  std::unique_ptr<FdChannel> channel_;
};

class SocketTransport final : public Transport {
 public:
  SocketTransport(int fd, std::string description) : fd_(fd), description_(std::move(description)),
                                                     channel_(fd, fd) {}
  ~SocketTransport() override { ::close(fd_); }

  std::string round_trip(std::string_view request, std::chrono::milliseconds timeout) override {
    return channel_.round_trip(request, timeout);
  }
  std::string describe() const override { return description_; }

 private:
  int fd_;
  std::string description_;
  FdChannel channel_;
};

std::unique_ptr<Transport> connect_unix(const std::string& path) {
  sockaddr_un addr{};
  addr.sun_family = AF_UNIX;
  if (path.size() >= sizeof addr.sun_path) {
    raise(ErrorKind::bridge, "unix socket path too long: " + path);
  }
  std::memcpy(addr.sun_path, path.c_str(), path.size() + 1);
  const int fd = ::socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd < 0) bridge_error("socket failed");
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    const int saved = errno;
    ::close(fd);
    errno = saved;
    bridge_error("cannot connect to unix:" + path);
  }
  return std::make_unique<SocketTransport>(fd, "unix:" + path);
}

std::unique_ptr<Transport> connect_tcp(const std::string& host_port) {
  const auto colon = host_port.rfind(':');
  if (colon == std::string::npos) {
    raise(ErrorKind::bridge, "tcp endpoint needs host:port, got \"" + host_port + "\"");
  }
  const std::string host = host_port.substr(0, colon);
  const std::string port = host_port.substr(colon + 1);
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  if (const int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &found); rc != 0) {
    raise(ErrorKind::bridge, "cannot resolve " + host_port + ": " + gai_strerror(rc));
  }
  int fd = -1;
  for (addrinfo* ai = found; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(found);
  if (fd < 0) bridge_error("cannot connect to tcp:" + host_port);
  return std::make_unique<SocketTransport>(fd, "tcp:" + host_port);
}

}  // namespace

std::unique_ptr<Transport> open_transport(const std::string& endpoint) {
  auto rest = [&](std::size_t n) { return endpoint.substr(n); };
  if (endpoint.starts_with("exec:")) return std::make_unique<ProcessTransport>(rest(5));
  if (endpoint.starts_with("unix:")) return connect_unix(rest(5));
  if (endpoint.starts_with("tcp:")) return connect_tcp(rest(4));
  if (endpoint.starts_with("replay:")) {
    return std::make_unique<ReplayTransport>(read_transcript(rest(7)));
  }
  raise(ErrorKind::usage, "unrecognized bridge endpoint \"" + endpoint +
                               "\" (expected exec:, unix:, tcp: or replay:)");
}

std::vector<TranscriptEntry> read_transcript(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::io, "cannot open transcript " + path.string());
  std::vector<TranscriptEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line.starts_with("> ")) {
      entries.push_back({line.substr(2), {}});
    } else if (line.starts_with("< ") && !entries.empty() && entries.back().response.empty()) {
      entries.back().response = line.substr(2);
    } else {
      raise(ErrorKind::parse,
            path.string() + ":" + std::to_string(line_no) + ": malformed transcript line");
    }
  }
  return entries;
}

void write_transcript(const std::filesystem::path& path,
                      const std::vector<TranscriptEntry>& entries) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorKind::io, "cannot write transcript " + path.string());
  for (const auto& e : entries) out << "> " << e.request << "\n< " << e.response << "\n";
}

ReplayTransport::ReplayTransport(std::vector<TranscriptEntry> entries)
    : entries_(std::move(entries)) {}

std::string ReplayTransport::round_trip(std::string_view request, std::chrono::milliseconds) {
  if (next_ >= entries_.size()) {
    raise(ErrorKind::protocol, "request beyond the end of the transcript: " + std::string(request));
  }
  const TranscriptEntry& e = entries_[next_];
  if (request != e.request) {
    raise(ErrorKind::protocol, "request " + std::to_string(next_) +
                                   " diverges from transcript: expected " + e.request + ", got " +
                                   std::string(request));
  }
  ++next_;
  return e.response;
}

std::string RecordingTransport::round_trip(std::string_view request,
                                           std::chrono::milliseconds timeout) {
  std::string response = inner_->round_trip(request, timeout);
  entries_.push_back({std::string(request), response});
  return response;
}

}  // namespace ncdkit
