// Stand-in language-model server for bridge tests. Speaks the NDJSON bridge
// protocol over stdio, or over a unix/tcp socket with --unix / --tcp.
//
// The "model" is a deterministic function of the context window: token
// frequencies in the window plus bigram counts following the last token.

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

namespace {

using nlohmann::json;

struct Options {
  bool byte = false;
  bool nondeterministic = false;
  int version = 1;
  std::size_t max_context = 64;
  std::size_t hidden = 8;
  std::size_t vocab_override = 0;
  long fail_after = -1;  // reply with a server error once this many requests were served
  long die_after = -1;   // exit without replying
  int sleep_ms = 0;
  bool garbage = false;  // answer predict with a non-JSON line
  std::string unix_path;
  int tcp_port = -1;
  std::string log_path;
};

// Subword pieces beyond the 256 single bytes.
const std::vector<std::string> kPieces = {
    "the", "ing", "and", " th", "th", "he", "in", "er", "an", " a", " t", "re", "on", "at",
    "en",  "nd",  "es",  "or",  "te", "ed", "is", "it", "al", "ar", "st", "to", "nt", " o",
    " s",  " w",  "e ",  "s ",  "d ", "t ", ", ", ". "};

std::size_t vocab_size(const Options& o) {
  if (o.vocab_override != 0) return o.vocab_override;
  return o.byte ? 256 : 256 + kPieces.size();
}

std::vector<unsigned> tokenize(const std::string& text) {
  std::vector<unsigned> ids;
  std::size_t i = 0;
  while (i < text.size()) {
    unsigned best = static_cast<unsigned char>(text[i]);
    std::size_t best_len = 1;
    for (std::size_t p = 0; p < kPieces.size(); ++p) {
      const auto& piece = kPieces[p];
      if (piece.size() > best_len && text.compare(i, piece.size(), piece) == 0) {
        best = static_cast<unsigned>(256 + p);
        best_len = piece.size();
      }
    }
    ids.push_back(best);
    i += best_len;
  }
  return ids;
}

std::string detokenize(const std::vector<unsigned>& ids) {
  std::string out;
  for (unsigned id : ids) {
    if (id < 256) {
      out.push_back(static_cast<char>(id));
    } else {
      out += kPieces.at(id - 256);
    }
  }
  return out;
}

std::vector<double> distribution(const Options& o, const std::vector<unsigned>& ctx) {
  const std::size_t n = vocab_size(o);
  std::vector<double> w(n, 1.0);
  for (unsigned id : ctx) w[id % n] += 4.0;
  if (!ctx.empty()) {
    const unsigned last = ctx.back();
    for (std::size_t i = 0; i + 1 < ctx.size(); ++i) {
      if (ctx[i] == last) w[ctx[i + 1] % n] += 16.0;
    }
  }
  double total = 0;
  for (double x : w) total += x;
  for (double& x : w) x /= total;
  return w;
}

std::string b64(const std::vector<double>& values) {
  static const char* alphabet =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::vector<unsigned char> bytes;
  for (double v : values) {
    unsigned char raw[8];
    std::memcpy(raw, &v, 8);
    bytes.insert(bytes.end(), raw, raw + 8);
  }
  std::string out;
  for (std::size_t i = 0; i < bytes.size(); i += 3) {
    unsigned v = bytes[i] << 16;
    if (i + 1 < bytes.size()) v |= bytes[i + 1] << 8;
    if (i + 2 < bytes.size()) v |= bytes[i + 2];
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out.push_back(i + 1 < bytes.size() ? alphabet[(v >> 6) & 63] : '=');
    out.push_back(i + 2 < bytes.size() ? alphabet[v & 63] : '=');
  }
  return out;
}

json encode_probs(const std::vector<double>& p, bool binary) {
  if (binary) return b64(p);
  json arr = json::array();
  char buf[32];
  for (double x : p) {
    std::snprintf(buf, sizeof buf, "%.12g", x);
    arr.push_back(buf);
  }
  return arr;
}

std::vector<double> embed(const Options& o, const std::vector<unsigned>& ids, bool final_state) {
  std::vector<double> state(o.hidden, 0.0), sum(o.hidden, 0.0);
  for (unsigned id : ids) {
    for (std::size_t h = 0; h < o.hidden; ++h) {
      state[h] = 0.5 * state[h] + std::sin(0.37 * (id + 1) * (h + 1));
      sum[h] += state[h];
    }
  }
  if (final_state) return state;
  for (double& x : sum) x /= static_cast<double>(ids.size());
  return sum;
}

class Server {
 public:
  explicit Server(Options o) : o_(std::move(o)), jitter_(std::random_device{}()) {}

  // Returns false to drop the connection.
  bool handle(const std::string& line, std::string& reply) {
    ++served_;
    if (o_.die_after >= 0 && served_ > o_.die_after) std::_Exit(3);
    if (o_.sleep_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(o_.sleep_ms));
    json r;
    try {
      r = respond(json::parse(line));
    } catch (const std::exception& e) {
      r = {{"ok", false}, {"error", e.what()}};
    }
    reply = r.is_string() ? r.get<std::string>() : r.dump();
    return true;
  }

 private:
  json respond(const json& req) {
    const std::string op = req.at("op").get<std::string>();
    if (op == "hello") {
      binary_ = req.value("binary", false);
      return {{"ok", true},
              {"version", o_.version},
              {"model_id", o_.byte ? "mock-byte" : "mock-subword"},
              {"vocab_size", vocab_size(o_)},
              {"max_context", o_.max_context},
              {"deterministic", !o_.nondeterministic},
              {"tokenizer", o_.byte ? "byte" : "subword"},
              {"hidden_size", o_.hidden},
              {"pooling", {"mean_tokens", "final_state"}},
              {"binary", binary_}};
    }
    if (o_.fail_after >= 0 && served_ > o_.fail_after) {
      return {{"ok", false}, {"error", "injected failure"}};
    }
    if (op == "tokenize") {
      return {{"ok", true}, {"ids", tokenize(req.at("text").get<std::string>())}};
    }
    if (op == "detokenize") {
      return {{"ok", true}, {"text", detokenize(req.at("ids").get<std::vector<unsigned>>())}};
    }
    if (op == "predict") {
      if (o_.garbage) return json("this is not json");
      auto ids = req.at("ids").get<std::vector<unsigned>>();
      check_ids(ids);
      if (ids.size() >= o_.max_context) throw std::runtime_error("context too long");
      auto p = distribution(o_, ids);
      perturb(p);
      return {{"ok", true}, {binary_ ? "probs_b64" : "probs", encode_probs(p, binary_)}};
    }
    if (op == "predict_batch") {
      auto ids = req.at("ids").get<std::vector<unsigned>>();
      check_ids(ids);
      const std::size_t count = req.at("count").get<std::size_t>();
      if (count > ids.size() + 1) throw std::runtime_error("count exceeds prefixes");
      if (ids.size() >= o_.max_context) throw std::runtime_error("context too long");
      json rows = json::array();
      for (std::size_t len = ids.size() + 1 - count; len <= ids.size(); ++len) {
        auto p = distribution(o_, std::vector<unsigned>(ids.begin(), ids.begin() + len));
        perturb(p);
        rows.push_back(encode_probs(p, binary_));
      }
      return {{"ok", true}, {binary_ ? "probs_batch_b64" : "probs_batch", rows}};
    }
    if (op == "embed") {
      const auto ids = o_.byte ? bytes(req.at("text").get<std::string>())
                               : tokenize(req.at("text").get<std::string>());
      if (ids.empty()) throw std::runtime_error("empty text");
      const std::string pooling = req.at("pooling").get<std::string>();
      if (pooling != "mean_tokens" && pooling != "final_state") {
        throw std::runtime_error("unknown pooling " + pooling);
      }
      auto v = embed(o_, ids, pooling == "final_state");
      return {{"ok", true},
              {binary_ ? "vector_b64" : "vector", binary_ ? json(b64(v)) : json(v)}};
    }
    throw std::runtime_error("unknown op " + op);
  }

  static std::vector<unsigned> bytes(const std::string& s) {
    std::vector<unsigned> out;
    for (unsigned char c : s) out.push_back(c);
    return out;
  }

  void check_ids(const std::vector<unsigned>& ids) const {
    for (unsigned id : ids) {
      if (id >= vocab_size(o_)) throw std::runtime_error("id outside vocabulary");
    }
  }

  void perturb(std::vector<double>& p) {
    if (!o_.nondeterministic) return;
    std::uniform_real_distribution<double> d(0.0, 1e-3);
    for (double& x : p) x += d(jitter_);
  }

  Options o_;
  std::mt19937_64 jitter_;
  long served_ = 0;
  bool binary_ = false;
};

void serve_stream(Server& server, std::istream& in, std::ostream& out, std::ostream* log) {
  std::string line, reply;
  while (std::getline(in, line)) {
    if (log) *log << "> " << line << "\n";
    if (!server.handle(line, reply)) return;
    if (log) *log << "< " << reply << std::endl;
    out << reply << "\n" << std::flush;
  }
}

void serve_fd(const Options& o, int fd) {
  Server server(o);
  std::string buffer, reply;
  char chunk[4096];
  for (;;) {
    const auto n = ::read(fd, chunk, sizeof chunk);
    if (n <= 0) break;
    buffer.append(chunk, static_cast<std::size_t>(n));
    std::size_t nl;
    while ((nl = buffer.find('\n')) != std::string::npos) {
      const std::string line = buffer.substr(0, nl);
      buffer.erase(0, nl + 1);
      server.handle(line, reply);
      reply.push_back('\n');
      std::size_t off = 0;
      while (off < reply.size()) {
        const auto w = ::write(fd, reply.data() + off, reply.size() - off);
        if (w <= 0) {
          ::close(fd);
          return;
        }
        off += static_cast<std::size_t>(w);
      }
    }
  }
  ::close(fd);
}

int listen_socket(const Options& o) {
  int fd = -1;
  if (!o.unix_path.empty()) {
    fd = ::socket(AF_UNIX, SOCK_STREAM, 0);
    sockaddr_un addr{};
    addr.sun_family = AF_UNIX;
    std::strncpy(addr.sun_path, o.unix_path.c_str(), sizeof addr.sun_path - 1);
    ::unlink(o.unix_path.c_str());
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) return -1;
  } else {
    fd = ::socket(AF_INET, SOCK_STREAM, 0);
    int yes = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(static_cast<std::uint16_t>(o.tcp_port));
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) return -1;
    if (o.tcp_port == 0) {
      socklen_t len = sizeof addr;
      ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
    }
    std::cout << "port " << ntohs(addr.sin_port) << std::endl;
  }
  if (::listen(fd, 16) != 0) return -1;
  if (!o.unix_path.empty()) std::cout << "listening " << o.unix_path << std::endl;
  return fd;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    auto value = [&]() -> std::string {
      if (i + 1 >= argc) {
        std::cerr << "missing value for " << a << "\n";
        std::exit(2);
      }
      return argv[++i];
    };
    if (a == "--byte") o.byte = true;
    else if (a == "--nondeterministic") o.nondeterministic = true;
    else if (a == "--version") o.version = std::stoi(value());
    else if (a == "--max-context") o.max_context = std::stoul(value());
    else if (a == "--hidden") o.hidden = std::stoul(value());
    else if (a == "--vocab") o.vocab_override = std::stoul(value());
    else if (a == "--fail-after") o.fail_after = std::stol(value());
    else if (a == "--die-after") o.die_after = std::stol(value());
    else if (a == "--sleep-ms") o.sleep_ms = std::stoi(value());
    else if (a == "--garbage") o.garbage = true;
    else if (a == "--unix") o.unix_path = value();
    else if (a == "--tcp") o.tcp_port = std::stoi(value());
    else if (a == "--log") o.log_path = value();
    else {
      std::cerr << "unknown flag " << a << "\n";
      return 2;
    }
  }

  if (!o.unix_path.empty() || o.tcp_port >= 0) {
    const int fd = listen_socket(o);
    if (fd < 0) {
      std::perror("listen");
      return 1;
    }
    for (;;) {
      const int conn = ::accept(fd, nullptr, nullptr);
      if (conn < 0) continue;
      std::thread([o, conn] { serve_fd(o, conn); }).detach();
    }
  }

  std::ios::sync_with_stdio(false);
  Server server(o);
  std::unique_ptr<std::ostream> log;
  if (!o.log_path.empty()) log = std::make_unique<std::ofstream>(o.log_path);
  serve_stream(server, std::cin, std::cout, log.get());
  return 0;
}
