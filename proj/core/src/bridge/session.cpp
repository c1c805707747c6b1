#include "ncdkit/bridge/session.hpp"

#include <charconv>
#include <cmath>

#include <nlohmann/json.hpp>

#include "base64.hpp"
#include "ncdkit/error.hpp"

namespace ncdkit {
namespace {

using nlohmann::json;

json parse_reply(const std::string& line, const char* op) {
  json reply;
  try {
    reply = json::parse(line);
  } catch (const json::exception& e) {
    raise(ErrorKind::protocol, std::string(op) + ": malformed reply: " + e.what());
  }
  if (!reply.is_object()) raise(ErrorKind::protocol, std::string(op) + ": reply is not an object");
  if (!reply.value("ok", false)) {
    const std::string message =
        reply.contains("error") && reply["error"].is_string() ? reply["error"].get<std::string>()
                                                               : "unspecified failure";
    raise(ErrorKind::bridge, std::string("model server rejected ") + op + ": " + message);
  }
  return reply;
}

double parse_real(const json& v, const char* what) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec == std::errc{} && ptr == s.data() + s.size()) return out;
  }
  raise(ErrorKind::protocol, std::string(what) + ": element is not a real number");
}

std::vector<double> reals_from(const json& reply, const char* field, std::size_t expected,
                               const char* what) {
  std::vector<double> values;
  const std::string b64 = std::string(field) + "_b64";
  if (reply.contains(b64)) {
    values = detail::decode_f64_le(reply[b64].get<std::string>());
  } else if (reply.contains(field) && reply[field].is_array()) {
    values.reserve(reply[field].size());
    for (const auto& v : reply[field]) values.push_back(parse_real(v, what));
  } else {
    raise(ErrorKind::protocol, std::string(what) + ": reply lacks \"" + field + "\"");
  }
  if (expected != 0 && values.size() != expected) {
    raise(ErrorKind::protocol, std::string(what) + ": expected " + std::to_string(expected) +
                                   " values, got " + std::to_string(values.size()));
  }
  return values;
}

json ids_json(std::span<const Symbol> ids) { return json(std::vector<Symbol>(ids.begin(), ids.end())); }

}  // namespace

std::string_view to_string(Pooling pooling) noexcept {
  return pooling == Pooling::mean_tokens ? "mean_tokens" : "final_state";
}

std::optional<Pooling> parse_pooling(std::string_view name) noexcept {
  if (name == "mean_tokens" || name == "mean") return Pooling::mean_tokens;
  if (name == "final_state" || name == "final") return Pooling::final_state;
  return std::nullopt;
}

ModelSession ModelSession::open(const std::string& endpoint, SessionOptions options) {
  return ModelSession(open_transport(endpoint), options);
}

ModelSession::ModelSession(std::unique_ptr<Transport> transport, SessionOptions options)
    : transport_(std::move(transport)), options_(options) {
  json hello = {{"op", "hello"}, {"version", kBridgeProtocolVersion}, {"binary", options_.binary}};
  json reply = parse_reply(call(hello.dump()), "hello");
  try {
    info_.version = reply.at("version").get<int>();
    if (info_.version != kBridgeProtocolVersion) {
      raise(ErrorKind::protocol, "model server speaks protocol version " +
                                     std::to_string(info_.version) + ", client speaks " +
                                     std::to_string(kBridgeProtocolVersion));
    }
    info_.model_id = reply.at("model_id").get<std::string>();
    info_.vocab_size = reply.at("vocab_size").get<std::size_t>();
    info_.max_context = reply.at("max_context").get<std::size_t>();
    info_.deterministic = reply.at("deterministic").get<bool>();
    const std::string tokenizer = reply.value("tokenizer", "subword");
    if (tokenizer == "byte") {
      info_.tokenizer = TokenizerKind::byte;
    } else if (tokenizer == "subword") {
      info_.tokenizer = TokenizerKind::subword;
    } else {
      raise(ErrorKind::protocol, "unknown tokenizer kind \"" + tokenizer + "\"");
    }
    info_.hidden_size = reply.value("hidden_size", std::size_t{0});
    for (const auto& p : reply.value("pooling", json::array())) {
      if (auto pooling = parse_pooling(p.get<std::string>())) info_.pooling.push_back(*pooling);
    }
    info_.binary = options_.binary && reply.value("binary", false);
  } catch (const json::exception& e) {
    raise(ErrorKind::protocol, std::string("hello: malformed reply: ") + e.what());
  }
  if (info_.vocab_size == 0) raise(ErrorKind::protocol, "hello: vocab_size must be positive");
  if (info_.max_context < 2) raise(ErrorKind::protocol, "hello: max_context must be at least 2");
  if (info_.tokenizer == TokenizerKind::byte && info_.vocab_size < 256) {
    raise(ErrorKind::protocol, "hello: byte tokenizer needs vocab_size >= 256");
  }
  if (info_.vocab_size > kFrequencyTotal) info_.deterministic = false;
}

std::string ModelSession::call(const std::string& request) {
  ++requests_;
  return transport_->round_trip(request, options_.timeout);
}

std::vector<Symbol> ModelSession::tokenize(std::string_view text) {
  if (text.empty()) return {};
  if (info_.tokenizer == TokenizerKind::byte) {
    std::vector<Symbol> ids(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) ids[i] = static_cast<unsigned char>(text[i]);
    return ids;
  }
  if (!detail::is_valid_utf8(text)) {
    raise(ErrorKind::bridge, "subword tokenizer requires valid UTF-8 text");
  }
  json request = {{"op", "tokenize"}, {"text", std::string(text)}};
  json reply = parse_reply(call(request.dump()), "tokenize");
  std::vector<Symbol> ids;
  try {
    ids = reply.at("ids").get<std::vector<Symbol>>();
  } catch (const json::exception& e) {
    raise(ErrorKind::protocol, std::string("tokenize: malformed reply: ") + e.what());
  }
  for (Symbol id : ids) {
    if (id >= info_.vocab_size) raise(ErrorKind::protocol, "tokenize: id outside vocabulary");
  }
  return ids;
}

std::string ModelSession::detokenize(std::span<const Symbol> ids) {
  if (ids.empty()) return {};
  if (info_.tokenizer == TokenizerKind::byte) {
    std::string text(ids.size(), '\0');
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (ids[i] > 255) raise(ErrorKind::alphabet_violation, "byte token above 255");
      text[i] = static_cast<char>(ids[i]);
    }
    return text;
  }
  json request = {{"op", "detokenize"}, {"ids", ids_json(ids)}};
  json reply = parse_reply(call(request.dump()), "detokenize");
  if (!reply.contains("text") || !reply["text"].is_string()) {
    raise(ErrorKind::protocol, "detokenize: reply lacks text");
  }
  return reply["text"].get<std::string>();
}

std::span<const Symbol> ModelSession::context_window(std::span<const Symbol> prefix) const {
  if (prefix.size() < info_.max_context) return prefix;
  return prefix.last(info_.max_context - 1);
}

FrequencyTable ModelSession::next_distribution(std::span<const Symbol> prefix) {
  json request = {{"op", "predict"}, {"ids", ids_json(context_window(prefix))}};
  json reply = parse_reply(call(request.dump()), "predict");
  return quantize(reals_from(reply, "probs", info_.vocab_size, "predict"));
}

std::vector<FrequencyTable> ModelSession::next_distributions(std::span<const Symbol> ids,
                                                             std::size_t count) {
  if (count == 0) return {};
  if (count > ids.size() + 1) {
    raise(ErrorKind::invalid_argument, "predict_batch count exceeds the number of prefixes");
  }
  if (ids.size() >= info_.max_context) {
    raise(ErrorKind::invalid_argument, "predict_batch ids must fit inside max_context");
  }
  json request = {{"op", "predict_batch"}, {"ids", ids_json(ids)}, {"count", count}};
  json reply = parse_reply(call(request.dump()), "predict_batch");
  std::vector<FrequencyTable> tables;
  tables.reserve(count);
  const char* field = reply.contains("probs_batch_b64") ? "probs_batch_b64" : "probs_batch";
  if (!reply.contains(field) || !reply[field].is_array() || reply[field].size() != count) {
    raise(ErrorKind::protocol, "predict_batch: expected " + std::to_string(count) + " rows");
  }
  for (const auto& row : reply[field]) {
    json wrapped = json::object();
    if (row.is_string()) {
      wrapped["probs_b64"] = row;
    } else {
      wrapped["probs"] = row;
    }
    tables.push_back(quantize(reals_from(wrapped, "probs", info_.vocab_size, "predict_batch")));
  }
  return tables;
}

LatentVector ModelSession::embed(std::string_view text, Pooling pooling) {
  if (text.empty()) raise(ErrorKind::invalid_argument, "cannot embed empty text");
  if (!info_.pooling.empty() &&
      std::find(info_.pooling.begin(), info_.pooling.end(), pooling) == info_.pooling.end()) {
    raise(ErrorKind::bridge, "model " + info_.model_id + " does not support pooling " +
                                 std::string(to_string(pooling)));
  }
  if (!detail::is_valid_utf8(text)) raise(ErrorKind::bridge, "embed requires valid UTF-8 text");
  json request = {{"op", "embed"}, {"text", std::string(text)}, {"pooling", to_string(pooling)}};
  json reply = parse_reply(call(request.dump()), "embed");
  LatentVector out;
  out.pooling = pooling;
  out.values = reals_from(reply, "vector", info_.hidden_size, "embed");
  if (out.values.empty()) raise(ErrorKind::protocol, "embed: empty vector");
  for (double v : out.values) {
    if (!std::isfinite(v)) raise(ErrorKind::protocol, "embed: non-finite component");
  }
  return out;
}

}  // namespace ncdkit
