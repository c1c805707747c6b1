#include "ncdkit/codec/models.hpp"

#include <charconv>
#include <string>

#include "ncdkit/error.hpp"

namespace ncdkit {

UniformModel::UniformModel(std::size_t alphabet_size)
    : table_(FrequencyTable::uniform(alphabet_size)) {}

AdaptiveOrder0Model::AdaptiveOrder0Model(std::size_t alphabet_size)
    : counts_(alphabet_size, 0), weights_(alphabet_size, 1) {
  if (alphabet_size == 0 || alphabet_size > kFrequencyTotal) {
    raise(ErrorKind::invalid_argument, "order-0 model alphabet must be in [1, 65536]");
  }
}

const FrequencyTable& AdaptiveOrder0Model::next_distribution() {
  if (stale_) {
    table_ = quantize_weights(weights_);
    stale_ = false;
  }
  return table_;
}

void AdaptiveOrder0Model::update(Symbol symbol) {
  if (symbol >= counts_.size()) {
    raise(ErrorKind::alphabet_violation, "symbol " + std::to_string(symbol) + " outside alphabet");
  }
  ++counts_[symbol];
  weights_[symbol] = counts_[symbol] + 1;
  stale_ = true;
}

AdaptiveContextModel::AdaptiveContextModel(std::size_t alphabet_size, std::size_t order)
    : alphabet_(alphabet_size), order_(order), contexts_(order + 1), weights_(alphabet_size, 1) {
  if (alphabet_size == 0 || alphabet_size > kFrequencyTotal) {
    raise(ErrorKind::invalid_argument, "context model alphabet must be in [1, 65536]");
  }
  if (order > kMaxOrder) {
    raise(ErrorKind::invalid_argument,
          "context order " + std::to_string(order) + " exceeds maximum of 3");
  }
}

std::uint64_t AdaptiveContextModel::context_key(std::size_t length) const {
  std::uint64_t key = 0;
  for (std::size_t i = 0; i < length; ++i) {
    key = key * alphabet_ + history_[history_.size() - 1 - i];
  }
  return key;
}

const std::vector<std::uint64_t>* AdaptiveContextModel::lookup(std::size_t length) const {
  const auto& table = contexts_[length];
  auto it = table.find(context_key(length));
  return it == table.end() ? nullptr : &it->second;
}

std::size_t AdaptiveContextModel::active_order() {
  next_distribution();
  return active_;
}

const FrequencyTable& AdaptiveContextModel::next_distribution() {
  if (!stale_) return table_;
  std::size_t length = std::min(order_, history_.size());
  const std::vector<std::uint64_t>* counts = nullptr;
  for (; length > 0; --length) {
    counts = lookup(length);
    if (counts != nullptr) break;
  }
  if (length == 0) counts = lookup(0);
  active_ = length;
  if (counts == nullptr) {
    std::fill(weights_.begin(), weights_.end(), 1);
  } else {
    for (std::size_t i = 0; i < alphabet_; ++i) weights_[i] = (*counts)[i] + 1;
  }
  table_ = quantize_weights(weights_);
  stale_ = false;
  return table_;
}

void AdaptiveContextModel::update(Symbol symbol) {
  if (symbol >= alphabet_) {
    raise(ErrorKind::alphabet_violation, "symbol " + std::to_string(symbol) + " outside alphabet");
  }
  const std::size_t longest = std::min(order_, history_.size());
  for (std::size_t length = 0; length <= longest; ++length) {
    auto [it, inserted] = contexts_[length].try_emplace(context_key(length));
    if (inserted) it->second.assign(alphabet_, 0);
    ++it->second[symbol];
  }
  history_.push_back(symbol);
  stale_ = true;
}

std::optional<ModelFactory> builtin_model_factory(std::string_view name,
                                                  std::size_t alphabet_size) {
  auto parse_suffix = [](std::string_view digits, std::size_t& out) {
    if (digits.empty()) return false;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), out);
    return ec == std::errc{} && ptr == digits.data() + digits.size();
  };

  if (name.starts_with("uniform")) {
    std::size_t n = alphabet_size;
    const auto digits = name.substr(7);
    if (!digits.empty() && !parse_suffix(digits, n)) return std::nullopt;
    if (n == 0 || n > kFrequencyTotal) return std::nullopt;
    return ModelFactory([n] { return std::make_unique<UniformModel>(n); });
  }
  if (name.starts_with("order")) {
    std::size_t k = 0;
    if (!parse_suffix(name.substr(5), k) || k > AdaptiveContextModel::kMaxOrder) {
      return std::nullopt;
    }
    if (k == 0) {
      return ModelFactory(
          [alphabet_size] { return std::make_unique<AdaptiveOrder0Model>(alphabet_size); });
    }
    return ModelFactory([alphabet_size, k] {
      return std::make_unique<AdaptiveContextModel>(alphabet_size, k);
    });
  }
  return std::nullopt;
}

std::vector<std::string> builtin_model_names() {
  return {"uniform", "order0", "order1", "order2", "order3"};
}

}  // namespace ncdkit
