#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ncdkit/codec/frequency_table.hpp"

namespace ncdkit {

// Adaptive next-symbol model. Implementations must be deterministic: the
// table returned by next_distribution() is a function of the symbols passed
// to update() so far and nothing else.
class ProbabilityModel {
 public:
  virtual ~ProbabilityModel() = default;

  virtual std::size_t alphabet_size() const noexcept = 0;

  // Distribution for the next symbol. The reference stays valid until the
  // next call to update().
  virtual const FrequencyTable& next_distribution() = 0;

  virtual void update(Symbol symbol) = 0;
};

using ModelFactory = std::function<std::unique_ptr<ProbabilityModel>()>;

class UniformModel final : public ProbabilityModel {
 public:
  explicit UniformModel(std::size_t alphabet_size);

  std::size_t alphabet_size() const noexcept override { return table_.size(); }
  const FrequencyTable& next_distribution() override { return table_; }
  void update(Symbol) override {}

 private:
  FrequencyTable table_;
};

// Order-0 counts with add-one smoothing, re-quantized after every update.
class AdaptiveOrder0Model final : public ProbabilityModel {
 public:
  explicit AdaptiveOrder0Model(std::size_t alphabet_size);

  std::size_t alphabet_size() const noexcept override { return counts_.size(); }
  const FrequencyTable& next_distribution() override;
  void update(Symbol symbol) override;

 private:
  std::vector<std::uint64_t> counts_;
  std::vector<std::uint64_t> weights_;
  FrequencyTable table_;
  bool stale_ = true;
};

// Order-k context counts (k <= 3) with add-one smoothing. The prediction uses
// the longest context of length <= k that has been seen at least once,
// falling back to order 0, which always exists.
class AdaptiveContextModel final : public ProbabilityModel {
 public:
  static constexpr std::size_t kMaxOrder = 3;

  AdaptiveContextModel(std::size_t alphabet_size, std::size_t order);

  std::size_t alphabet_size() const noexcept override { return alphabet_; }
  std::size_t order() const noexcept { return order_; }
  const FrequencyTable& next_distribution() override;
  void update(Symbol symbol) override;

  // Context length actually used for the upcoming prediction.
  std::size_t active_order();

 private:
  std::uint64_t context_key(std::size_t length) const;
  const std::vector<std::uint64_t>* lookup(std::size_t length) const;

  std::size_t alphabet_;
  std::size_t order_;
  std::vector<Symbol> history_;
  // contexts_[j] maps a packed length-j context to its symbol counts.
  std::vector<std::unordered_map<std::uint64_t, std::vector<std::uint64_t>>> contexts_;
  std::vector<std::uint64_t> weights_;
  FrequencyTable table_;
  std::size_t active_ = 0;
  bool stale_ = true;
};

// Built-in model names: "uniform", "uniform<N>" (N = alphabet size),
// "order0", "order1" .. "order3". Returns nullopt for unknown names.
std::optional<ModelFactory> builtin_model_factory(std::string_view name,
                                                  std::size_t alphabet_size = 256);

std::vector<std::string> builtin_model_names();

}  // namespace ncdkit
