#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ncdkit/bridge/session.hpp"
#include "ncdkit/codec/models.hpp"

namespace ncdkit {

// ProbabilityModel whose next-symbol distribution comes from a language
// model behind a ModelSession. When the full token sequence is known in
// advance (compression only), `plan` lets the model prefetch distributions
// with predict_batch; the tables are identical to the one-at-a-time path.
class BridgedModel final : public ProbabilityModel {
 public:
  explicit BridgedModel(ModelSession& session, std::span<const Symbol> plan = {},
                        std::size_t batch_size = 1);

  std::size_t alphabet_size() const noexcept override { return session_.info().vocab_size; }
  const FrequencyTable& next_distribution() override;
  void update(Symbol symbol) override;

 private:
  void prefetch();

  ModelSession& session_;
  std::vector<Symbol> plan_;
  std::size_t batch_size_;
  std::vector<Symbol> history_;
  bool on_plan_ = true;
  std::vector<FrequencyTable> prefetched_;
  std::size_t prefetched_from_ = 0;
  FrequencyTable current_;
  bool stale_ = true;
};

}  // namespace ncdkit
