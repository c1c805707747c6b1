#include "ncdkit/bridge/bridged_model.hpp"

#include <algorithm>

#include "ncdkit/error.hpp"

namespace ncdkit {

BridgedModel::BridgedModel(ModelSession& session, std::span<const Symbol> plan,
                           std::size_t batch_size)
    : session_(session), plan_(plan.begin(), plan.end()), batch_size_(std::max<std::size_t>(1, batch_size)) {}

void BridgedModel::prefetch() {
  const std::size_t t = history_.size();
  const std::size_t max_context = session_.info().max_context;
  // Batches only cover unwindowed prefixes; past max_context every step
  // carries its own window.
  std::size_t count = std::min({batch_size_, plan_.size() - t, max_context - t});
  const std::span<const Symbol> ids(plan_.data(), t + count - 1);
  prefetched_ = session_.next_distributions(ids, count);
  prefetched_from_ = t;
}

const FrequencyTable& BridgedModel::next_distribution() {
  if (!stale_) return current_;
  const std::size_t t = history_.size();
  const bool can_batch = on_plan_ && batch_size_ > 1 && t < plan_.size() &&
                         t < session_.info().max_context;
  if (can_batch) {
    if (t < prefetched_from_ || t >= prefetched_from_ + prefetched_.size()) prefetch();
    current_ = prefetched_[t - prefetched_from_];
  } else {
    current_ = session_.next_distribution(history_);
  }
  if (current_.size() != session_.info().vocab_size) {
    raise(ErrorKind::protocol, "distribution size does not match the vocabulary");
  }
  stale_ = false;
  return current_;
}

void BridgedModel::update(Symbol symbol) {
  if (symbol >= alphabet_size()) {
    raise(ErrorKind::alphabet_violation, "token " + std::to_string(symbol) + " outside vocabulary");
  }
  const std::size_t t = history_.size();
  if (on_plan_ && (t >= plan_.size() || plan_[t] != symbol)) {
    on_plan_ = false;
    prefetched_.clear();
  }
  history_.push_back(symbol);
  stale_ = true;
}

}  // namespace ncdkit
