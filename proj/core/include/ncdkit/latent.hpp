#pragma once

#include <optional>
#include <string_view>
#include <vector>

namespace ncdkit {

enum class Pooling { mean_tokens, final_state };

std::string_view to_string(Pooling pooling) noexcept;
std::optional<Pooling> parse_pooling(std::string_view name) noexcept;

// A model's latent representation of one sequence.
struct LatentVector {
  std::vector<double> values;
  Pooling pooling = Pooling::mean_tokens;

  std::size_t dimension() const noexcept { return values.size(); }
};

}  // namespace ncdkit
