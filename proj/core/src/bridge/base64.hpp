#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ncdkit::detail {

std::string base64_encode(std::span<const unsigned char> data);
// Throws Error(protocol) on malformed input.
std::vector<unsigned char> base64_decode(std::string_view text);

std::string encode_f64_le(std::span<const double> values);
std::vector<double> decode_f64_le(std::string_view base64);

bool is_valid_utf8(std::string_view text) noexcept;

}  // namespace ncdkit::detail
