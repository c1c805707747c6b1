#pragma once

#include <cstdint>
#include <string>

// Word-salad text with a rough English letter mix, reproducible from `seed`.
inline std::string bench_text(std::size_t length, std::uint64_t seed = 1) {
  static const char* words[] = {"the",    "market", "team",  "said",   "new",   "after",
                                "season", "shares", "space", "report", "on",    "a",
                                "game",   "stock",  "first", "year",   "world", "of"};
  std::string out;
  std::uint64_t x = seed;
  while (out.size() < length) {
    x = x * 6364136223846793005ull + 1442695040888963407ull;
    out += words[(x >> 33) % (sizeof words / sizeof *words)];
    out += ' ';
  }
  out.resize(length);
  return out;
}
