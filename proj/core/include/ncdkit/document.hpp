#pragma once

#include <cstdint>
#include <string>

namespace ncdkit {

using ClassId = std::uint32_t;

// A labeled byte sequence; the unit of classification.
struct Document {
  std::string id;
  std::string text;
  ClassId label = 0;
};

}  // namespace ncdkit
