#pragma once

#include <array>
#include <charconv>
#include <string>

namespace bkt_irt {

/// Shortest decimal representation that round-trips to the same double.
inline std::string format_double(double value) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ec == std::errc() ? ptr : buf.data());
}

}  // namespace bkt_irt
