#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace market {

// All balances are integer micro-units: 1 coin = 10^6 units. Integer
// arithmetic keeps the conservation invariant exact.
using Currency = std::int64_t;

inline constexpr Currency kCoin = 1'000'000;

// "1", "0.5", "12.25" -> micro-units. Rejects negatives, malformed text
// and more than six fractional digits.
std::optional<Currency> parse_coins(const std::string& text);

// micro-units -> shortest decimal coin string ("1500000" -> "1.5").
std::string format_coins(Currency amount);

} // namespace market
