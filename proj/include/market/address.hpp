#pragma once

#include <array>
#include <optional>
#include <string>

namespace market {

// Opaque 20-byte account identifier, rendered as 40-char lowercase hex.
struct Address {
    std::array<std::uint8_t, 20> bytes{};

    auto operator<=>(const Address&) const = default;

    std::string hex() const;
    static std::optional<Address> from_hex(const std::string& hex);

    // Deterministic address from a human-readable name (digest truncation).
    static Address from_name(const std::string& name);
};

} // namespace market
