#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace market {

// 32-byte SHA-256 digest. Canonical rendering is lowercase 64-char hex.
struct ContentHash {
    std::array<std::uint8_t, 32> bytes{};

    auto operator<=>(const ContentHash&) const = default;

    std::string hex() const;
    static std::optional<ContentHash> from_hex(const std::string& hex);
};

// Pure SHA-256 of the payload.
ContentHash digest(std::span<const std::uint8_t> payload);
ContentHash digest(const std::string& payload);

} // namespace market
