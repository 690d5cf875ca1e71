#include "market/address.hpp"

#include <algorithm>

#include "market/hash.hpp"

namespace market {
namespace {
constexpr char kHexDigits[] = "0123456789abcdef";
}

std::string Address::hex() const
{
    std::string out(40, '0');
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        out[2 * i] = kHexDigits[bytes[i] >> 4];
        out[2 * i + 1] = kHexDigits[bytes[i] & 0xf];
    }
    return out;
}

std::optional<Address> Address::from_hex(const std::string& hex)
{
    if (hex.size() != 40) {
        return std::nullopt;
    }
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        return -1;
    };
    Address a;
    for (std::size_t i = 0; i < 20; ++i) {
        int hi = nibble(hex[2 * i]);
        int lo = nibble(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) {
            return std::nullopt;
        }
        a.bytes[i] = std::uint8_t(hi << 4 | lo);
    }
    return a;
}

Address Address::from_name(const std::string& name)
{
    ContentHash h = digest("addr:" + name);
    Address a;
    std::copy_n(h.bytes.begin(), a.bytes.size(), a.bytes.begin());
    return a;
}

} // namespace market
