#include "market/hash.hpp"

#include <cstring>

namespace market {
namespace {

// FIPS 180-4 SHA-256.
constexpr std::uint32_t kInit[8] = {
    0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
    0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};

constexpr std::uint32_t kRound[64] = {
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1,
    0x923f82a4, 0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3,
    0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786,
    0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
    0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147,
    0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13,
    0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
    0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
    0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a,
    0x5b9cca4f, 0x682e6ff3, 0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208,
    0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2};

inline std::uint32_t rotr(std::uint32_t x, unsigned n)
{
    return (x >> n) | (x << (32 - n));
}

void compress(std::uint32_t state[8], const std::uint8_t block[64])
{
    std::uint32_t w[64];
    for (int i = 0; i < 16; ++i) {
        w[i] = std::uint32_t(block[4 * i]) << 24 | std::uint32_t(block[4 * i + 1]) << 16 |
               std::uint32_t(block[4 * i + 2]) << 8 | std::uint32_t(block[4 * i + 3]);
    }
    for (int i = 16; i < 64; ++i) {
        std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
        std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
        w[i] = w[i - 16] + s0 + w[i - 7] + s1;
    }
    std::uint32_t a = state[0], b = state[1], c = state[2], d = state[3];
    std::uint32_t e = state[4], f = state[5], g = state[6], h = state[7];
    for (int i = 0; i < 64; ++i) {
        std::uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
        std::uint32_t ch = (e & f) ^ (~e & g);
        std::uint32_t t1 = h + s1 + ch + kRound[i] + w[i];
        std::uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
        std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
        std::uint32_t t2 = s0 + maj;
        h = g;
        g = f;
        f = e;
        e = d + t1;
        d = c;
        c = b;
        b = a;
        a = t1 + t2;
    }
    state[0] += a;
    state[1] += b;
    state[2] += c;
    state[3] += d;
    state[4] += e;
    state[5] += f;
    state[6] += g;
    state[7] += h;
}

constexpr char kHexDigits[] = "0123456789abcdef";

} // namespace

ContentHash digest(std::span<const std::uint8_t> payload)
{
    std::uint32_t state[8];
    std::memcpy(state, kInit, sizeof(state));

    std::size_t n = payload.size();
    std::size_t full = n / 64;
    for (std::size_t i = 0; i < full; ++i) {
        compress(state, payload.data() + 64 * i);
    }

    std::uint8_t tail[128] = {};
    std::size_t rem = n - 64 * full;
    if (rem > 0) {
        std::memcpy(tail, payload.data() + 64 * full, rem);
    }
    tail[rem] = 0x80;
    std::size_t tail_len = (rem < 56) ? 64 : 128;
    std::uint64_t bit_len = std::uint64_t(n) * 8;
    for (int i = 0; i < 8; ++i) {
        tail[tail_len - 1 - i] = std::uint8_t(bit_len >> (8 * i));
    }
    compress(state, tail);
    if (tail_len == 128) {
        compress(state, tail + 64);
    }

    ContentHash out;
    for (int i = 0; i < 8; ++i) {
        out.bytes[4 * i] = std::uint8_t(state[i] >> 24);
        out.bytes[4 * i + 1] = std::uint8_t(state[i] >> 16);
        out.bytes[4 * i + 2] = std::uint8_t(state[i] >> 8);
        out.bytes[4 * i + 3] = std::uint8_t(state[i]);
    }
    return out;
}

ContentHash digest(const std::string& payload)
{
    return digest(std::span(reinterpret_cast<const std::uint8_t*>(payload.data()), payload.size()));
}

std::string ContentHash::hex() const
{
    std::string out(64, '0');
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        out[2 * i] = kHexDigits[bytes[i] >> 4];
        out[2 * i + 1] = kHexDigits[bytes[i] & 0xf];
    }
    return out;
}

std::optional<ContentHash> ContentHash::from_hex(const std::string& hex)
{
    if (hex.size() != 64) {
        return std::nullopt;
    }
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        return -1;
    };
    ContentHash h;
    for (std::size_t i = 0; i < 32; ++i) {
        int hi = nibble(hex[2 * i]);
        int lo = nibble(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) {
            return std::nullopt;
        }
        h.bytes[i] = std::uint8_t(hi << 4 | lo);
    }
    return h;
}

} // namespace market
