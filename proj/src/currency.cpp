#include "market/currency.hpp"

namespace market {

std::optional<Currency> parse_coins(const std::string& text)
{
    if (text.empty()) {
        return std::nullopt;
    }
    std::size_t dot = text.find('.');
    std::string whole = dot == std::string::npos ? text : text.substr(0, dot);
    std::string frac = dot == std::string::npos ? "" : text.substr(dot + 1);
    if (whole.empty() || frac.size() > 6 || (dot != std::string::npos && frac.empty())) {
        return std::nullopt;
    }
    for (char c : whole) {
        if (c < '0' || c > '9') {
            return std::nullopt;
        }
    }
    for (char c : frac) {
        if (c < '0' || c > '9') {
            return std::nullopt;
        }
    }
    Currency units = 0;
    for (char c : whole) {
        units = units * 10 + (c - '0');
        if (units > 9'000'000'000'000) {
            return std::nullopt;
        }
    }
    units *= kCoin;
    Currency scale = kCoin / 10;
    for (char c : frac) {
        units += (c - '0') * scale;
        scale /= 10;
    }
    return units;
}

std::string format_coins(Currency amount)
{
    std::string sign = amount < 0 ? "-" : "";
    if (amount < 0) {
        amount = -amount;
    }
    std::string out = sign + std::to_string(amount / kCoin);
    Currency frac = amount % kCoin;
    if (frac != 0) {
        std::string digits = std::to_string(frac);
        digits.insert(digits.begin(), 6 - digits.size(), '0');
        while (digits.back() == '0') {
            digits.pop_back();
        }
        out += "." + digits;
    }
    return out;
}

} // namespace market
