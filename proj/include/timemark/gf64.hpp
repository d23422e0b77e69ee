#pragma once

#include <array>
#include <cstdint>

// Arithmetic over GF(2^6) with primitive polynomial x^6 + x + 1.
// Elements are 6-bit values; bit i is the coefficient of x^i.
namespace timemark::gf64 {

inline constexpr int kFieldSize = 64;
inline constexpr int kOrder = 63;  // multiplicative order of the primitive element alpha = x
inline constexpr std::uint8_t kPrimitivePoly = 0x43;  // x^6 + x + 1 (reduced modulo term)

namespace detail {

constexpr std::uint8_t mul_slow(std::uint8_t a, std::uint8_t b) {
    std::uint16_t acc = 0;
    std::uint16_t aa = a;
    while (b) {
        if (b & 1) acc ^= aa;
        b = std::uint8_t(b >> 1);
        aa <<= 1;
        if (aa & 0x40) aa ^= kPrimitivePoly;
    }
    return std::uint8_t(acc);
}

struct Tables {
    std::array<std::uint8_t, kOrder> alog{};  // alog[i] = alpha^i
    std::array<std::uint8_t, kFieldSize> log{};
};

constexpr Tables build_tables() {
    Tables t{};
    std::uint8_t x = 1;
    for (int i = 0; i < kOrder; ++i) {
        t.alog[i] = x;
        t.log[x] = std::uint8_t(i);
        x = mul_slow(x, 2);
    }
    return t;
}

inline constexpr Tables kTables = build_tables();

}  // namespace detail

constexpr std::uint8_t add(std::uint8_t a, std::uint8_t b) { return a ^ b; }

constexpr std::uint8_t mul(std::uint8_t a, std::uint8_t b) {
    if (a == 0 || b == 0) return 0;
    const int s = detail::kTables.log[a] + detail::kTables.log[b];
    return detail::kTables.alog[s % kOrder];
}

// alpha^e for any integer exponent (negative allowed).
constexpr std::uint8_t alpha_pow(int e) {
    e %= kOrder;
    if (e < 0) e += kOrder;
    return detail::kTables.alog[e];
}

// Discrete log base alpha; a must be nonzero.
constexpr int log_alpha(std::uint8_t a) { return detail::kTables.log[a]; }

constexpr std::uint8_t inv(std::uint8_t a) {
    // a must be nonzero
    return detail::kTables.alog[(kOrder - detail::kTables.log[a]) % kOrder];
}

constexpr std::uint8_t div(std::uint8_t a, std::uint8_t b) { return mul(a, inv(b)); }

}  // namespace timemark::gf64
