#include "timemark/bits.hpp"

#include <stdexcept>

namespace timemark {

static int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw std::invalid_argument("bits_from_hex: invalid hex character");
}

std::string bits_to_hex(const BitVec& bits) {
    static const char* digits = "0123456789abcdef";
    const std::size_t pad = (4 - bits.size() % 4) % 4;
    std::string out;
    out.reserve((bits.size() + pad) / 4);
    int nibble = 0;
    std::size_t filled = 0;
    for (std::size_t slot = 0; slot < pad + bits.size(); ++slot) {
        const int b = slot < pad ? 0 : (bits[slot - pad] ? 1 : 0);
        nibble = (nibble << 1) | b;
        if (++filled == 4) {
            out.push_back(digits[nibble]);
            nibble = 0;
            filled = 0;
        }
    }
    return out;
}

BitVec bits_from_hex(const std::string& hex, std::size_t bit_count) {
    const std::size_t want = (bit_count + 3) / 4;
    if (hex.size() != want)
        throw std::invalid_argument("bits_from_hex: wrong hex length");
    const std::size_t pad = want * 4 - bit_count;
    BitVec bits(bit_count);
    for (std::size_t slot = 0; slot < want * 4; ++slot) {
        const int bit = (hex_value(hex[slot / 4]) >> (3 - slot % 4)) & 1;
        if (slot < pad) {
            if (bit) throw std::invalid_argument("bits_from_hex: nonzero pad bit");
        } else {
            bits[slot - pad] = static_cast<std::uint8_t>(bit);
        }
    }
    return bits;
}

std::vector<std::uint8_t> pack_bits(const BitVec& bits) {
    const std::size_t pad = (8 - bits.size() % 8) % 8;
    std::vector<std::uint8_t> out((bits.size() + pad) / 8, 0);
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i]) {
            const std::size_t slot = pad + i;
            out[slot / 8] |= static_cast<std::uint8_t>(0x80u >> (slot % 8));
        }
    }
    return out;
}

}  // namespace timemark
