#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace timemark {

// Bit sequences are stored one bit per element, first bit at index 0.
// Every element must be 0 or 1.
using BitVec = std::vector<std::uint8_t>;

// Hex form is MSB-first with zero bits prepended up to a nibble boundary,
// e.g. 10 bits -> 3 hex chars (2 pad bits), 63 bits -> 16 hex chars (1 pad bit).
std::string bits_to_hex(const BitVec& bits);

// Inverse of bits_to_hex. The pad bits must be zero and the hex string must
// have exactly ceil(bit_count/4) characters; otherwise throws std::invalid_argument.
BitVec bits_from_hex(const std::string& hex, std::size_t bit_count);

// Packs bits MSB-first into bytes, zero bits prepended up to a byte boundary
// (10 bits -> 2 bytes with 6 leading zeros).
std::vector<std::uint8_t> pack_bits(const BitVec& bits);

}  // namespace timemark
