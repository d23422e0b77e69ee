#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace timemark {

using Digest32 = std::array<std::uint8_t, 32>;

// Incremental SHA-256 (FIPS 180-4). The state is a plain value, so a
// running context can be copied cheaply to snapshot the digest of a
// growing message (used for prefix hashing).
class Sha256 {
  public:
    Sha256();
    void update(std::span<const std::uint8_t> data);
    void update(const void* data, std::size_t len);
    Digest32 finalize() const;  // does not disturb the running state

    static Digest32 digest(std::span<const std::uint8_t> data);
    static Digest32 digest(const void* data, std::size_t len);

  private:
    void compress(const std::uint8_t block[64]);

    std::array<std::uint32_t, 8> state_;
    std::uint64_t total_len_ = 0;
    std::array<std::uint8_t, 64> buf_{};
    std::size_t buf_len_ = 0;
};

Digest32 hmac_sha256(std::span<const std::uint8_t> key, std::span<const std::uint8_t> msg);

std::string digest_to_hex(const Digest32& d);
Digest32 digest_from_hex(const std::string& hex);

// Deterministic byte stream expanded from a 32-byte seed in counter mode:
// block_j = SHA-256(seed || j as 4-byte big-endian).
class HashStream {
  public:
    explicit HashStream(const Digest32& seed);

    std::uint8_t next_byte();
    std::uint16_t next_u16();  // big-endian consumption
    std::uint32_t next_u32();
    std::uint64_t next_u64();

    // One bit, MSB-first out of a dedicated byte buffer. Bit reads consume
    // whole bytes from the stream independently of the word readers.
    int next_bit();

    // Uniform double in [0,1) with 53 random bits.
    double next_unit();

    // Unbiased uniform draw in [0, bound) via rejection sampling; bound >= 1.
    std::uint32_t uniform_below(std::uint32_t bound);

  private:
    void refill();

    Digest32 seed_;
    std::uint32_t counter_ = 0;
    std::array<std::uint8_t, 32> block_{};
    std::size_t pos_ = 32;
    std::uint8_t bit_buf_ = 0;
    int bits_left_ = 0;
};

// Convenience: seed = SHA-256(tag || payload...).
Digest32 tagged_seed(std::string_view tag, std::span<const std::uint8_t> payload);
Digest32 tagged_seed_u64(std::string_view tag, std::uint64_t value);

}  // namespace timemark
