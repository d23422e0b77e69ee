#include "timemark/sha256.hpp"

#include <bit>
#include <cstring>
#include <stdexcept>

namespace timemark {

namespace {

constexpr std::array<std::uint32_t, 64> kRound = {
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4, 0xab1c5ed5,
    0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174,
    0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
    0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967,
    0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85,
    0xa2bfe8a1, 0xa81a664b, 0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
    0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
    0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2};

constexpr std::array<std::uint32_t, 8> kInit = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
                                                0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};

inline std::uint32_t load_be32(const std::uint8_t* p) {
    return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) | (std::uint32_t(p[2]) << 8) |
           std::uint32_t(p[3]);
}

inline void store_be32(std::uint8_t* p, std::uint32_t v) {
    p[0] = std::uint8_t(v >> 24);
    p[1] = std::uint8_t(v >> 16);
    p[2] = std::uint8_t(v >> 8);
    p[3] = std::uint8_t(v);
}

}  // namespace

Sha256::Sha256() : state_(kInit) {}

void Sha256::compress(const std::uint8_t block[64]) {
    std::uint32_t w[64];
    for (int i = 0; i < 16; ++i) w[i] = load_be32(block + 4 * i);
    for (int i = 16; i < 64; ++i) {
        const std::uint32_t s0 = std::rotr(w[i - 15], 7) ^ std::rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
        const std::uint32_t s1 = std::rotr(w[i - 2], 17) ^ std::rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
        w[i] = w[i - 16] + s0 + w[i - 7] + s1;
    }
    std::uint32_t a = state_[0], b = state_[1], c = state_[2], d = state_[3];
    std::uint32_t e = state_[4], f = state_[5], g = state_[6], h = state_[7];
    for (int i = 0; i < 64; ++i) {
        const std::uint32_t s1 = std::rotr(e, 6) ^ std::rotr(e, 11) ^ std::rotr(e, 25);
        const std::uint32_t ch = (e & f) ^ (~e & g);
        const std::uint32_t t1 = h + s1 + ch + kRound[i] + w[i];
        const std::uint32_t s0 = std::rotr(a, 2) ^ std::rotr(a, 13) ^ std::rotr(a, 22);
        const std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
        const std::uint32_t t2 = s0 + maj;
        h = g; g = f; f = e; e = d + t1;
        d = c; c = b; b = a; a = t1 + t2;
    }
    state_[0] += a; state_[1] += b; state_[2] += c; state_[3] += d;
    state_[4] += e; state_[5] += f; state_[6] += g; state_[7] += h;
}

void Sha256::update(std::span<const std::uint8_t> data) { update(data.data(), data.size()); }

void Sha256::update(const void* data, std::size_t len) {
    const std::uint8_t* p = static_cast<const std::uint8_t*>(data);
    total_len_ += len;
    if (buf_len_ > 0) {
        const std::size_t take = std::min(len, 64 - buf_len_);
        std::memcpy(buf_.data() + buf_len_, p, take);
        buf_len_ += take;
        p += take;
        len -= take;
        if (buf_len_ == 64) {
            compress(buf_.data());
            buf_len_ = 0;
        }
    }
    while (len >= 64) {
        compress(p);
        p += 64;
        len -= 64;
    }
    if (len > 0) {
        std::memcpy(buf_.data(), p, len);
        buf_len_ = len;
    }
}

Digest32 Sha256::finalize() const {
    Sha256 copy = *this;
    const std::uint64_t bit_len = copy.total_len_ * 8;
    const std::uint8_t one = 0x80;
    copy.update(&one, 1);
    const std::uint8_t zero = 0x00;
    while (copy.buf_len_ != 56) copy.update(&zero, 1);
    std::uint8_t len_be[8];
    for (int i = 0; i < 8; ++i) len_be[i] = std::uint8_t(bit_len >> (56 - 8 * i));
    copy.update(len_be, 8);
    Digest32 out;
    for (int i = 0; i < 8; ++i) store_be32(out.data() + 4 * i, copy.state_[i]);
    return out;
}

Digest32 Sha256::digest(std::span<const std::uint8_t> data) {
    Sha256 h;
    h.update(data);
    return h.finalize();
}

Digest32 Sha256::digest(const void* data, std::size_t len) {
    Sha256 h;
    h.update(data, len);
    return h.finalize();
}

Digest32 hmac_sha256(std::span<const std::uint8_t> key, std::span<const std::uint8_t> msg) {
    std::array<std::uint8_t, 64> k{};
    if (key.size() > 64) {
        const Digest32 kd = Sha256::digest(key);
        std::memcpy(k.data(), kd.data(), kd.size());
    } else {
        std::memcpy(k.data(), key.data(), key.size());
    }
    std::array<std::uint8_t, 64> ipad, opad;
    for (int i = 0; i < 64; ++i) {
        ipad[i] = k[i] ^ 0x36;
        opad[i] = k[i] ^ 0x5c;
    }
    Sha256 inner;
    inner.update(ipad.data(), ipad.size());
    inner.update(msg);
    const Digest32 inner_digest = inner.finalize();
    Sha256 outer;
    outer.update(opad.data(), opad.size());
    outer.update(inner_digest.data(), inner_digest.size());
    return outer.finalize();
}

std::string digest_to_hex(const Digest32& d) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(64);
    for (std::uint8_t b : d) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0f]);
    }
    return out;
}

Digest32 digest_from_hex(const std::string& hex) {
    if (hex.size() != 64) throw std::invalid_argument("digest_from_hex: need 64 hex chars");
    auto val = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw std::invalid_argument("digest_from_hex: invalid hex character");
    };
    Digest32 out;
    for (std::size_t i = 0; i < 32; ++i)
        out[i] = std::uint8_t((val(hex[2 * i]) << 4) | val(hex[2 * i + 1]));
    return out;
}

HashStream::HashStream(const Digest32& seed) : seed_(seed) {}

void HashStream::refill() {
    Sha256 h;
    h.update(seed_.data(), seed_.size());
    std::uint8_t ctr[4];
    store_be32(ctr, counter_++);
    h.update(ctr, 4);
    block_ = h.finalize();
    pos_ = 0;
}

std::uint8_t HashStream::next_byte() {
    if (pos_ >= 32) refill();
    return block_[pos_++];
}

std::uint16_t HashStream::next_u16() {
    const std::uint16_t hi = next_byte();
    return std::uint16_t((hi << 8) | next_byte());
}

std::uint32_t HashStream::next_u32() {
    const std::uint32_t hi = next_u16();
    return (hi << 16) | next_u16();
}

std::uint64_t HashStream::next_u64() {
    const std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
}

int HashStream::next_bit() {
    if (bits_left_ == 0) {
        bit_buf_ = next_byte();
        bits_left_ = 8;
    }
    const int bit = (bit_buf_ >> 7) & 1;
    bit_buf_ = std::uint8_t(bit_buf_ << 1);
    --bits_left_;
    return bit;
}

double HashStream::next_unit() {
    return double(next_u64() >> 11) * 0x1.0p-53;
}

std::uint32_t HashStream::uniform_below(std::uint32_t bound) {
    if (bound == 0) throw std::invalid_argument("uniform_below: bound must be positive");
    if (bound == 1) return 0;
    if (bound <= 0x10000u) {
        const std::uint32_t limit = (0x10000u / bound) * bound;
        for (;;) {
            const std::uint32_t v = next_u16();
            if (v < limit) return v % bound;
        }
    }
    const std::uint64_t limit = (0x100000000ull / bound) * bound;
    for (;;) {
        const std::uint64_t v = next_u32();
        if (v < limit) return std::uint32_t(v % bound);
    }
}

Digest32 tagged_seed(std::string_view tag, std::span<const std::uint8_t> payload) {
    Sha256 h;
    h.update(tag.data(), tag.size());
    h.update(payload);
    return h.finalize();
}

Digest32 tagged_seed_u64(std::string_view tag, std::uint64_t value) {
    std::uint8_t be[8];
    for (int i = 0; i < 8; ++i) be[i] = std::uint8_t(value >> (56 - 8 * i));
    return tagged_seed(tag, std::span<const std::uint8_t>(be, 8));
}

}  // namespace timemark
