#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "timemark/bits.hpp"
#include "timemark/keychain.hpp"
#include "timemark/sha256.hpp"

namespace timemark {

struct WatermarkConfig {
    std::uint32_t vocab_size = 1024;
    int info_bits = 10;    // m, length of the random sequence R
    int payload_bits = 63; // n = |P|, length of the expanded payload
    int alpha = 5;         // Stage-I replication per payload bit
    double delta = 2.5;    // logit bias
    double phi = 0.65;     // verification threshold
    int min_length = 945;  // L
    std::uint32_t granularity_seconds = 60;

    int stage1_length() const { return alpha * payload_bits; }
    int stage2_reps() const { return (min_length - stage1_length()) / payload_bits; }

    // Throws std::invalid_argument if any structural invariant is violated:
    // |V| even and positive, L >= alpha*n, (L - alpha*n) divisible by n, phi in (0.5, 1].
    void validate() const;

    nlohmann::json to_json() const;
    static WatermarkConfig from_json(const nlohmann::json& j);
};

struct Seed {
    Digest32 bytes{};
};

using PrefixDigest = Digest32;
using GreenMask = std::vector<std::uint8_t>;  // one flag per token ID, exactly |V|/2 set

// SHA-256 over the token IDs serialized as 4-byte big-endian words.
// The empty prefix hashes to SHA-256 of the empty string.
PrefixDigest prefix_hash(std::span<const std::uint32_t> tokens);

// Per-position digests for an autoregressive pass: result[i] is the digest
// of tokens[0..i), so result has tokens.size() + 1 entries and result[0]
// is the empty-prefix digest. Runs in O(total bytes) via state snapshots.
std::vector<PrefixDigest> prefix_digests(std::span<const std::uint32_t> tokens);

// Incremental equivalent used inside generation loops.
class PrefixHasher {
  public:
    PrefixHasher();
    void append(std::uint32_t token);
    PrefixDigest digest() const;  // digest of everything appended so far

  private:
    Sha256 state_;
};

// PRF seed for one token position: HMAC-SHA-256 keyed with the time key.
// Stage I (r != nullptr) and Stage II (r == nullptr) use distinct domain
// tags, so their seed families never collide.
Seed derive_seed(const TimeKey& key, const BitVec* r, const PrefixDigest& prefix);

// Pseudo-random half-split of the vocabulary: Fisher-Yates permutation
// driven by the counter-mode expansion of the seed, greenlist = first half
// of the permuted vocabulary.
GreenMask greenlist(const Seed& seed, std::uint32_t vocab_size);

// Position-to-bit allocation, round-robin within each stage.
// Position i and the returned bit index are both 1-based.
int allocate(int position, const WatermarkConfig& cfg);

// Multiplies the probabilities of the target subset (green when bit = 1,
// red when bit = 0) by exp(delta) and renormalizes. delta = 0 returns the
// input unchanged.
std::vector<double> apply_bias(std::span<const double> dist, const GreenMask& mask, int bit,
                               double delta);

}  // namespace timemark
