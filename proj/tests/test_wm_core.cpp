#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "timemark/wm_core.hpp"

using namespace timemark;

namespace {

TimeKey test_key(char fill) {
    TimeKey k;
    k.bytes.fill(std::uint8_t(fill));
    return k;
}

// Clean-room Fisher-Yates over the same counter-mode byte stream, written
// against the documented expansion rule rather than the library code. Used
// as the second route for the permutation contract.
GreenMask reference_greenlist(const Seed& seed, std::uint32_t vocab) {
    std::vector<std::uint8_t> stream_bytes;
    std::uint32_t counter = 0;
    auto take16 = [&](std::size_t at) {
        while (stream_bytes.size() < at + 2) {
            Sha256 h;
            h.update(seed.bytes.data(), seed.bytes.size());
            const std::uint8_t ctr[4] = {std::uint8_t(counter >> 24), std::uint8_t(counter >> 16),
                                         std::uint8_t(counter >> 8), std::uint8_t(counter)};
            h.update(ctr, 4);
            const Digest32 block = h.finalize();
            stream_bytes.insert(stream_bytes.end(), block.begin(), block.end());
            ++counter;
        }
        return std::uint32_t(stream_bytes[at]) << 8 | stream_bytes[at + 1];
    };

    std::vector<std::uint32_t> perm(vocab);
    std::iota(perm.begin(), perm.end(), 0u);
    std::size_t cursor = 0;
    for (std::uint32_t i = vocab - 1; i >= 1; --i) {
        const std::uint32_t bound = i + 1;
        const std::uint32_t limit = (0x10000u / bound) * bound;
        std::uint32_t v;
        do {
            v = take16(cursor);
            cursor += 2;
        } while (v >= limit);
        std::swap(perm[i], perm[v % bound]);
    }
    GreenMask mask(vocab, 0);
    for (std::uint32_t p = 0; p < vocab / 2; ++p) mask[perm[p]] = 1;
    return mask;
}

}  // namespace

TEST_CASE("config invariants are enforced") {
    WatermarkConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.stage1_length() == 315);
    CHECK(cfg.stage2_reps() == 10);

    WatermarkConfig odd = cfg;
    odd.vocab_size = 1023;
    CHECK_THROWS_AS(odd.validate(), std::invalid_argument);

    WatermarkConfig short_doc = cfg;
    short_doc.min_length = 314;
    CHECK_THROWS_AS(short_doc.validate(), std::invalid_argument);

    WatermarkConfig ragged = cfg;
    ragged.min_length = 946;  // stage II no longer divides across bits
    CHECK_THROWS_AS(ragged.validate(), std::invalid_argument);

    WatermarkConfig low_phi = cfg;
    low_phi.phi = 0.5;
    CHECK_THROWS_AS(low_phi.validate(), std::invalid_argument);

    const WatermarkConfig round = WatermarkConfig::from_json(cfg.to_json());
    CHECK(round.vocab_size == cfg.vocab_size);
    CHECK(round.delta == cfg.delta);
    CHECK(round.min_length == cfg.min_length);
}

TEST_CASE("prefix hash is the SHA-256 of big-endian token words") {
    // values computed ahead of time with an independent SHA-256 implementation
    CHECK(digest_to_hex(prefix_hash({})) ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    const std::vector<std::uint32_t> one_two = {1, 2};
    CHECK(digest_to_hex(prefix_hash(one_two)) ==
          "0f585dd518ed0644f3edfd3f7d5012cc9f445c4c9d24e168e694c4d6f36faea6");
    const std::vector<std::uint32_t> two_one = {2, 1};
    CHECK(digest_to_hex(prefix_hash(two_one)) ==
          "1e9fcd4ca7e6723c4a822c370faad68aa89031573b2376d87e4cc3c6626ede61");
    CHECK(prefix_hash(one_two) == prefix_hash(one_two));
}

TEST_CASE("incremental prefix digests equal from-scratch hashing") {
    const std::vector<std::uint32_t> tokens = {5, 0, 1023, 17, 17, 3};
    const auto digests = prefix_digests(tokens);
    REQUIRE(digests.size() == tokens.size() + 1);
    for (std::size_t i = 0; i <= tokens.size(); ++i) {
        CHECK(digests[i] == prefix_hash(std::span<const std::uint32_t>(tokens.data(), i)));
    }

    PrefixHasher h;
    CHECK(h.digest() == digests[0]);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        h.append(tokens[i]);
        CHECK(h.digest() == digests[i + 1]);
    }
}

TEST_CASE("seed derivation separates stages and reacts to every input") {
    const TimeKey key = test_key(0x11);
    const PrefixDigest prefix = prefix_hash({});
    BitVec r(10, 0);
    r[3] = 1;

    const Seed s1a = derive_seed(key, &r, prefix);
    const Seed s1b = derive_seed(key, &r, prefix);
    CHECK(s1a.bytes == s1b.bytes);

    const Seed s2 = derive_seed(key, nullptr, prefix);
    CHECK(s1a.bytes != s2.bytes);  // stage tags differ

    BitVec r_flip = r;
    r_flip[7] ^= 1;
    CHECK(derive_seed(key, &r_flip, prefix).bytes != s1a.bytes);

    CHECK(derive_seed(test_key(0x12), &r, prefix).bytes != s1a.bytes);

    const std::vector<std::uint32_t> other = {42};
    CHECK(derive_seed(key, &r, prefix_hash(other)).bytes != s1a.bytes);
}

TEST_CASE("greenlist is an exact half-split, deterministic, and matches the reference route") {
    const Seed seed = derive_seed(test_key(0x22), nullptr, prefix_hash({}));
    for (std::uint32_t vocab : {8u, 64u, 1024u}) {
        const GreenMask mask = greenlist(seed, vocab);
        REQUIRE(mask.size() == vocab);
        CHECK(std::accumulate(mask.begin(), mask.end(), 0u) == vocab / 2);
        CHECK(greenlist(seed, vocab) == mask);
        CHECK(reference_greenlist(seed, vocab) == mask);
    }
    CHECK_THROWS_AS(greenlist(seed, 63), std::invalid_argument);
}

TEST_CASE("green membership is uniform across seeds") {
    const std::uint32_t vocab = 64;
    const int trials = 10000;
    std::vector<int> green_count(vocab, 0);
    const TimeKey key = test_key(0x33);
    for (int i = 0; i < trials; ++i) {
        const std::vector<std::uint32_t> prefix = {std::uint32_t(i)};
        const GreenMask mask = greenlist(derive_seed(key, nullptr, prefix_hash(prefix)), vocab);
        for (std::uint32_t v = 0; v < vocab; ++v) green_count[v] += mask[v];
    }
    // 5 sigma band around 0.5 for Binomial(10000, 1/2)
    const double band = 5.0 * 0.5 / std::sqrt(double(trials));
    for (std::uint32_t v = 0; v < vocab; ++v) {
        const double freq = double(green_count[v]) / trials;
        CAPTURE(v);
        CHECK(freq > 0.5 - band);
        CHECK(freq < 0.5 + band);
    }
}

TEST_CASE("allocation is round-robin per stage and balanced") {
    WatermarkConfig cfg;
    CHECK(allocate(1, cfg) == 1);
    CHECK(allocate(64, cfg) == 1);
    CHECK(allocate(63, cfg) == 63);
    CHECK(allocate(315, cfg) == 63);  // last Stage-I position
    CHECK(allocate(316, cfg) == 1);   // first Stage-II position
    CHECK(allocate(945, cfg) == 63);
    CHECK_THROWS_AS(allocate(0, cfg), std::invalid_argument);
    CHECK_THROWS_AS(allocate(946, cfg), std::invalid_argument);

    std::vector<int> stage1_count(cfg.payload_bits, 0), stage2_count(cfg.payload_bits, 0);
    for (int i = 1; i <= cfg.min_length; ++i) {
        auto& counts = i <= cfg.stage1_length() ? stage1_count : stage2_count;
        counts[allocate(i, cfg) - 1] += 1;
    }
    for (int j = 0; j < cfg.payload_bits; ++j) {
        CHECK(stage1_count[j] == cfg.alpha);        // 5 positions per bit
        CHECK(stage2_count[j] == cfg.stage2_reps());  // (945-315)/63 = 10
    }
}

TEST_CASE("apply_bias boosts the target subset and renormalizes") {
    const std::uint32_t vocab = 8;
    GreenMask mask(vocab, 0);
    for (std::uint32_t v = 0; v < vocab / 2; ++v) mask[v] = 1;  // first half green
    std::vector<double> uniform(vocab, 1.0 / vocab);

    SUBCASE("delta = 0 returns the input untouched") {
        CHECK(apply_bias(uniform, mask, 1, 0.0) == uniform);
    }

    SUBCASE("uniform input, bit = 1: green mass becomes e^d/(1+e^d)") {
        const auto out = apply_bias(uniform, mask, 1, 2.5);
        double green = 0.0, total = 0.0;
        for (std::uint32_t v = 0; v < vocab; ++v) {
            total += out[v];
            if (mask[v]) green += out[v];
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(green == doctest::Approx(0.9241418199).epsilon(1e-6));
    }

    SUBCASE("bit = 0 boosts the red side symmetrically") {
        const auto out = apply_bias(uniform, mask, 0, 2.5);
        double red = 0.0;
        for (std::uint32_t v = 0; v < vocab; ++v)
            if (!mask[v]) red += out[v];
        CHECK(red == doctest::Approx(0.9241418199).epsilon(1e-6));
    }

    SUBCASE("skewed input reproduces g e^d / (g e^d + 1 - g)") {
        // green mass 0.35 spread over the green half
        std::vector<double> skew(vocab);
        for (std::uint32_t v = 0; v < vocab; ++v)
            skew[v] = mask[v] ? 0.35 / (vocab / 2) : 0.65 / (vocab / 2);
        const auto out = apply_bias(skew, mask, 1, 2.5);
        double green = 0.0;
        for (std::uint32_t v = 0; v < vocab; ++v)
            if (mask[v]) green += out[v];
        CHECK(green == doctest::Approx(0.8677214).epsilon(1e-4));
    }

    SUBCASE("within-subset ratios are preserved") {
        std::vector<double> dist = {0.30, 0.10, 0.05, 0.05, 0.20, 0.10, 0.15, 0.05};
        const auto out = apply_bias(dist, mask, 1, 1.7);
        CHECK(out[0] / out[1] == doctest::Approx(dist[0] / dist[1]).epsilon(1e-12));
        CHECK(out[4] / out[7] == doctest::Approx(dist[4] / dist[7]).epsilon(1e-12));
        double total = 0.0;
        for (double p : out) total += p;
        CHECK(std::abs(total - 1.0) < 1e-12);
    }

    SUBCASE("invalid inputs are rejected") {
        std::vector<double> bad = uniform;
        bad[0] += 0.5;  // no longer sums to 1
        CHECK_THROWS_AS(apply_bias(bad, mask, 1, 1.0), std::invalid_argument);
        std::vector<double> negative = uniform;
        negative[0] = -negative[0];
        CHECK_THROWS_AS(apply_bias(negative, mask, 1, 1.0), std::invalid_argument);
        CHECK_THROWS_AS(apply_bias(uniform, mask, 2, 1.0), std::invalid_argument);
        CHECK_THROWS_AS(apply_bias(uniform, mask, 1, -0.5), std::invalid_argument);
        std::vector<double> wrong_shape(vocab - 2, 1.0 / (vocab - 2));
        CHECK_THROWS_AS(apply_bias(wrong_shape, mask, 1, 1.0), std::invalid_argument);
    }
}

TEST_CASE("encode/decode symmetry: the same seed always yields the same mask") {
    const TimeKey key = test_key(0x44);
    BitVec r(10, 1);
    for (int i = 0; i < 32; ++i) {
        const std::vector<std::uint32_t> prefix = {std::uint32_t(i), std::uint32_t(i * 3)};
        const PrefixDigest d = prefix_hash(prefix);
        // encoder-side and decoder-side derivations are byte-identical
        const GreenMask enc = greenlist(derive_seed(key, &r, d), 64);
        const GreenMask dec = greenlist(derive_seed(key, &r, prefix_hash(prefix)), 64);
        CHECK(enc == dec);
    }
}
