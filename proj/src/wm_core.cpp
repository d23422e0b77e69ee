#include "timemark/wm_core.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace timemark {

namespace {

constexpr std::uint8_t kStage1Tag = 0x01;
constexpr std::uint8_t kStage2Tag = 0x02;

void append_token_be(std::vector<std::uint8_t>& out, std::uint32_t token) {
    out.push_back(std::uint8_t(token >> 24));
    out.push_back(std::uint8_t(token >> 16));
    out.push_back(std::uint8_t(token >> 8));
    out.push_back(std::uint8_t(token));
}

}  // namespace

void WatermarkConfig::validate() const {
    if (vocab_size == 0 || vocab_size % 2 != 0)
        throw std::invalid_argument("config: vocab_size must be even and positive");
    if (info_bits <= 0 || payload_bits <= 0 || alpha <= 0)
        throw std::invalid_argument("config: info_bits, payload_bits and alpha must be positive");
    if (delta < 0) throw std::invalid_argument("config: delta must be non-negative");
    if (!(phi > 0.5 && phi <= 1.0)) throw std::invalid_argument("config: phi must be in (0.5, 1]");
    if (min_length < stage1_length())
        throw std::invalid_argument("config: min_length must be at least alpha * payload_bits");
    if ((min_length - stage1_length()) % payload_bits != 0)
        throw std::invalid_argument(
            "config: stage-II length must divide evenly across the payload bits");
    if (granularity_seconds == 0)
        throw std::invalid_argument("config: granularity_seconds must be positive");
}

nlohmann::json WatermarkConfig::to_json() const {
    return {{"vocab_size", vocab_size}, {"m", info_bits},      {"n", payload_bits},
            {"alpha", alpha},           {"delta", delta},      {"phi", phi},
            {"min_length", min_length}, {"granularity_seconds", granularity_seconds}};
}

WatermarkConfig WatermarkConfig::from_json(const nlohmann::json& j) {
    WatermarkConfig cfg;
    cfg.vocab_size = j.value("vocab_size", cfg.vocab_size);
    cfg.info_bits = j.value("m", cfg.info_bits);
    cfg.payload_bits = j.value("n", cfg.payload_bits);
    cfg.alpha = j.value("alpha", cfg.alpha);
    cfg.delta = j.value("delta", cfg.delta);
    cfg.phi = j.value("phi", cfg.phi);
    cfg.min_length = j.value("min_length", cfg.min_length);
    cfg.granularity_seconds = j.value("granularity_seconds", cfg.granularity_seconds);
    cfg.validate();
    return cfg;
}

PrefixDigest prefix_hash(std::span<const std::uint32_t> tokens) {
    Sha256 h;
    std::vector<std::uint8_t> buf;
    buf.reserve(tokens.size() * 4);
    for (std::uint32_t tok : tokens) append_token_be(buf, tok);
    h.update(buf.data(), buf.size());
    return h.finalize();
}

std::vector<PrefixDigest> prefix_digests(std::span<const std::uint32_t> tokens) {
    std::vector<PrefixDigest> out;
    out.reserve(tokens.size() + 1);
    PrefixHasher h;
    out.push_back(h.digest());
    for (std::uint32_t tok : tokens) {
        h.append(tok);
        out.push_back(h.digest());
    }
    return out;
}

PrefixHasher::PrefixHasher() = default;

void PrefixHasher::append(std::uint32_t token) {
    std::uint8_t be[4] = {std::uint8_t(token >> 24), std::uint8_t(token >> 16),
                          std::uint8_t(token >> 8), std::uint8_t(token)};
    state_.update(be, 4);
}

PrefixDigest PrefixHasher::digest() const { return state_.finalize(); }

Seed derive_seed(const TimeKey& key, const BitVec* r, const PrefixDigest& prefix) {
    std::vector<std::uint8_t> msg;
    msg.reserve(1 + 2 + prefix.size());
    if (r != nullptr) {
        msg.push_back(kStage1Tag);
        const std::vector<std::uint8_t> packed = pack_bits(*r);
        msg.insert(msg.end(), packed.begin(), packed.end());
    } else {
        msg.push_back(kStage2Tag);
    }
    msg.insert(msg.end(), prefix.begin(), prefix.end());
    return Seed{hmac_sha256(key.bytes, msg)};
}

GreenMask greenlist(const Seed& seed, std::uint32_t vocab_size) {
    if (vocab_size == 0 || vocab_size % 2 != 0)
        throw std::invalid_argument("greenlist: vocab_size must be even and positive");
    std::vector<std::uint32_t> perm(vocab_size);
    std::iota(perm.begin(), perm.end(), 0u);
    HashStream stream(seed.bytes);
    for (std::uint32_t i = vocab_size - 1; i >= 1; --i) {
        const std::uint32_t j = stream.uniform_below(i + 1);
        std::swap(perm[i], perm[j]);
    }
    GreenMask mask(vocab_size, 0);
    for (std::uint32_t p = 0; p < vocab_size / 2; ++p) mask[perm[p]] = 1;
    return mask;
}

int allocate(int position, const WatermarkConfig& cfg) {
    if (position < 1 || position > cfg.min_length)
        throw std::invalid_argument("allocate: position out of range");
    const int s1 = cfg.stage1_length();
    if (position <= s1) return (position - 1) % cfg.payload_bits + 1;
    return (position - s1 - 1) % cfg.payload_bits + 1;
}

std::vector<double> apply_bias(std::span<const double> dist, const GreenMask& mask, int bit,
                               double delta) {
    if (dist.size() != mask.size()) throw std::invalid_argument("apply_bias: shape mismatch");
    if (delta < 0) throw std::invalid_argument("apply_bias: delta must be non-negative");
    if (bit != 0 && bit != 1) throw std::invalid_argument("apply_bias: bit must be 0 or 1");
    double sum = 0.0;
    for (double p : dist) {
        if (p < 0.0) throw std::invalid_argument("apply_bias: negative probability");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6)
        throw std::invalid_argument("apply_bias: distribution must sum to 1");

    std::vector<double> out(dist.begin(), dist.end());
    if (delta == 0.0) return out;

    const double factor = std::exp(delta);
    const std::uint8_t target = bit ? 1 : 0;
    double total = 0.0;
    for (std::size_t v = 0; v < out.size(); ++v) {
        if (mask[v] == target) out[v] *= factor;
        total += out[v];
    }
    for (double& p : out) p /= total;
    return out;
}

}  // namespace timemark
