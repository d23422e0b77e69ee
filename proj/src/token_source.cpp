#include "timemark/token_source.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace timemark {

TokenDistribution next_distribution(const SyntheticModel& model, const PrefixDigest& prefix) {
    if (model.vocab_size == 0) throw std::invalid_argument("next_distribution: empty vocabulary");
    if (model.concentration < 0)
        throw std::invalid_argument("next_distribution: concentration must be non-negative");
    const std::uint32_t v = model.vocab_size;
    TokenDistribution dist;
    if (model.concentration == 0.0) {
        dist.probs.assign(v, 1.0 / v);
        return dist;
    }

    Sha256 h;
    std::uint8_t be[8];
    for (int i = 0; i < 8; ++i) be[i] = std::uint8_t(model.model_seed >> (56 - 8 * i));
    h.update(be, 8);
    h.update(prefix.data(), prefix.size());
    HashStream stream(h.finalize());

    std::vector<double> logits(v);
    for (std::uint32_t i = 0; i < v; i += 2) {
        // Box-Muller; u1 in (0,1] so the log is finite.
        const double u1 = double((stream.next_u64() >> 11) + 1) * 0x1.0p-53;
        const double u2 = stream.next_unit();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        logits[i] = model.concentration * radius * std::cos(angle);
        if (i + 1 < v) logits[i + 1] = model.concentration * radius * std::sin(angle);
    }

    double max_logit = logits[0];
    for (double l : logits) max_logit = std::max(max_logit, l);
    double sum = 0.0;
    dist.probs.resize(v);
    for (std::uint32_t i = 0; i < v; ++i) {
        dist.probs[i] = std::exp(logits[i] - max_logit);
        sum += dist.probs[i];
    }
    for (double& p : dist.probs) p /= sum;
    return dist;
}

TokenDistribution next_distribution(const SyntheticModel& model,
                                    std::span<const std::uint32_t> prefix) {
    for (std::uint32_t tok : prefix) {
        if (tok >= model.vocab_size)
            throw std::invalid_argument("next_distribution: token ID out of range");
    }
    return next_distribution(model, prefix_hash(prefix));
}

double green_mass(const TokenDistribution& dist, const GreenMask& mask) {
    if (dist.probs.size() != mask.size()) throw std::invalid_argument("green_mass: shape mismatch");
    double g = 0.0;
    for (std::size_t v = 0; v < mask.size(); ++v) {
        if (mask[v]) g += dist.probs[v];
    }
    return g;
}

std::uint32_t sample_token(const TokenDistribution& dist, double u) {
    if (dist.probs.empty()) throw std::invalid_argument("sample_token: empty distribution");
    double cum = 0.0;
    for (std::size_t v = 0; v < dist.probs.size(); ++v) {
        cum += dist.probs[v];
        if (u < cum) return std::uint32_t(v);
    }
    return std::uint32_t(dist.probs.size() - 1);
}

double estimate_mean_target_match(const SyntheticModel& model, double delta, int samples,
                                  std::uint64_t stream_seed) {
    if (samples <= 0) throw std::invalid_argument("estimate_mean_target_match: samples must be positive");
    HashStream stream(tagged_seed_u64("TimeMark.calibrate.v1", stream_seed));
    const double e_delta = std::exp(delta);
    double acc = 0.0;
    for (int s = 0; s < samples; ++s) {
        // Random 8-token prefix; the model makes everything else vary.
        std::vector<std::uint32_t> prefix(8);
        for (std::uint32_t& tok : prefix) tok = stream.uniform_below(model.vocab_size);
        const TokenDistribution dist = next_distribution(model, std::span<const std::uint32_t>(prefix));
        Digest32 seed_bytes;
        for (auto& b : seed_bytes) b = stream.next_byte();
        const GreenMask mask = greenlist(Seed{seed_bytes}, model.vocab_size);
        const double g = green_mass(dist, mask);
        acc += g * e_delta / (g * e_delta + 1.0 - g);
    }
    return acc / samples;
}

double calibrate_concentration(SyntheticModel model, double delta, double target_match,
                               int samples, std::uint64_t stream_seed) {
    double lo = 0.0, hi = 1.0;
    model.concentration = hi;
    while (estimate_mean_target_match(model, delta, samples, stream_seed) > target_match) {
        lo = hi;
        hi *= 2.0;
        model.concentration = hi;
        if (hi > 1024.0) throw std::runtime_error("calibrate_concentration: target unreachable");
    }
    for (int iter = 0; iter < 40; ++iter) {
        const double mid = 0.5 * (lo + hi);
        model.concentration = mid;
        if (estimate_mean_target_match(model, delta, samples, stream_seed) > target_match)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace timemark
