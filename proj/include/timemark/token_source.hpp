#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "timemark/wm_core.hpp"

namespace timemark {

struct TokenDistribution {
    std::vector<double> probs;
};

// Deterministic stand-in for a language model: logits are standard normal
// variates derived from SHA-256(model_seed || prefix digest), scaled by the
// concentration parameter, then softmaxed. concentration = 0 gives the
// exactly uniform distribution; larger values give peakier distributions.
struct SyntheticModel {
    std::uint64_t model_seed = 0;
    std::uint32_t vocab_size = 1024;
    double concentration = 0.0;  // gamma
};

TokenDistribution next_distribution(const SyntheticModel& model, const PrefixDigest& prefix);
TokenDistribution next_distribution(const SyntheticModel& model,
                                    std::span<const std::uint32_t> prefix);

// Total probability mass of the greenlist members.
double green_mass(const TokenDistribution& dist, const GreenMask& mask);

// Inverse-CDF sampling with an externally supplied uniform draw in [0,1).
std::uint32_t sample_token(const TokenDistribution& dist, double u);

// Monte-Carlo mean of the biased target-subset mass g*e^d/(g*e^d + 1 - g)
// over random prefixes and random greenlists. This is the per-position
// match probability the watermark achieves at the given model peakiness.
double estimate_mean_target_match(const SyntheticModel& model, double delta, int samples,
                                  std::uint64_t stream_seed);

// Bisects the concentration so that the mean match probability above hits
// the target. The result reproduces skewed-green-mass regimes: a target of
// g*e^d/(g*e^d+1-g) corresponds to an equivalent green mass of g.
double calibrate_concentration(SyntheticModel model, double delta, double target_match,
                               int samples, std::uint64_t stream_seed);

}  // namespace timemark
