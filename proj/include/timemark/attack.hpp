#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "timemark/bch.hpp"
#include "timemark/encoder.hpp"
#include "timemark/keychain.hpp"
#include "timemark/token_source.hpp"
#include "timemark/wm_core.hpp"

namespace timemark {

// FixedPayloadBaseline is the vulnerable design the random payload replaces:
// a single-stage multi-bit scheme whose payload is a deterministic encoding
// of the window index, reused for every generation in the window, and whose
// greenlists are seeded from the previous token only. TimeMark is the real
// two-stage encoder with a fresh random payload per document.
enum class WatermarkMode { FixedPayloadBaseline, TimeMark };

const char* to_string(WatermarkMode mode);

struct CorpusEntry {
    std::vector<std::uint32_t> tokens;
    std::uint64_t window = 0;
    // Generator-side ground truth of the bit targeted at each position.
    // Experiment instrumentation only; the attacker never reads it.
    BitVec generator_bits;
};

struct AttackCorpus {
    WatermarkMode mode = WatermarkMode::FixedPayloadBaseline;
    std::vector<CorpusEntry> entries;
};

struct TrainingTriplet {
    std::uint32_t context = 0;  // previous token ID, or vocab_size at position 1
    std::uint32_t token = 0;
    std::uint8_t label = 0;
};

struct SurrogateClassifier {
    std::vector<float> weights;  // one per hashed (context, token) bucket
    float bias = 0.0f;

    double score(std::uint32_t context, std::uint32_t token) const;     // log-odds
    double prob_one(std::uint32_t context, std::uint32_t token) const;  // h(1|c,v)
};

std::uint32_t feature_bucket(std::uint32_t context, std::uint32_t token, std::uint32_t buckets);

struct AttackConfig {
    WatermarkConfig wm;         // vocabulary and watermark parameters shared by both modes
    SyntheticModel model;
    int corpus_docs = 150;      // N
    std::uint32_t buckets = 1u << 16;  // F
    int epochs = 6;
    double learning_rate = 0.5;
    double lambda = 4.0;        // attack strength
    std::uint64_t target_window = 3;  // t*
    int forgeries = 30;
    std::uint64_t seed = 1;

    static AttackConfig desk_scale();
};

// The attacker's assumed timestamp-to-payload rule: the low info_bits bits of
// the window index, BCH-expanded. For the baseline this is the true rule.
BitVec window_info_word(std::uint64_t window, int info_bits);
BitVec assumed_payload(std::uint64_t window, const WatermarkConfig& cfg);
// Position-to-bit rule of the single-stage baseline: plain round-robin.
int baseline_allocate(int position, const WatermarkConfig& cfg);

// Baseline scheme primitives.
std::vector<std::uint32_t> baseline_encode(const TimeKey& key, std::uint64_t window,
                                           const AttackConfig& cfg, HashStream& rng);
double baseline_match_score(std::span<const std::uint32_t> tokens, const TimeKey& key,
                            std::uint64_t window, const AttackConfig& cfg);
bool baseline_verify(std::span<const std::uint32_t> tokens, const TimeKey& key,
                     std::uint64_t window, const AttackConfig& cfg);

// Step 1 of the attack: watermarked documents, all drawn from the target window.
AttackCorpus collect_corpus(WatermarkMode mode, int docs, const AttackConfig& cfg,
                            const TimeKey& window_key);

// Step 2: one (context, token, label) triplet per token position, labeled via
// the assumed payload rule. True bits for the baseline; uninformative for TimeMark.
std::vector<TrainingTriplet> build_triplets(const AttackCorpus& corpus, const AttackConfig& cfg);

// Step 3: logistic regression over hashed pair features, plain SGD with a
// deterministic shuffle. Throws if the optimization diverges.
SurrogateClassifier train_surrogate(std::span<const TrainingTriplet> triplets,
                                    const AttackConfig& cfg);

double surrogate_score(const SurrogateClassifier& clf, std::uint32_t context, std::uint32_t token);

// Step 4: autoregressive sampling from the surrogate-reweighted distribution.
std::vector<std::uint32_t> forge_document(const SurrogateClassifier& clf,
                                          std::uint64_t target_window, double lambda,
                                          const AttackConfig& cfg, HashStream& rng);

struct ModeResult {
    WatermarkMode mode = WatermarkMode::FixedPayloadBaseline;
    std::size_t train_size = 0;
    std::size_t heldout_size = 0;
    double raw_accuracy = 0.0;
    double balanced_accuracy = 0.0;
    double sigma_balanced = 0.0;
    double ci_low = 0.0;   // 95% interval around the balanced accuracy
    double ci_high = 0.0;
    int forgeries = 0;
    int forged_passes = 0;
    double forged_pass_rate = 0.0;
    double false_acceptance_floor = 0.0;  // closed-form floor for this mode's verifier
};

struct AttackResult {
    ModeResult baseline;
    ModeResult timemark;

    nlohmann::json to_json() const;
    std::string to_table() const;
};

ModeResult evaluate_mode(WatermarkMode mode, const AttackConfig& cfg);
AttackResult evaluate_attack(const AttackConfig& cfg);

}  // namespace timemark
