#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <json.hpp>

#include "timemark/bch.hpp"
#include "timemark/keychain.hpp"
#include "timemark/wm_core.hpp"

namespace timemark {

enum class Step1Status { Recovered, EccFailure };

struct BitEvidence {
    std::vector<int> green_hits;      // per payload bit, Stage-II positions only
    std::vector<int> position_count;  // (L - alpha*n)/n for every bit
};

struct Step1Result {
    Step1Status status = Step1Status::EccFailure;
    BitVec p_hat_raw;                // majority-vote payload before ECC
    std::optional<BitVec> r_hat;     // present when status == Recovered
    int errors_corrected = 0;
    BitEvidence evidence;
};

struct Step2Result {
    double score = 0.0;
    int matched = 0;
    bool pass = false;
};

struct VerificationReport {
    std::uint64_t window = 0;
    Step1Status step1 = Step1Status::EccFailure;
    std::optional<BitVec> recovered_r;
    int errors_corrected = 0;
    double score = 0.0;
    int matched = 0;
    double threshold = 0.65;
    bool pass = false;  // pass iff step1 == Recovered and score >= threshold
};

enum class Verdict { Identified, NoWatermark, Ambiguous };

struct IdentificationResult {
    Verdict verdict = Verdict::NoWatermark;
    std::optional<std::uint64_t> window;          // set when Identified
    std::vector<VerificationReport> reports;      // all per-window scores, for audit
};

const char* to_string(Verdict v);
const char* to_string(Step1Status s);

// Step 1: majority-vote payload recovery over Stage-II positions, then
// BCH decoding. An uncorrectable codeword is a normal outcome under a
// wrong key, reported as EccFailure.
Step1Result decode_step1(const std::vector<std::uint32_t>& tokens, const TimeKey& key,
                         const WatermarkConfig& cfg);
Step1Result decode_step1(const std::vector<std::uint32_t>& tokens,
                         const std::vector<PrefixDigest>& digests, const TimeKey& key,
                         const WatermarkConfig& cfg);

// Step 2: fraction of Stage-I tokens whose green membership agrees with the
// payload bit assigned to the position. r_hat drives the Stage-I seeds and
// p_hat supplies the per-position target bits.
Step2Result verify_step2(const std::vector<std::uint32_t>& tokens,
                         const std::vector<PrefixDigest>& digests, const TimeKey& key,
                         const BitVec& r_hat, const BitVec& p_hat, const WatermarkConfig& cfg);

// Full Step 1 + Step 2 for one candidate window. When Step 1 recovers R,
// Step 2 runs against the re-encoded codeword encode(r_hat); when ECC fails,
// a diagnostic score is still computed from the raw majority-vote payload
// (its systematic info slice standing in for R), but the report never passes.
VerificationReport verify_window(const std::vector<std::uint32_t>& tokens,
                                 const std::vector<PrefixDigest>& digests, const TimeKey& key,
                                 std::uint64_t window_index, const WatermarkConfig& cfg);

// Runs every candidate window and summarizes: exactly one passing window
// identifies the generation time; two or more are surfaced as Ambiguous.
IdentificationResult identify_time(const std::vector<std::uint32_t>& tokens,
                                   const std::vector<std::uint64_t>& candidates,
                                   const std::function<TimeKey(std::uint64_t)>& authority_key,
                                   const WatermarkConfig& cfg);

nlohmann::json to_json(const VerificationReport& report);
nlohmann::json to_json(const IdentificationResult& result);

}  // namespace timemark
