#include "timemark/decoder.hpp"

#include <algorithm>
#include <stdexcept>

namespace timemark {

namespace {

void check_document(const std::vector<std::uint32_t>& tokens, const WatermarkConfig& cfg) {
    cfg.validate();
    if (int(tokens.size()) != cfg.min_length)
        throw std::invalid_argument("decoder: document length does not match the configured L");
    for (std::uint32_t tok : tokens) {
        if (tok >= cfg.vocab_size)
            throw std::invalid_argument("decoder: token ID out of vocabulary range");
    }
}

}  // namespace

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Identified: return "Identified";
        case Verdict::NoWatermark: return "NoWatermark";
        case Verdict::Ambiguous: return "Ambiguous";
    }
    return "?";
}

const char* to_string(Step1Status s) {
    return s == Step1Status::Recovered ? "Recovered" : "EccFailure";
}

Step1Result decode_step1(const std::vector<std::uint32_t>& tokens, const TimeKey& key,
                         const WatermarkConfig& cfg) {
    return decode_step1(tokens, prefix_digests(tokens), key, cfg);
}

Step1Result decode_step1(const std::vector<std::uint32_t>& tokens,
                         const std::vector<PrefixDigest>& digests, const TimeKey& key,
                         const WatermarkConfig& cfg) {
    check_document(tokens, cfg);
    const int s1 = cfg.stage1_length();
    const int n = cfg.payload_bits;

    Step1Result result;
    result.evidence.green_hits.assign(n, 0);
    result.evidence.position_count.assign(n, 0);
    for (int i = s1 + 1; i <= cfg.min_length; ++i) {
        const Seed seed = derive_seed(key, nullptr, digests[i - 1]);
        const GreenMask mask = greenlist(seed, cfg.vocab_size);
        const int j = allocate(i, cfg) - 1;
        result.evidence.green_hits[j] += mask[tokens[i - 1]] ? 1 : 0;
        result.evidence.position_count[j] += 1;
    }

    // Majority vote: bit is 1 only when strictly more than half of its
    // positions are green; ties fall to 0.
    result.p_hat_raw.assign(n, 0);
    for (int j = 0; j < n; ++j) {
        if (2 * result.evidence.green_hits[j] > result.evidence.position_count[j])
            result.p_hat_raw[j] = 1;
    }

    const DecodeOutcome outcome = bch63_10().decode(result.p_hat_raw);
    if (outcome.status == DecodeOutcome::Status::Corrected) {
        result.status = Step1Status::Recovered;
        result.r_hat = outcome.info;
        result.errors_corrected = outcome.errors_corrected;
    }
    return result;
}

Step2Result verify_step2(const std::vector<std::uint32_t>& tokens,
                         const std::vector<PrefixDigest>& digests, const TimeKey& key,
                         const BitVec& r_hat, const BitVec& p_hat, const WatermarkConfig& cfg) {
    check_document(tokens, cfg);
    if (int(r_hat.size()) != cfg.info_bits || int(p_hat.size()) != cfg.payload_bits)
        throw std::invalid_argument("verify_step2: payload shape mismatch");
    const int s1 = cfg.stage1_length();

    Step2Result result;
    for (int i = 1; i <= s1; ++i) {
        const Seed seed = derive_seed(key, &r_hat, digests[i - 1]);
        const GreenMask mask = greenlist(seed, cfg.vocab_size);
        const int expected = p_hat[allocate(i, cfg) - 1];
        const int in_green = mask[tokens[i - 1]] ? 1 : 0;
        if (in_green == expected) ++result.matched;
    }
    result.score = double(result.matched) / double(s1);
    result.pass = result.score >= cfg.phi;
    return result;
}

VerificationReport verify_window(const std::vector<std::uint32_t>& tokens,
                                 const std::vector<PrefixDigest>& digests, const TimeKey& key,
                                 std::uint64_t window_index, const WatermarkConfig& cfg) {
    VerificationReport report;
    report.window = window_index;
    report.threshold = cfg.phi;

    const Step1Result step1 = decode_step1(tokens, digests, key, cfg);
    report.step1 = step1.status;
    report.errors_corrected = step1.errors_corrected;

    if (step1.status == Step1Status::Recovered) {
        report.recovered_r = *step1.r_hat;
        const BitVec p_hat = bch63_10().encode(*step1.r_hat);
        const Step2Result step2 = verify_step2(tokens, digests, key, *step1.r_hat, p_hat, cfg);
        report.score = step2.score;
        report.matched = step2.matched;
        report.pass = step2.pass;
    } else {
        // Diagnostic score only: the systematic info slice of the raw
        // majority-vote payload stands in for R. ECC failure never passes.
        BitVec r_raw(step1.p_hat_raw.begin(), step1.p_hat_raw.begin() + cfg.info_bits);
        const Step2Result step2 =
            verify_step2(tokens, digests, key, r_raw, step1.p_hat_raw, cfg);
        report.score = step2.score;
        report.matched = step2.matched;
        report.pass = false;
    }
    return report;
}

IdentificationResult identify_time(const std::vector<std::uint32_t>& tokens,
                                   const std::vector<std::uint64_t>& candidates,
                                   const std::function<TimeKey(std::uint64_t)>& authority_key,
                                   const WatermarkConfig& cfg) {
    if (candidates.empty())
        throw std::invalid_argument("identify_time: candidate window set must be non-empty");
    std::vector<std::uint64_t> unique = candidates;
    std::sort(unique.begin(), unique.end());
    if (std::adjacent_find(unique.begin(), unique.end()) != unique.end())
        throw std::invalid_argument("identify_time: candidate windows must be distinct");

    const std::vector<PrefixDigest> digests = prefix_digests(tokens);
    IdentificationResult result;
    for (std::uint64_t t : candidates) {
        result.reports.push_back(verify_window(tokens, digests, authority_key(t), t, cfg));
    }

    std::vector<const VerificationReport*> passing;
    for (const VerificationReport& rep : result.reports) {
        if (rep.pass) passing.push_back(&rep);
    }
    if (passing.size() == 1) {
        result.verdict = Verdict::Identified;
        result.window = passing.front()->window;
    } else if (passing.empty()) {
        result.verdict = Verdict::NoWatermark;
    } else {
        result.verdict = Verdict::Ambiguous;
    }
    return result;
}

nlohmann::json to_json(const VerificationReport& report) {
    nlohmann::json j = {{"window", report.window},
                        {"step1", to_string(report.step1)},
                        {"errors_corrected", report.errors_corrected},
                        {"score", report.score},
                        {"matched", report.matched},
                        {"threshold", report.threshold},
                        {"decision", report.pass ? "Pass" : "Fail"}};
    if (report.recovered_r)
        j["recovered_r_hex"] = bits_to_hex(*report.recovered_r);
    else
        j["recovered_r_hex"] = nullptr;
    return j;
}

nlohmann::json to_json(const IdentificationResult& result) {
    nlohmann::json reports = nlohmann::json::array();
    for (const VerificationReport& rep : result.reports) reports.push_back(to_json(rep));
    nlohmann::json j = {{"verdict", to_string(result.verdict)}, {"reports", reports}};
    if (result.window)
        j["window"] = *result.window;
    else
        j["window"] = nullptr;
    return j;
}

}  // namespace timemark
