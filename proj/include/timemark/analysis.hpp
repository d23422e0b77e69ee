#pragma once

#include <cstdint>

#include <json.hpp>

namespace timemark {

struct AnalysisParams {
    double delta = 2.5;
    double green_mass = 0.5;  // target-subset mass before biasing
    int reps_stage2 = 10;     // positions per payload bit in Stage II
    int payload_bits = 63;    // n
    int correctable = 13;     // t
    int verify_count = 315;   // alpha * n
    double phi = 0.65;
};

// A probability carried in both the value domain and the natural-log
// domain; tails down to e^-300 and beyond stay meaningful in the log.
struct ValueLog {
    double value = 0.0;
    double log_value = 0.0;

    static ValueLog from_log(double log_value);
    static ValueLog from_value(double value);
};

struct ProbReport {
    AnalysisParams params;
    ValueLog p_tok;             // per-position target-subset probability after biasing
    ValueLog p_bit;             // per-bit majority-vote success
    ValueLog q_bit;             // per-bit majority-vote failure
    ValueLog p_r;               // payload recovery probability
    ValueLog one_minus_p_r;     // payload recovery failure
    ValueLog false_rejection;   // correct key & R scoring below phi
    ValueLog false_acceptance;  // wrong key or R scoring at/above phi

    nlohmann::json to_json() const;
    std::string to_table() const;
};

// ln Pr(X >= k) and ln Pr(X <= k) for X ~ Binomial(n, p), via log-gamma
// terms aggregated with log-sum-exp. Exact -inf/0 at the boundary cases.
double log_binom_tail_upper(int n, int k, double p);
double log_binom_tail_lower(int n, int k, double p);

// Exact big-rational evaluation of the same tails for small n (the full
// 63-bit payload fits easily). Used as the second route in tests.
double log_binom_tail_upper_exact(int n, int k, double p);
double log_binom_tail_lower_exact(int n, int k, double p);

// g*e^delta / (g*e^delta + 1 - g); the paper's e^delta/(1+e^delta) at g = 0.5.
double token_match_prob(double delta, double green_mass);

// Pr(strictly more than half of reps positions match) with per-position
// probability p_tok.
ValueLog bit_correct_prob(double p_tok, int reps);

struct PayloadRecovery {
    ValueLog p_r;
    ValueLog one_minus_p_r;
};
// Pr(Y <= t) with Y ~ Binomial(n, q_bit), stable on both sides.
PayloadRecovery payload_recovery_prob(double q_bit, int n, int t);

// Pr(X <= ceil(phi*count) - 1) with X ~ Binomial(count, p_match).
ValueLog false_rejection_prob(double p_match, int count, double phi);

// Pr(Y >= ceil(phi*count)) with Y ~ Binomial(count, 1/2).
ValueLog false_acceptance_prob(int count, double phi);

ProbReport analyze(const AnalysisParams& params);

}  // namespace timemark
