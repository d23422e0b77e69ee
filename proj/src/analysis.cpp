#include "timemark/analysis.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <boost/multiprecision/cpp_int.hpp>

namespace timemark {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// ln C(n,k) + k ln p + (n-k) ln(1-p), with exact handling of p in {0,1}.
double log_binom_pmf(int n, int k, double p) {
    if (k < 0 || k > n) return kNegInf;
    if (p <= 0.0) return k == 0 ? 0.0 : kNegInf;
    if (p >= 1.0) return k == n ? 0.0 : kNegInf;
    const double log_choose = std::lgamma(double(n) + 1.0) - std::lgamma(double(k) + 1.0) -
                              std::lgamma(double(n - k) + 1.0);
    return log_choose + k * std::log(p) + (n - k) * std::log1p(-p);
}

// ln(1 - e^x) for x <= 0, stable near both ends.
double log1m_exp(double x) {
    if (x == kNegInf) return 0.0;
    if (x >= 0.0) return kNegInf;
    if (x > -0.6931471805599453)  // ln 2
        return std::log(-std::expm1(x));
    return std::log1p(-std::exp(x));
}

int threshold_count(double phi, int count) {
    double x = phi * double(count);
    const double r = std::nearbyint(x);
    if (std::abs(x - r) < 1e-9) x = r;
    return int(std::ceil(x));
}

using BigInt = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;

BigRat rational_tail(int n, int k_from, int k_to, double p) {
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("rational_tail: p must lie in [0,1]");
    const BigRat rp(p);  // exact binary value of the double
    const BigRat rq = BigRat(1) - rp;
    BigRat total = 0;
    BigInt choose = 1;
    // walk k upward, maintaining C(n,k) incrementally
    BigRat ppow = 1;
    for (int i = 0; i < k_from; ++i) ppow *= rp;
    BigRat qpow = 1;
    for (int i = 0; i < n - k_from; ++i) qpow *= rq;
    for (int k = 1; k <= k_from; ++k) choose = choose * (n - k + 1) / k;
    for (int k = k_from; k <= k_to; ++k) {
        total += BigRat(choose) * ppow * qpow;
        if (k < k_to) {
            choose = choose * (n - k) / (k + 1);
            ppow *= rp;
            if (rq != 0) qpow /= rq;
        }
    }
    return total;
}

double log_of_rational(const BigRat& r) {
    if (r == 0) return kNegInf;
    if (r > BigRat(1, 2) && r <= 1) {
        // near 1 the difference is the informative part; keep it exact
        const BigRat diff = r - 1;
        return std::log1p(diff.convert_to<double>());
    }
    // log(num/den) via mantissa extraction to stay finite for huge operands
    const BigInt num = boost::multiprecision::numerator(r);
    const BigInt den = boost::multiprecision::denominator(r);
    auto log_big = [](const BigInt& v) {
        const std::size_t bits = boost::multiprecision::msb(v) + 1;
        if (bits <= 900) return std::log(v.convert_to<double>());
        const BigInt shifted = v >> (bits - 512);
        return std::log(shifted.convert_to<double>()) + double(bits - 512) * std::log(2.0);
    };
    return log_big(num) - log_big(den);
}

}  // namespace

ValueLog ValueLog::from_log(double log_value) {
    return ValueLog{std::exp(log_value), log_value};
}

ValueLog ValueLog::from_value(double value) {
    return ValueLog{value, value > 0.0 ? std::log(value) : kNegInf};
}

double log_binom_tail_upper(int n, int k, double p) {
    if (n < 0) throw std::invalid_argument("log_binom_tail_upper: n must be non-negative");
    if (k <= 0) return 0.0;
    if (k > n) return kNegInf;
    // Sum the minority side directly: a tail that excludes the mean is a sum
    // of decaying terms, while the majority side would lose all precision to
    // cancellation in the complement.
    if (double(k) >= double(n) * p) {
        double acc = kNegInf;
        for (int i = k; i <= n; ++i) acc = log_sum_exp(acc, log_binom_pmf(n, i, p));
        return std::min(acc, 0.0);
    }
    double lower = kNegInf;
    for (int i = 0; i < k; ++i) lower = log_sum_exp(lower, log_binom_pmf(n, i, p));
    return log1m_exp(std::min(lower, 0.0));
}

double log_binom_tail_lower(int n, int k, double p) {
    if (n < 0) throw std::invalid_argument("log_binom_tail_lower: n must be non-negative");
    if (k < 0) return kNegInf;
    if (k >= n) return 0.0;
    if (double(k) <= double(n) * p) {
        double acc = kNegInf;
        for (int i = 0; i <= k; ++i) acc = log_sum_exp(acc, log_binom_pmf(n, i, p));
        return std::min(acc, 0.0);
    }
    double upper = kNegInf;
    for (int i = k + 1; i <= n; ++i) upper = log_sum_exp(upper, log_binom_pmf(n, i, p));
    return log1m_exp(std::min(upper, 0.0));
}

double log_binom_tail_upper_exact(int n, int k, double p) {
    if (k <= 0) return 0.0;
    if (k > n) return kNegInf;
    return log_of_rational(rational_tail(n, k, n, p));
}

double log_binom_tail_lower_exact(int n, int k, double p) {
    if (k < 0) return kNegInf;
    if (k >= n) return 0.0;
    return log_of_rational(rational_tail(n, 0, k, p));
}

double token_match_prob(double delta, double green_mass) {
    if (delta < 0) throw std::invalid_argument("token_match_prob: delta must be non-negative");
    if (!(green_mass > 0.0 && green_mass < 1.0))
        throw std::invalid_argument("token_match_prob: green mass must lie in (0,1)");
    const double boosted = green_mass * std::exp(delta);
    return boosted / (boosted + 1.0 - green_mass);
}

ValueLog bit_correct_prob(double p_tok, int reps) {
    if (reps < 1) throw std::invalid_argument("bit_correct_prob: reps must be at least 1");
    const int need = reps / 2 + 1;  // strictly more than half
    return ValueLog::from_log(log_binom_tail_upper(reps, need, p_tok));
}

PayloadRecovery payload_recovery_prob(double q_bit, int n, int t) {
    if (!(q_bit >= 0.0 && q_bit <= 1.0))
        throw std::invalid_argument("payload_recovery_prob: q_bit must lie in [0,1]");
    PayloadRecovery out;
    const double log_fail = log_binom_tail_upper(n, t + 1, q_bit);
    out.one_minus_p_r = ValueLog::from_log(log_fail);
    out.p_r = ValueLog::from_log(log1m_exp(log_fail));
    return out;
}

ValueLog false_rejection_prob(double p_match, int count, double phi) {
    const int k = threshold_count(phi, count) - 1;
    return ValueLog::from_log(log_binom_tail_lower(count, k, p_match));
}

ValueLog false_acceptance_prob(int count, double phi) {
    const int k = threshold_count(phi, count);
    return ValueLog::from_log(log_binom_tail_upper(count, k, 0.5));
}

ProbReport analyze(const AnalysisParams& params) {
    ProbReport report;
    report.params = params;
    const double p_tok = token_match_prob(params.delta, params.green_mass);
    report.p_tok = ValueLog::from_value(p_tok);
    report.p_bit = bit_correct_prob(p_tok, params.reps_stage2);
    report.q_bit = ValueLog::from_log(
        log1m_exp(report.p_bit.log_value));
    const PayloadRecovery rec =
        payload_recovery_prob(report.q_bit.value, params.payload_bits, params.correctable);
    report.p_r = rec.p_r;
    report.one_minus_p_r = rec.one_minus_p_r;
    report.false_rejection = false_rejection_prob(p_tok, params.verify_count, params.phi);
    report.false_acceptance = false_acceptance_prob(params.verify_count, params.phi);
    return report;
}

nlohmann::json ProbReport::to_json() const {
    auto vl = [](const ValueLog& v) {
        return nlohmann::json{{"value", v.value}, {"log", v.log_value}};
    };
    return {{"params",
             {{"delta", params.delta},
              {"green_mass", params.green_mass},
              {"reps_stage2", params.reps_stage2},
              {"n", params.payload_bits},
              {"t", params.correctable},
              {"verify_count", params.verify_count},
              {"phi", params.phi}}},
            {"p_tok", vl(p_tok)},
            {"p_bit", vl(p_bit)},
            {"q_bit", vl(q_bit)},
            {"p_R", vl(p_r)},
            {"one_minus_p_R", vl(one_minus_p_r)},
            {"false_rejection", vl(false_rejection)},
            {"false_acceptance", vl(false_acceptance)}};
}

std::string ProbReport::to_table() const {
    std::ostringstream os;
    os.precision(6);
    os << "delta=" << params.delta << " g=" << params.green_mass << " reps=" << params.reps_stage2
       << " n=" << params.payload_bits << " t=" << params.correctable
       << " verify=" << params.verify_count << " phi=" << params.phi << "\n";
    auto row = [&os](const char* name, const ValueLog& v) {
        os << "  " << name << " = " << v.value << "   (ln = " << v.log_value << ")\n";
    };
    row("p_tok           ", p_tok);
    row("p_bit           ", p_bit);
    row("q_bit           ", q_bit);
    row("p_R             ", p_r);
    row("1 - p_R         ", one_minus_p_r);
    row("false rejection ", false_rejection);
    row("false acceptance", false_acceptance);
    return os.str();
}

}  // namespace timemark
