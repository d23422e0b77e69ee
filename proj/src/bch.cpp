#include "timemark/bch.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

#include "timemark/gf64.hpp"

namespace timemark {

namespace {

// Minimal polynomial of alpha^s over GF(2): product of (x - alpha^e) over
// the cyclotomic coset of s mod 63. All coefficients land in GF(2).
std::vector<std::uint8_t> minimal_poly(int s) {
    std::vector<int> coset;
    int e = s % gf64::kOrder;
    while (std::find(coset.begin(), coset.end(), e) == coset.end()) {
        coset.push_back(e);
        e = (e * 2) % gf64::kOrder;
    }
    std::vector<std::uint8_t> poly{1};  // GF(64) coefficients, low degree first
    for (int exp : coset) {
        const std::uint8_t root = gf64::alpha_pow(exp);
        std::vector<std::uint8_t> next(poly.size() + 1, 0);
        for (std::size_t i = 0; i < poly.size(); ++i) {
            next[i + 1] ^= poly[i];
            next[i] ^= gf64::mul(poly[i], root);
        }
        poly = std::move(next);
    }
    for (std::uint8_t c : poly) {
        if (c > 1) throw std::logic_error("minimal polynomial has non-binary coefficient");
    }
    return poly;
}

std::vector<std::uint8_t> poly_mul_gf2(const std::vector<std::uint8_t>& a,
                                       const std::vector<std::uint8_t>& b) {
    std::vector<std::uint8_t> r(a.size() + b.size() - 1, 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!a[i]) continue;
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] ^= b[j];
    }
    return r;
}

}  // namespace

BchCode::BchCode() {
    std::vector<std::uint8_t> gen{1};
    std::uint64_t covered = 0;  // exponents whose minimal poly is already a factor
    for (int s = 1; s <= 2 * t; ++s) {
        if (covered & (1ull << s)) continue;
        gen = poly_mul_gf2(gen, minimal_poly(s));
        int e = s;
        do {
            if (e <= 2 * t) covered |= 1ull << e;
            e = (e * 2) % gf64::kOrder;
        } while (e != s);
    }
    if (int(gen.size()) - 1 != n - k) throw std::logic_error("unexpected generator degree");
    generator_ = std::move(gen);
}

BitVec BchCode::encode(const BitVec& info) const {
    if (int(info.size()) != k) throw std::invalid_argument("BchCode::encode: info must have 10 bits");
    // c(x) = x^(n-k) m(x) + (x^(n-k) m(x) mod g(x)), with m(x) = sum info[j] x^(k-1-j).
    std::array<std::uint8_t, n> coeff{};  // coeff[d] = coefficient of x^d
    for (int j = 0; j < k; ++j) coeff[(n - k) + (k - 1 - j)] = info[j] ? 1 : 0;

    std::array<std::uint8_t, n> rem = coeff;
    const int gdeg = generator_degree();
    for (int d = n - 1; d >= gdeg; --d) {
        if (!rem[d]) continue;
        for (int j = 0; j <= gdeg; ++j) rem[d - gdeg + j] ^= generator_[j];
    }
    for (int d = 0; d < gdeg; ++d) coeff[d] ^= rem[d];

    BitVec out(n);
    for (int i = 0; i < n; ++i) out[i] = coeff[n - 1 - i];
    return out;
}

DecodeOutcome BchCode::decode(const BitVec& received) const {
    if (int(received.size()) != n)
        throw std::invalid_argument("BchCode::decode: received word must have 63 bits");

    auto syndromes = [&](const BitVec& word, std::array<std::uint8_t, 2 * t>& s) {
        bool all_zero = true;
        for (int j = 1; j <= 2 * t; ++j) {
            std::uint8_t acc = 0;
            for (int i = 0; i < n; ++i) {
                if (word[i]) acc ^= gf64::alpha_pow(j * (n - 1 - i));
            }
            s[j - 1] = acc;
            if (acc) all_zero = false;
        }
        return all_zero;
    };

    std::array<std::uint8_t, 2 * t> synd{};
    DecodeOutcome out;
    if (syndromes(received, synd)) {
        out.status = DecodeOutcome::Status::Corrected;
        out.info.assign(received.begin(), received.begin() + k);
        out.errors_corrected = 0;
        return out;
    }

    // Berlekamp-Massey: find the minimal error locator sigma(x).
    std::vector<std::uint8_t> sigma{1}, prev{1};
    int L = 0, m = 1;
    std::uint8_t b = 1;
    for (int step = 0; step < 2 * t; ++step) {
        std::uint8_t d = synd[step];
        for (int i = 1; i <= L && i < int(sigma.size()); ++i)
            d ^= gf64::mul(sigma[i], synd[step - i]);
        if (d == 0) {
            ++m;
        } else if (2 * L <= step) {
            std::vector<std::uint8_t> tmp = sigma;
            const std::uint8_t scale = gf64::div(d, b);
            if (sigma.size() < prev.size() + m) sigma.resize(prev.size() + m, 0);
            for (std::size_t i = 0; i < prev.size(); ++i)
                sigma[i + m] ^= gf64::mul(scale, prev[i]);
            L = step + 1 - L;
            prev = std::move(tmp);
            b = d;
            m = 1;
        } else {
            const std::uint8_t scale = gf64::div(d, b);
            if (sigma.size() < prev.size() + m) sigma.resize(prev.size() + m, 0);
            for (std::size_t i = 0; i < prev.size(); ++i)
                sigma[i + m] ^= gf64::mul(scale, prev[i]);
            ++m;
        }
    }
    while (!sigma.empty() && sigma.back() == 0) sigma.pop_back();
    const int deg = int(sigma.size()) - 1;
    if (L > t || deg != L) return out;  // more than t errors

    // Chien search: sigma(alpha^-l) == 0 marks an error at polynomial degree l.
    BitVec corrected = received;
    int roots = 0;
    for (int l = 0; l < n; ++l) {
        std::uint8_t acc = 0;
        for (int i = 0; i <= deg; ++i) {
            if (sigma[i]) acc ^= gf64::mul(sigma[i], gf64::alpha_pow(-l * i));
        }
        if (acc == 0) {
            corrected[n - 1 - l] ^= 1;
            ++roots;
        }
    }
    if (roots != L) return out;  // locator does not split: detected failure

    std::array<std::uint8_t, 2 * t> check{};
    if (!syndromes(corrected, check)) return out;

    out.status = DecodeOutcome::Status::Corrected;
    out.info.assign(corrected.begin(), corrected.begin() + k);
    out.errors_corrected = L;
    return out;
}

const BchCode& bch63_10() {
    static const BchCode code;
    return code;
}

}  // namespace timemark
