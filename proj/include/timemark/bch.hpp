#pragma once

#include <cstdint>
#include <vector>

#include "timemark/bits.hpp"

namespace timemark {

struct DecodeOutcome {
    enum class Status { Corrected, Uncorrectable };
    Status status = Status::Uncorrectable;
    BitVec info;               // valid only when Corrected
    int errors_corrected = 0;  // in [0, t] when Corrected
};

// Binary primitive BCH code [n,k,d_min] = [63,10,27], correcting up to
// t = 13 bit errors. The generator polynomial is the LCM of the minimal
// polynomials of alpha^1..alpha^26 over GF(2^6).
//
// Codeword bit order: bits[i] is the coefficient of x^(62-i), so the
// systematic info bits occupy bits[0..9] and the parity bits follow.
class BchCode {
  public:
    static constexpr int n = 63;
    static constexpr int k = 10;
    static constexpr int t = 13;
    static constexpr int d_min = 27;

    BchCode();

    // Generator polynomial coefficients, lowest degree first (size 54).
    const std::vector<std::uint8_t>& generator() const { return generator_; }
    int generator_degree() const { return int(generator_.size()) - 1; }

    // Systematic encoding: info bits in bits[0..9], parity appended.
    BitVec encode(const BitVec& info) const;

    // Bounded-distance decoding: syndromes, Berlekamp-Massey, Chien search.
    // Returns Uncorrectable when no codeword lies within distance t.
    DecodeOutcome decode(const BitVec& received) const;

  private:
    std::vector<std::uint8_t> generator_;  // GF(2) coefficients, low degree first
};

// Shared immutable instance; a built code is safe to use concurrently.
const BchCode& bch63_10();

}  // namespace timemark
