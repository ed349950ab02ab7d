#pragma once
// Bloom filter used to pre-authenticate broadcast payloads, plus the closed
// form false positive and forgery bounds the sizing decisions rest on. Index
// functions come from one keyed hash in counter mode, so a (seed, element)
// pair always maps to the same k positions regardless of filter contents.

#include <cstdint>
#include <string>

#include "wsnkms/bytes.hpp"
#include "wsnkms/crypto.hpp"

namespace wsnkms::bloom {

class Filter {
  public:
    // m = bit vector size, k = index functions per element
    Filter(const crypto::HashFunction& h, uint64_t m, uint32_t k, uint64_t family_seed);

    void insert(const uint8_t* elem, size_t len);
    void insert(const Bytes& elem) { insert(elem.data(), elem.size()); }
    // lazy index derivation with early exit on the first clear bit
    bool query(const uint8_t* elem, size_t len) const;
    bool query(const Bytes& elem) const { return query(elem.data(), elem.size()); }

    uint64_t m() const { return m_; }
    uint32_t k() const { return k_; }
    uint64_t family_seed() const { return seed_; }
    uint64_t inserted() const { return inserted_; }
    uint64_t popcount() const;
    uint64_t size_bits() const { return m_; }

    // 16 byte header (m, k, family_seed, little endian) + bit vector,
    // bit i stored at byte i/8, bit i%8 counting from the LSB
    Bytes serialize() const;
    static Filter deserialize(const crypto::HashFunction& h, const Bytes& blob);
    void save(const std::string& path) const;
    static Filter load(const crypto::HashFunction& h, const std::string& path);

  private:
    class IndexStream;
    const crypto::HashFunction* hash_;
    uint64_t m_;
    uint32_t k_;
    uint64_t seed_;
    uint64_t inserted_ = 0;
    Bytes bits_;
};

// k* = ceil(m ln2 / n), floored at 1. The small epsilon keeps products that
// land exactly on an integer from being pushed one bucket up by rounding
// noise in the double math.
uint32_t optimal_k(uint64_t m, uint64_t n);

// (1 - e^{-kn/m})^k; 0 when nothing was inserted
double false_positive_rate(uint64_t m, uint64_t n, uint32_t k);

// log2 of the false positive bound at the real valued optimal k: -m ln2 / n.
// Differs from false_positive_rate(m, n, optimal_k(m, n)) because k must be
// an integer; both views are exposed on purpose.
double optimal_fp_log2(uint64_t m, uint64_t n);

// Forgery bound for a blind payload guess: 2^{-(li+lk)} * 2^{-ln2 * m/n}.
// Returned as log2 plus a convenience pow2 wrapper (the probability itself
// still fits a double at the default sizes).
double forgery_probability_log2(uint32_t li_bits, uint32_t lk_bits, uint64_t m, uint64_t n);
double forgery_probability(uint32_t li_bits, uint32_t lk_bits, uint64_t m, uint64_t n);

} // namespace wsnkms::bloom
