#pragma once
// Deterministic random streams. Every stochastic component (placement,
// schedule, channel loss, key generation, attack timing) draws from its own
// stream derived from (root seed, tag) so that reordering events in one
// component never perturbs another. xoshiro256** keeps results identical
// across platforms, unlike the distributions in <random>.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace wsnkms {

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

class Rng {
  public:
    explicit Rng(uint64_t seed) {
        uint64_t sm = seed;
        for (auto& s : s_) s = splitmix64(sm);
    }

    // independent sub-stream identified by a short tag
    Rng(uint64_t seed, std::string_view tag) {
        uint64_t h = 0xcbf29ce484222325ull;
        for (char c : tag) h = (h ^ uint8_t(c)) * 0x100000001b3ull;
        uint64_t sm = seed ^ h;
        for (auto& s : s_) s = splitmix64(sm);
    }

    uint64_t next() {
        auto rotl = [](uint64_t x, int k) { return (x << k) | (x >> (64 - k)); };
        uint64_t result = rotl(s_[1] * 5, 7) * 9;
        uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // unbiased draw from [0, bound)
    uint64_t below(uint64_t bound) {
        if (bound == 0) return 0;
        uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            uint64_t r = next();
            if (r >= threshold) return r % bound;
        }
    }

    // [0, 1) with 53 random bits
    double unit() { return double(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    // inclusive integer range
    uint32_t uniform_int(uint32_t lo, uint32_t hi) {
        return lo + uint32_t(below(uint64_t(hi) - lo + 1));
    }

    bool bernoulli(double p) { return unit() < p; }

    void fill(uint8_t* out, size_t len) {
        size_t i = 0;
        while (i < len) {
            uint64_t r = next();
            for (int b = 0; b < 8 && i < len; b++, i++) out[i] = uint8_t(r >> (8 * b));
        }
    }

  private:
    uint64_t s_[4];
};

} // namespace wsnkms
