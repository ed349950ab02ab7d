#pragma once
// Primitives behind the broadcast authentication protocols: reverse hash
// chains, truncated HMAC signatures, deterministic length preserving
// encryption and a discrete log key agreement over a fixed 160 bit safe
// prime. The hash is pluggable so bulk simulations can swap in a cheap
// seeded stand-in without touching protocol code.

#include <array>
#include <cstdint>
#include <vector>

#include "wsnkms/bytes.hpp"
#include "wsnkms/rng.hpp"

namespace wsnkms::crypto {

constexpr size_t kDigestLen = 20; // 160 bit hash output
constexpr size_t kKeyLen = 16;    // 128 bit chain elements and MAC keys
constexpr size_t kTagLen = 16;    // 128 bit MAC tags
constexpr size_t kGroupLen = 20;  // 160 bit group element encoding (big endian)

using Digest = std::array<uint8_t, kDigestLen>;
using SymmetricKey = std::array<uint8_t, kKeyLen>;
using MacTag = std::array<uint8_t, kTagLen>;
using GroupElement = std::array<uint8_t, kGroupLen>;

class HashFunction {
  public:
    virtual ~HashFunction() = default;
    virtual Digest digest(const uint8_t* data, size_t len) const = 0;
    Digest digest(const Bytes& b) const { return digest(b.data(), b.size()); }
};

class Sha1Hash final : public HashFunction {
  public:
    Digest digest(const uint8_t* data, size_t len) const override;
};

// Seeded non-cryptographic 160 bit hash. Deterministic per seed; only for
// simulations and tests where SHA-1 throughput matters.
class FastHash final : public HashFunction {
  public:
    explicit FastHash(uint64_t seed) : seed_(seed) {}
    Digest digest(const uint8_t* data, size_t len) const override;

  private:
    uint64_t seed_;
};

// leftmost 128 bits of a digest
SymmetricKey truncate_key(const Digest& d);

// Reverse hash chain K_n .. K_0 plus the anchor h(K_0) that gets preloaded
// on nodes. elements[i] holds K_i; cycles 1..length consume K_1..K_length.
struct HashChain {
    std::vector<SymmetricKey> elements;
    SymmetricKey anchor{};
    uint32_t length = 0;
    const SymmetricKey& at(uint32_t i) const { return elements.at(i); }
};

// K_n = seed, K_{i-1} = trunc(h(K_i)), anchor = trunc(h(K_0)).
HashChain generate_chain(const HashFunction& h, const SymmetricKey& seed, uint32_t n);

// True when hashing candidate exactly `gap` times reaches trusted. gap >= 1;
// callers bound gap before calling (it is the unit of work an attacker can
// induce).
bool verify_chain_element(const HashFunction& h, const SymmetricKey& candidate,
                          const SymmetricKey& trusted, uint32_t gap);

// truncated HMAC over the configured hash
MacTag mac(const HashFunction& h, const SymmetricKey& key, const uint8_t* msg, size_t len);
MacTag mac(const HashFunction& h, const SymmetricKey& key, const Bytes& msg);

// constant time comparison
bool tag_equal(const MacTag& a, const MacTag& b);

// Deterministic length preserving encryption: a 4 round Feistel network whose
// round function is a counter mode keystream over the hash. Any ciphertext
// manipulation scrambles the whole plaintext, so integrity comes from the
// caller checking decrypted structure (counter fields), not from a tag.
Bytes encrypt(const HashFunction& h, const SymmetricKey& key, const Bytes& plain);
Bytes decrypt(const HashFunction& h, const SymmetricKey& key, const Bytes& cipher);
constexpr size_t kCipherBlock = 16; // energy accounting granularity

// Multiplicative group mod a safe prime p = 2q+1 (160 bits), generator g of
// the order q subgroup. Exponents and elements travel as 20 byte big endian
// strings. Not hardened: exponentiation time may depend on operand values.
class DhGroup {
  public:
    DhGroup(); // built-in group
    DhGroup(const GroupElement& p, const GroupElement& g);

    GroupElement pow_g(const GroupElement& exponent) const;
    GroupElement pow(const GroupElement& base, const GroupElement& exponent) const;
    // rejects 0, 1, p-1 and anything >= p
    bool valid_element(const GroupElement& x) const;
    GroupElement random_exponent(Rng& rng) const; // [2, q-1]
    const GroupElement& prime() const { return p_; }
    const GroupElement& generator() const { return g_; }

  private:
    GroupElement p_{}, g_{}, q_{};
};

struct KeyPair {
    GroupElement priv{};
    GroupElement pub{};
};

KeyPair generate_keypair(const DhGroup& grp, Rng& rng);

// shared secret = peer_pub ^ own_priv; throws std::invalid_argument when the
// peer element is degenerate.
GroupElement key_agree(const DhGroup& grp, const GroupElement& own_priv,
                       const GroupElement& peer_pub);

// K_XY = trunc128(h(shared || cycle_be32)); symmetric in the two parties
// because the shared secret is.
SymmetricKey derive_pairwise(const HashFunction& h, const GroupElement& shared, uint32_t cycle);

// Ack tag: the key is treated as a 128 bit big endian integer, offset is
// added with wraparound, the result hashed and truncated.
MacTag ack_tag(const HashFunction& h, const SymmetricKey& key, uint32_t offset);

} // namespace wsnkms::crypto
