#include "wsnkms/crypto.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <cstring>
#include <stdexcept>

#include "wsnkms/sha1.hpp"

namespace wsnkms::crypto {

namespace mp = boost::multiprecision;
// products of 160 bit operands stay inside 512 bits with room to spare
using U512 = mp::number<mp::cpp_int_backend<512, 512, mp::unsigned_magnitude, mp::unchecked, void>>;

Digest Sha1Hash::digest(const uint8_t* data, size_t len) const {
    return Sha1::digest(data, len);
}

Digest FastHash::digest(const uint8_t* data, size_t len) const {
    // multiply-xor absorption into three lanes, splitmix finalization
    uint64_t lanes[3] = {seed_ ^ 0x9e3779b97f4a7c15ull, seed_ ^ 0xc2b2ae3d27d4eb4full,
                         seed_ ^ 0x165667b19e3779f9ull};
    uint64_t word = 0x736f6d6570736575ull ^ (uint64_t(len) << 1);
    size_t i = 0;
    for (; i + 8 <= len; i += 8) {
        std::memcpy(&word, data + i, 8);
        for (int l = 0; l < 3; l++) {
            lanes[l] ^= word * (2 * uint64_t(l) + 0x9ddfea08eb382d69ull);
            lanes[l] = (lanes[l] << 29 | lanes[l] >> 35) * 0xff51afd7ed558ccdull;
        }
    }
    uint64_t tail = uint64_t(len) << 56;
    for (size_t j = 0; i + j < len; j++) tail |= uint64_t(data[i + j]) << (8 * j);
    for (int l = 0; l < 3; l++) {
        lanes[l] ^= tail;
        lanes[l] = (lanes[l] << 31 | lanes[l] >> 33) * 0xc4ceb9fe1a85ec53ull;
    }
    Digest out;
    uint64_t s = lanes[0] ^ lanes[1] ^ lanes[2];
    for (int l = 0; l < 3; l++) {
        uint64_t v = splitmix64(s) ^ lanes[l];
        for (int b = 0; b < 8; b++) {
            size_t pos = size_t(8 * l + b);
            if (pos < kDigestLen) out[pos] = uint8_t(v >> (8 * b));
        }
    }
    return out;
}

SymmetricKey truncate_key(const Digest& d) {
    SymmetricKey k;
    std::memcpy(k.data(), d.data(), kKeyLen);
    return k;
}

HashChain generate_chain(const HashFunction& h, const SymmetricKey& seed, uint32_t n) {
    HashChain chain;
    chain.length = n;
    chain.elements.resize(size_t(n) + 1);
    chain.elements[n] = seed;
    for (uint32_t i = n; i > 0; i--) {
        Digest d = h.digest(chain.elements[i].data(), kKeyLen);
        chain.elements[i - 1] = truncate_key(d);
    }
    chain.anchor = truncate_key(h.digest(chain.elements[0].data(), kKeyLen));
    return chain;
}

bool verify_chain_element(const HashFunction& h, const SymmetricKey& candidate,
                          const SymmetricKey& trusted, uint32_t gap) {
    if (gap == 0) throw std::invalid_argument("chain gap must be >= 1");
    SymmetricKey cur = candidate;
    for (uint32_t i = 0; i < gap; i++) cur = truncate_key(h.digest(cur.data(), kKeyLen));
    return cur == trusted;
}

// ---- MAC (HMAC, tag truncated to 128 bits) ----

MacTag mac(const HashFunction& h, const SymmetricKey& key, const uint8_t* msg, size_t len) {
    constexpr size_t B = 64;
    uint8_t ipad[B], opad[B];
    std::memset(ipad, 0x36, B);
    std::memset(opad, 0x5c, B);
    for (size_t i = 0; i < kKeyLen; i++) {
        ipad[i] ^= key[i];
        opad[i] ^= key[i];
    }
    Bytes inner;
    inner.reserve(B + len);
    inner.insert(inner.end(), ipad, ipad + B);
    inner.insert(inner.end(), msg, msg + len);
    Digest di = h.digest(inner.data(), inner.size());
    Bytes outer;
    outer.reserve(B + kDigestLen);
    outer.insert(outer.end(), opad, opad + B);
    outer.insert(outer.end(), di.begin(), di.end());
    Digest dd = h.digest(outer.data(), outer.size());
    MacTag t;
    std::memcpy(t.data(), dd.data(), kTagLen);
    return t;
}

MacTag mac(const HashFunction& h, const SymmetricKey& key, const Bytes& msg) {
    return mac(h, key, msg.data(), msg.size());
}

bool tag_equal(const MacTag& a, const MacTag& b) {
    uint8_t acc = 0;
    for (size_t i = 0; i < kTagLen; i++) acc |= uint8_t(a[i] ^ b[i]);
    return acc == 0;
}

// ---- length preserving encryption ----

namespace {

// counter mode keystream for one Feistel round: h(key || 0xf5 || round ||
// ctr_be32 || other_half), concatenated until out is full
void round_stream(const HashFunction& h, const SymmetricKey& key, uint8_t round,
                  const uint8_t* other, size_t other_len, uint8_t* out, size_t out_len) {
    Bytes msg;
    msg.reserve(kKeyLen + 6 + other_len);
    msg.insert(msg.end(), key.begin(), key.end());
    msg.push_back(0xf5);
    msg.push_back(round);
    size_t ctr_pos = msg.size();
    put_u32be(msg, 0);
    msg.insert(msg.end(), other, other + other_len);
    size_t done = 0;
    uint32_t ctr = 0;
    while (done < out_len) {
        msg[ctr_pos] = uint8_t(ctr >> 24);
        msg[ctr_pos + 1] = uint8_t(ctr >> 16);
        msg[ctr_pos + 2] = uint8_t(ctr >> 8);
        msg[ctr_pos + 3] = uint8_t(ctr);
        Digest d = h.digest(msg.data(), msg.size());
        size_t take = std::min(kDigestLen, out_len - done);
        for (size_t i = 0; i < take; i++) out[done + i] ^= d[i];
        done += take;
        ctr++;
    }
}

Bytes feistel(const HashFunction& h, const SymmetricKey& key, const Bytes& in, bool forward) {
    if (in.empty()) return in;
    Bytes buf = in;
    size_t ln = (buf.size() + 1) / 2; // left half, right half may be empty
    uint8_t* l = buf.data();
    uint8_t* r = buf.data() + ln;
    size_t rn = buf.size() - ln;
    for (int step = 0; step < 4; step++) {
        int round = forward ? step : 3 - step;
        if (round % 2 == 0)
            round_stream(h, key, uint8_t(round), r, rn, l, ln);
        else
            round_stream(h, key, uint8_t(round), l, ln, r, rn);
    }
    return buf;
}

} // namespace

Bytes encrypt(const HashFunction& h, const SymmetricKey& key, const Bytes& plain) {
    return feistel(h, key, plain, true);
}

Bytes decrypt(const HashFunction& h, const SymmetricKey& key, const Bytes& cipher) {
    return feistel(h, key, cipher, false);
}

// ---- discrete log group ----

namespace {

// 160 bit safe prime p = 2q+1, generator 4 of the order q subgroup
const char* kDefaultP = "0xff31bcbd578dd902fcd5425c45e1588c24f00f9f";

U512 to_int(const GroupElement& e) {
    U512 v = 0;
    for (uint8_t b : e) v = (v << 8) | b;
    return v;
}

GroupElement to_bytes(const U512& v) {
    GroupElement out{};
    U512 x = v;
    for (size_t i = 0; i < kGroupLen; i++) {
        out[kGroupLen - 1 - i] = uint8_t(x & 0xff);
        x >>= 8;
    }
    return out;
}

} // namespace

DhGroup::DhGroup() {
    U512 p(kDefaultP);
    p_ = to_bytes(p);
    g_ = to_bytes(U512(4));
    q_ = to_bytes((p - 1) / 2);
}

DhGroup::DhGroup(const GroupElement& p, const GroupElement& g) : p_(p), g_(g) {
    q_ = to_bytes((to_int(p) - 1) / 2);
}

GroupElement DhGroup::pow(const GroupElement& base, const GroupElement& exponent) const {
    U512 r = mp::powm(to_int(base), to_int(exponent), to_int(p_));
    return to_bytes(r);
}

GroupElement DhGroup::pow_g(const GroupElement& exponent) const { return pow(g_, exponent); }

bool DhGroup::valid_element(const GroupElement& x) const {
    U512 v = to_int(x), p = to_int(p_);
    return v > 1 && v < p - 1;
}

GroupElement DhGroup::random_exponent(Rng& rng) const {
    U512 q = to_int(q_);
    for (;;) {
        GroupElement e{};
        rng.fill(e.data(), e.size());
        U512 v = to_int(e);
        if (v >= 2 && v < q) return e;
    }
}

KeyPair generate_keypair(const DhGroup& grp, Rng& rng) {
    KeyPair kp;
    kp.priv = grp.random_exponent(rng);
    kp.pub = grp.pow_g(kp.priv);
    return kp;
}

GroupElement key_agree(const DhGroup& grp, const GroupElement& own_priv,
                       const GroupElement& peer_pub) {
    if (!grp.valid_element(peer_pub))
        throw std::invalid_argument("degenerate peer group element");
    return grp.pow(peer_pub, own_priv);
}

SymmetricKey derive_pairwise(const HashFunction& h, const GroupElement& shared, uint32_t cycle) {
    Bytes buf;
    buf.reserve(kGroupLen + 4);
    buf.insert(buf.end(), shared.begin(), shared.end());
    put_u32be(buf, cycle);
    return truncate_key(h.digest(buf.data(), buf.size()));
}

MacTag ack_tag(const HashFunction& h, const SymmetricKey& key, uint32_t offset) {
    SymmetricKey k = key;
    uint64_t carry = offset;
    for (int i = int(kKeyLen) - 1; i >= 0 && carry > 0; i--) {
        uint64_t v = k[size_t(i)] + (carry & 0xff);
        k[size_t(i)] = uint8_t(v);
        carry = (carry >> 8) + (v >> 8);
    }
    Digest d = h.digest(k.data(), kKeyLen);
    MacTag t;
    std::memcpy(t.data(), d.data(), kTagLen);
    return t;
}

} // namespace wsnkms::crypto
