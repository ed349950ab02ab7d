#include "wsnkms/sha1.hpp"

#include <cstring>

namespace wsnkms {

namespace {
inline uint32_t rotl(uint32_t x, int k) { return (x << k) | (x >> (32 - k)); }
}

void Sha1::reset() {
    h_[0] = 0x67452301u;
    h_[1] = 0xefcdab89u;
    h_[2] = 0x98badcfeu;
    h_[3] = 0x10325476u;
    h_[4] = 0xc3d2e1f0u;
    total_ = 0;
    fill_ = 0;
}

void Sha1::process(const uint8_t block[64]) {
    uint32_t w[80];
    for (int i = 0; i < 16; i++)
        w[i] = uint32_t(block[4 * i]) << 24 | uint32_t(block[4 * i + 1]) << 16 |
               uint32_t(block[4 * i + 2]) << 8 | block[4 * i + 3];
    for (int i = 16; i < 80; i++)
        w[i] = rotl(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);

    uint32_t a = h_[0], b = h_[1], c = h_[2], d = h_[3], e = h_[4];
    for (int i = 0; i < 80; i++) {
        uint32_t f, k;
        if (i < 20) {
            f = (b & c) | (~b & d);
            k = 0x5a827999u;
        } else if (i < 40) {
            f = b ^ c ^ d;
            k = 0x6ed9eba1u;
        } else if (i < 60) {
            f = (b & c) | (b & d) | (c & d);
            k = 0x8f1bbcdcu;
        } else {
            f = b ^ c ^ d;
            k = 0xca62c1d6u;
        }
        uint32_t tmp = rotl(a, 5) + f + e + k + w[i];
        e = d;
        d = c;
        c = rotl(b, 30);
        b = a;
        a = tmp;
    }
    h_[0] += a;
    h_[1] += b;
    h_[2] += c;
    h_[3] += d;
    h_[4] += e;
}

void Sha1::update(const uint8_t* data, size_t len) {
    total_ += len;
    while (len > 0) {
        size_t take = 64 - fill_;
        if (take > len) take = len;
        std::memcpy(buf_ + fill_, data, take);
        fill_ += take;
        data += take;
        len -= take;
        if (fill_ == 64) {
            process(buf_);
            fill_ = 0;
        }
    }
}

std::array<uint8_t, 20> Sha1::finish() {
    uint64_t bits = total_ * 8;
    uint8_t pad = 0x80;
    update(&pad, 1);
    uint8_t zero = 0;
    while (fill_ != 56) update(&zero, 1);
    uint8_t lenbuf[8];
    for (int i = 0; i < 8; i++) lenbuf[i] = uint8_t(bits >> (56 - 8 * i));
    // length block must not bump total_ again, bits were latched above
    std::memcpy(buf_ + 56, lenbuf, 8);
    process(buf_);
    std::array<uint8_t, 20> out;
    for (int i = 0; i < 5; i++)
        for (int j = 0; j < 4; j++) out[4 * i + j] = uint8_t(h_[i] >> (24 - 8 * j));
    reset();
    return out;
}

std::array<uint8_t, 20> Sha1::digest(const uint8_t* data, size_t len) {
    Sha1 s;
    s.update(data, len);
    return s.finish();
}

} // namespace wsnkms
