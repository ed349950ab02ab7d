#pragma once
// Byte buffers, hex codecs and the MSB-first bit packing used by the wire
// formats. Multi-bit fields are always packed most significant bit first and
// buffers are zero padded up to a whole byte.

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace wsnkms {

using Bytes = std::vector<uint8_t>;

inline std::string to_hex(const uint8_t* data, size_t len) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (size_t i = 0; i < len; i++) {
        out.push_back(digits[data[i] >> 4]);
        out.push_back(digits[data[i] & 0xf]);
    }
    return out;
}

inline std::string to_hex(const Bytes& b) { return to_hex(b.data(), b.size()); }

inline int hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

inline Bytes from_hex(const std::string& hex) {
    if (hex.size() % 2 != 0) throw std::invalid_argument("odd hex length");
    Bytes out(hex.size() / 2);
    for (size_t i = 0; i < out.size(); i++) {
        int hi = hex_nibble(hex[2 * i]), lo = hex_nibble(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) throw std::invalid_argument("bad hex digit");
        out[i] = uint8_t(hi << 4 | lo);
    }
    return out;
}

inline void put_u16be(Bytes& out, uint16_t v) {
    out.push_back(uint8_t(v >> 8));
    out.push_back(uint8_t(v));
}

inline void put_u32be(Bytes& out, uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) out.push_back(uint8_t(v >> s));
}

inline void put_u64be(Bytes& out, uint64_t v) {
    for (int s = 56; s >= 0; s -= 8) out.push_back(uint8_t(v >> s));
}

inline uint16_t get_u16be(const uint8_t* p) { return uint16_t(p[0] << 8 | p[1]); }

inline uint32_t get_u32be(const uint8_t* p) {
    return uint32_t(p[0]) << 24 | uint32_t(p[1]) << 16 | uint32_t(p[2]) << 8 | p[3];
}

class BitWriter {
  public:
    void put(uint64_t value, int bits) {
        for (int i = bits - 1; i >= 0; i--) push_bit((value >> i) & 1);
    }
    void put_bytes(const uint8_t* data, size_t len) {
        for (size_t i = 0; i < len; i++) put(data[i], 8);
    }
    size_t bit_count() const { return nbits_; }
    // zero pads the final byte
    Bytes finish() const { return buf_; }

  private:
    void push_bit(uint64_t b) {
        if (nbits_ % 8 == 0) buf_.push_back(0);
        if (b) buf_.back() |= uint8_t(0x80u >> (nbits_ % 8));
        nbits_++;
    }
    Bytes buf_;
    size_t nbits_ = 0;
};

class BitReader {
  public:
    BitReader(const uint8_t* data, size_t len) : data_(data), len_bits_(len * 8) {}
    uint64_t get(int bits) {
        uint64_t v = 0;
        for (int i = 0; i < bits; i++) v = v << 1 | next_bit();
        return v;
    }
    void get_bytes(uint8_t* out, size_t len) {
        for (size_t i = 0; i < len; i++) out[i] = uint8_t(get(8));
    }
    size_t bits_left() const { return len_bits_ - pos_; }
    // all remaining padding bits must be zero for a well formed message
    bool padding_clear() {
        while (pos_ < len_bits_)
            if (next_bit()) return false;
        return true;
    }

  private:
    uint64_t next_bit() {
        if (pos_ >= len_bits_) throw std::out_of_range("bit read past end");
        uint64_t b = (data_[pos_ / 8] >> (7 - pos_ % 8)) & 1;
        pos_++;
        return b;
    }
    const uint8_t* data_;
    size_t len_bits_;
    size_t pos_ = 0;
};

} // namespace wsnkms
