#include "wsnkms/bloom.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace wsnkms::bloom {

// Walks the k indexes of an element: each 160 bit hash block yields five
// 32 bit slices, blocks are derived on demand so a query that exits early
// pays for one hash call most of the time.
class Filter::IndexStream {
  public:
    IndexStream(const crypto::HashFunction& h, uint64_t seed, uint64_t m, const uint8_t* elem,
                size_t len)
        : hash_(h), m_(m) {
        msg_.reserve(12 + len);
        put_u64be(msg_, seed);
        ctr_pos_ = msg_.size();
        put_u32be(msg_, 0);
        msg_.insert(msg_.end(), elem, elem + len);
    }

    uint64_t next() {
        if (slot_ == 5) {
            block_index_++;
            slot_ = 0;
        }
        if (slot_ == 0) {
            msg_[ctr_pos_] = uint8_t(block_index_ >> 24);
            msg_[ctr_pos_ + 1] = uint8_t(block_index_ >> 16);
            msg_[ctr_pos_ + 2] = uint8_t(block_index_ >> 8);
            msg_[ctr_pos_ + 3] = uint8_t(block_index_);
            block_ = hash_.digest(msg_.data(), msg_.size());
        }
        uint64_t v = get_u32be(block_.data() + 4 * slot_);
        slot_++;
        return v % m_;
    }

  private:
    const crypto::HashFunction& hash_;
    uint64_t m_;
    Bytes msg_;
    size_t ctr_pos_;
    crypto::Digest block_{};
    uint32_t block_index_ = 0;
    int slot_ = 0;
};

Filter::Filter(const crypto::HashFunction& h, uint64_t m, uint32_t k, uint64_t family_seed)
    : hash_(&h), m_(m), k_(k), seed_(family_seed) {
    if (m == 0 || k == 0) throw std::invalid_argument("bloom filter needs m >= 1 and k >= 1");
    bits_.assign((m + 7) / 8, 0);
}

void Filter::insert(const uint8_t* elem, size_t len) {
    IndexStream ix(*hash_, seed_, m_, elem, len);
    for (uint32_t j = 0; j < k_; j++) {
        uint64_t b = ix.next();
        bits_[b / 8] |= uint8_t(1u << (b % 8));
    }
    inserted_++;
}

bool Filter::query(const uint8_t* elem, size_t len) const {
    IndexStream ix(*hash_, seed_, m_, elem, len);
    for (uint32_t j = 0; j < k_; j++) {
        uint64_t b = ix.next();
        if (!(bits_[b / 8] & (1u << (b % 8)))) return false;
    }
    return true;
}

uint64_t Filter::popcount() const {
    uint64_t n = 0;
    for (uint8_t b : bits_) n += uint64_t(std::popcount(b));
    return n;
}

Bytes Filter::serialize() const {
    Bytes out;
    out.reserve(16 + bits_.size());
    for (int i = 0; i < 4; i++) out.push_back(uint8_t(m_ >> (8 * i)));
    for (int i = 0; i < 4; i++) out.push_back(uint8_t(k_ >> (8 * i)));
    for (int i = 0; i < 8; i++) out.push_back(uint8_t(seed_ >> (8 * i)));
    out.insert(out.end(), bits_.begin(), bits_.end());
    return out;
}

Filter Filter::deserialize(const crypto::HashFunction& h, const Bytes& blob) {
    if (blob.size() < 16) throw std::invalid_argument("bloom blob shorter than header");
    uint64_t m = 0, seed = 0;
    uint32_t k = 0;
    for (int i = 3; i >= 0; i--) m = m << 8 | blob[size_t(i)];
    for (int i = 3; i >= 0; i--) k = k << 8 | blob[size_t(4 + i)];
    for (int i = 7; i >= 0; i--) seed = seed << 8 | blob[size_t(8 + i)];
    Filter f(h, m, k, seed);
    if (blob.size() != 16 + f.bits_.size())
        throw std::invalid_argument("bloom blob length does not match header");
    std::memcpy(f.bits_.data(), blob.data() + 16, f.bits_.size());
    return f;
}

void Filter::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    Bytes blob = serialize();
    out.write(reinterpret_cast<const char*>(blob.data()), std::streamsize(blob.size()));
    if (!out) throw std::runtime_error("short write to " + path);
}

Filter Filter::load(const crypto::HashFunction& h, const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    Bytes blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize(h, blob);
}

uint32_t optimal_k(uint64_t m, uint64_t n) {
    if (n == 0 || m == 0) return 1;
    double k = double(m) * std::log(2.0) / double(n);
    auto r = uint32_t(std::ceil(k - 1e-9));
    return r < 1 ? 1 : r;
}

double false_positive_rate(uint64_t m, uint64_t n, uint32_t k) {
    if (n == 0) return 0.0;
    double fill = 1.0 - std::exp(-double(k) * double(n) / double(m));
    return std::pow(fill, double(k));
}

double optimal_fp_log2(uint64_t m, uint64_t n) {
    if (n == 0) return -std::numeric_limits<double>::infinity();
    return -double(m) * std::log(2.0) / double(n);
}

double forgery_probability_log2(uint32_t li_bits, uint32_t lk_bits, uint64_t m, uint64_t n) {
    double structural = -double(li_bits) - double(lk_bits);
    double filter = (n == 0) ? 0.0 : -std::log(2.0) * double(m) / double(n);
    return structural + filter;
}

double forgery_probability(uint32_t li_bits, uint32_t lk_bits, uint64_t m, uint64_t n) {
    return std::exp2(forgery_probability_log2(li_bits, lk_bits, m, n));
}

} // namespace wsnkms::bloom
