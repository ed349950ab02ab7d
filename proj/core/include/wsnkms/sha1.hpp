#pragma once
// Incremental SHA-1 (FIPS 180-4), 160 bit digest.

#include <array>
#include <cstddef>
#include <cstdint>

namespace wsnkms {

class Sha1 {
  public:
    Sha1() { reset(); }
    void reset();
    void update(const uint8_t* data, size_t len);
    std::array<uint8_t, 20> finish();
    static std::array<uint8_t, 20> digest(const uint8_t* data, size_t len);

  private:
    void process(const uint8_t block[64]);
    uint32_t h_[5];
    uint8_t buf_[64];
    uint64_t total_ = 0;
    size_t fill_ = 0;
};

} // namespace wsnkms
