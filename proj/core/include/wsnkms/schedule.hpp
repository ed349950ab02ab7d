#pragma once
// Broadcast schedule: cycle i fires at T_i = t0 + sum of the first i gaps.
// Gaps are whole seconds so they fit the 14 bit wire field; the non-uniform
// mode draws them from a seeded uniform range to keep cycle times hard to
// predict while staying reproducible.

#include <cstdint>
#include <vector>

#include "wsnkms/rng.hpp"

namespace wsnkms {

struct ScheduleConfig {
    enum class Mode { uniform, nonuniform };
    Mode mode = Mode::nonuniform;
    double t0 = 0.0;
    uint32_t delta_fixed_s = 300;
    uint32_t delta_min_s = 60;
    uint32_t delta_max_s = 600;
};

class CycleSchedule {
  public:
    static CycleSchedule make(const ScheduleConfig& cfg, uint32_t cycles, Rng& rng);

    uint32_t cycles() const { return uint32_t(deltas_.size()); }
    // gap in seconds preceding cycle i (1-based)
    uint32_t delta(uint32_t i) const { return deltas_.at(i - 1); }
    // absolute emission time of cycle i; bs_time(0) = t0
    double bs_time(uint32_t i) const;
    double t0() const { return t0_; }

  private:
    double t0_ = 0.0;
    std::vector<uint32_t> deltas_;
    std::vector<double> times_; // prefix sums
};

} // namespace wsnkms
