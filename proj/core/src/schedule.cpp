#include "wsnkms/schedule.hpp"

#include <stdexcept>

namespace wsnkms {

CycleSchedule CycleSchedule::make(const ScheduleConfig& cfg, uint32_t cycles, Rng& rng) {
    constexpr uint32_t kDeltaMax = (1u << 14) - 1;
    CycleSchedule s;
    s.t0_ = cfg.t0;
    s.deltas_.reserve(cycles);
    s.times_.reserve(cycles + 1);
    s.times_.push_back(cfg.t0);
    double t = cfg.t0;
    for (uint32_t i = 0; i < cycles; i++) {
        uint32_t d;
        if (cfg.mode == ScheduleConfig::Mode::uniform) {
            d = cfg.delta_fixed_s;
        } else {
            if (cfg.delta_min_s > cfg.delta_max_s)
                throw std::invalid_argument("schedule delta range inverted");
            d = rng.uniform_int(cfg.delta_min_s, cfg.delta_max_s);
        }
        if (d == 0 || d > kDeltaMax)
            throw std::invalid_argument("schedule gap outside the 14 bit wire range");
        s.deltas_.push_back(d);
        t += d;
        s.times_.push_back(t);
    }
    return s;
}

double CycleSchedule::bs_time(uint32_t i) const { return times_.at(i); }

} // namespace wsnkms
