#include "doctest.h"

#include <set>
#include <stdexcept>

#include "wsnkms/schedule.hpp"

using namespace wsnkms;

TEST_CASE("uniform gaps accumulate") {
    ScheduleConfig cfg;
    cfg.mode = ScheduleConfig::Mode::uniform;
    cfg.t0 = 10.0;
    cfg.delta_fixed_s = 300;
    Rng rng(1, "schedule");
    auto s = CycleSchedule::make(cfg, 5, rng);
    CHECK(s.cycles() == 5);
    CHECK(s.t0() == 10.0);
    CHECK(s.bs_time(0) == 10.0);
    for (uint32_t i = 1; i <= 5; i++) {
        CHECK(s.delta(i) == 300);
        CHECK(s.bs_time(i) == doctest::Approx(10.0 + 300.0 * i));
    }
}

TEST_CASE("nonuniform gaps stay in range and replay by seed") {
    ScheduleConfig cfg;
    cfg.mode = ScheduleConfig::Mode::nonuniform;
    cfg.delta_min_s = 60;
    cfg.delta_max_s = 600;
    Rng r1(7, "schedule"), r2(7, "schedule"), r3(8, "schedule");
    auto a = CycleSchedule::make(cfg, 50, r1);
    auto b = CycleSchedule::make(cfg, 50, r2);
    auto c = CycleSchedule::make(cfg, 50, r3);
    std::set<uint32_t> distinct;
    bool seeds_differ = false;
    for (uint32_t i = 1; i <= 50; i++) {
        CHECK(a.delta(i) >= 60);
        CHECK(a.delta(i) <= 600);
        CHECK(a.delta(i) == b.delta(i));
        if (a.delta(i) != c.delta(i)) seeds_differ = true;
        distinct.insert(a.delta(i));
        CHECK(a.bs_time(i) == doctest::Approx(a.bs_time(i - 1) + a.delta(i)));
    }
    CHECK(distinct.size() > 5);
    CHECK(seeds_differ);
}

TEST_CASE("gap bounds are enforced") {
    ScheduleConfig cfg;
    cfg.mode = ScheduleConfig::Mode::uniform;
    Rng rng(1, "schedule");
    cfg.delta_fixed_s = 0;
    CHECK_THROWS_AS(CycleSchedule::make(cfg, 3, rng), std::invalid_argument);
    cfg.delta_fixed_s = 16384;
    CHECK_THROWS_AS(CycleSchedule::make(cfg, 3, rng), std::invalid_argument);
    cfg.delta_fixed_s = 16383;
    CHECK_NOTHROW(CycleSchedule::make(cfg, 3, rng));
    cfg.mode = ScheduleConfig::Mode::nonuniform;
    cfg.delta_min_s = 100;
    cfg.delta_max_s = 50;
    CHECK_THROWS_AS(CycleSchedule::make(cfg, 3, rng), std::invalid_argument);
}
