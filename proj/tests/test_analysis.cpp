#include "doctest.h"

#include <cmath>

#include "wsnkms/analysis.hpp"

using namespace wsnkms;
using namespace wsnkms::analysis;
using protocol::Variant;

TEST_CASE("flooded reach fixed point") {
    SUBCASE("endpoints are exact") {
        CHECK(broadcast_reach(0.0, 10.0) == 1.0);
        CHECK(broadcast_reach(0.0, 0.0) == 0.0);
        CHECK(broadcast_reach(1.0, 10.0) == 0.0);
        CHECK(broadcast_reach(0.5, 0.0) == 0.0);
    }

    SUBCASE("reference point") {
        CHECK(broadcast_reach(0.5, 10.0) == doctest::Approx(0.99902).epsilon(5e-5));
    }

    SUBCASE("solution satisfies its own equation") {
        for (double pl : {0.2, 0.5, 0.8, 0.95}) {
            for (double k : {2.0, 5.0, 10.0, 40.0}) {
                CAPTURE(pl);
                CAPTURE(k);
                const double p = broadcast_reach(pl, k);
                CHECK(std::fabs(p - (1.0 - std::pow(pl, k * p))) < 1e-6);
            }
        }
    }

    SUBCASE("monotone in loss and in degree") {
        CHECK(broadcast_reach(0.3, 10.0) > broadcast_reach(0.6, 10.0));
        CHECK(broadcast_reach(0.6, 10.0) > broadcast_reach(0.9, 10.0));
        CHECK(broadcast_reach(0.5, 20.0) > broadcast_reach(0.5, 5.0));
    }

    SUBCASE("rejects non probabilities") {
        CHECK_THROWS_AS(broadcast_reach(-0.1, 5.0), std::invalid_argument);
        CHECK_THROWS_AS(broadcast_reach(1.1, 5.0), std::invalid_argument);
        CHECK_THROWS_AS(broadcast_reach(0.5, -1.0), std::invalid_argument);
    }
}

TEST_CASE("pairwise key share probability") {
    SUBCASE("single cycle closed forms") {
        // four message legs for the delayed variants, two for the filter one
        CHECK(key_share_probability(Variant::basic, 0.9, 1) == doctest::Approx(0.6561));
        CHECK(key_share_probability(Variant::iba, 0.9, 1) == doctest::Approx(0.6561));
        CHECK(key_share_probability(Variant::bba, 0.9, 1) == doctest::Approx(0.81));
    }

    SUBCASE("cycles accumulate as independent retries") {
        CHECK(key_share_probability(Variant::basic, 0.9, 2) ==
              doctest::Approx(0.88173279));
        CHECK(key_share_probability(Variant::bba, 0.9, 2) == doctest::Approx(0.9639));
        CHECK(key_share_probability(Variant::iba, 1.0, 1) == 1.0);
        CHECK(key_share_probability(Variant::iba, 0.0, 5) == 0.0);
        CHECK(key_share_probability(Variant::bba, 0.7, 0) == 0.0);
    }

    SUBCASE("two legs dominate four on every grid point") {
        for (double pr : {0.1, 0.3, 0.5, 0.7, 0.9, 0.99}) {
            for (uint32_t m : {1u, 2u, 4u, 8u}) {
                CAPTURE(pr);
                CAPTURE(m);
                const double iba = key_share_probability(Variant::iba, pr, m);
                const double bba = key_share_probability(Variant::bba, pr, m);
                CHECK(bba >= iba);
                CHECK(key_share_probability(Variant::basic, pr, m) ==
                      doctest::Approx(iba));
            }
        }
    }

    SUBCASE("rejects non probabilities") {
        CHECK_THROWS_AS(key_share_probability(Variant::iba, 1.5, 1),
                        std::invalid_argument);
    }

    SUBCASE("coin flip twin agrees within two points") {
        Rng rng(101, "ks");
        struct Case {
            Variant v;
            double pr;
            uint32_t m;
        } cases[] = {{Variant::basic, 0.9, 3}, {Variant::bba, 0.7, 2},
                     {Variant::iba, 0.5, 5}};
        for (const auto& c : cases) {
            CAPTURE(int(c.v));
            const double cf = key_share_probability(c.v, c.pr, c.m);
            const double mc = key_share_montecarlo(c.v, c.pr, c.m, 10000, rng);
            CHECK(std::fabs(mc - cf) <= 0.02);
        }
        CHECK(key_share_montecarlo(Variant::iba, 0.9, 0, 1000, rng) == 0.0);
    }
}

TEST_CASE("spatial reach twin tracks the solver on dense graphs") {
    // the solver treats links as independent; on a geometric graph that
    // holds up to moderate loss, so that is the regime checked here
    Rng topo_rng(19, "topo");
    auto dense =
        netsim::Topology::place_uniform(120, 100.0, 100.0, 35.0, topo_rng, {50.0, 50.0});
    auto sparse =
        netsim::Topology::place_uniform(120, 100.0, 100.0, 18.0, topo_rng, {50.0, 50.0});
    REQUIRE(dense.bs_adj.size() > 0);
    REQUIRE(sparse.mean_degree() >= 8.0);

    Rng rng(19, "reach");
    CHECK(broadcast_reach_montecarlo(dense, 0.0, 20, rng) == 1.0); // connected
    CHECK(broadcast_reach_montecarlo(dense, 1.0, 20, rng) == 0.0);

    for (double pl : {0.5, 0.8}) {
        CAPTURE(pl);
        const double solver = broadcast_reach(pl, dense.mean_degree());
        const double mc = broadcast_reach_montecarlo(dense, pl, 200, rng);
        CHECK(std::fabs(mc - solver) <= 0.05);
    }
    for (double pl : {0.3, 0.5}) {
        CAPTURE(pl);
        const double solver = broadcast_reach(pl, sparse.mean_degree());
        const double mc = broadcast_reach_montecarlo(sparse, pl, 200, rng);
        CHECK(std::fabs(mc - solver) <= 0.05);
    }
}

TEST_CASE("steady state operation budget") {
    using energy::Op;
    struct Expect {
        Variant v;
        double rx, hash, dec, bloom;
    } table[] = {{Variant::basic, 142, 4, 2, 0},
                 {Variant::iba, 177, 5, 4, 0},
                 {Variant::bba, 115, 4, 0, 1}};
    for (const auto& e : table) {
        CAPTURE(protocol::variant_name(e.v));
        const auto c = cycle_op_counts(e.v);
        CHECK(c[Op::tx_byte] == 87);
        CHECK(c[Op::rx_byte] == e.rx);
        CHECK(c[Op::hash] == e.hash);
        CHECK(c[Op::mac] == 1);
        CHECK(c[Op::encrypt_block] == 0);
        CHECK(c[Op::decrypt_block] == e.dec);
        CHECK(c[Op::key_agree] == 1);
        CHECK(c[Op::bloom_query] == e.bloom);
    }
}

TEST_CASE("calibrated per cycle energy hits the reference totals") {
    const auto cal = energy::Calibration::defaults();
    CHECK(energy_per_cycle(Variant::basic, cal) == doctest::Approx(58.68).epsilon(1e-9));
    CHECK(energy_per_cycle(Variant::iba, cal) == doctest::Approx(60.50).epsilon(1e-9));
    CHECK(energy_per_cycle(Variant::bba, cal) == doctest::Approx(62.54).epsilon(1e-9));
}

TEST_CASE("identity capacity under the memory budget") {
    const uint64_t mem = uint64_t(1) << 19;
    const uint64_t filt = uint64_t(1) << 15;
    CHECK(max_network_size(Variant::basic, mem, 16, filt) == 32768); // no filter share
    CHECK(max_network_size(Variant::iba, mem, 16, filt) == 32768);
    CHECK(max_network_size(Variant::bba, mem, 16, filt) == 30720);
    CHECK(max_network_size(Variant::bba, filt, 16, filt) == 0); // filter eats it all
    CHECK(max_network_size(Variant::basic, 100, 16, 0) == 6);   // floor division
    CHECK(max_network_size(Variant::bba, filt + 160, 16, filt) == 10);
    CHECK_THROWS_AS(max_network_size(Variant::iba, mem, 0, 0), std::invalid_argument);
}

TEST_CASE("scheme comparison rows") {
    const auto rows = comparison_table(energy::Calibration::defaults());
    REQUIRE(rows.size() == 5);
    CHECK(rows[0].scheme == "certificate");
    CHECK(rows[0].auth_cost_mj == doctest::Approx(187.6));
    CHECK(rows[1].scheme == "hybrid");
    CHECK(rows[1].auth_cost_mj == doctest::Approx(75.26));
    CHECK(rows[2].scheme == "basic");
    CHECK(rows[2].auth_cost_mj == doctest::Approx(58.68).epsilon(0.01));
    CHECK(rows[2].dos_resilience == "vulnerable");
    CHECK(rows[3].scheme == "iba");
    CHECK(rows[3].auth_cost_mj == doctest::Approx(60.50).epsilon(0.01));
    CHECK(rows[4].scheme == "bba");
    CHECK(rows[4].auth_cost_mj == doctest::Approx(62.54).epsilon(0.01));
    for (const auto& r : rows) {
        CHECK(!r.security.empty());
        CHECK(!r.dos_resilience.empty());
        CHECK(!r.scalability.empty());
    }
}
