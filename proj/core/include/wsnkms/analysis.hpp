#pragma once
// Closed form predictions and their Monte Carlo twins: flooded broadcast
// reach, pairwise key establishment probability, the steady state per cycle
// operation budget and its energy price, memory limited network size, and a
// qualitative scheme comparison.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "wsnkms/energy.hpp"
#include "wsnkms/netsim.hpp"
#include "wsnkms/protocol.hpp"
#include "wsnkms/rng.hpp"

namespace wsnkms::analysis {

// modeled per verification energy of certificate style schemes, mJ
constexpr double kCertAuthMj = 187.6;
constexpr double kHybridAuthMj = 75.26;

// Fixed point of  p = 1 - p_loss^(k * p)  where k is the mean neighbor
// count: the chance a flooded broadcast reaches a given node when every
// reached node relays once and each link drops a copy with p_loss.
double broadcast_reach(double p_loss, double mean_neighbors, double tol = 1e-9,
                       int max_iter = 100000);

// Chance two neighbors end up sharing a confirmed key within m cycles. The
// delayed verification variants need four message successes per cycle (two
// tickets and the broadcast at both ends); the filter verified variant only
// two, since nothing after the broadcast can fail independently.
double key_share_probability(protocol::Variant v, double p_r, uint32_t m);

// same quantity by iid coin flips, for validating the closed form
double key_share_montecarlo(protocol::Variant v, double p_r, uint32_t m,
                            uint64_t trials, Rng& rng);

// empirical flooded reach on a concrete topology: per transmission, each
// neighbor link drops the copy independently; reached fraction averaged
// over reps loss patterns
double broadcast_reach_montecarlo(const netsim::Topology& topo, double p_loss,
                                  uint32_t reps, Rng& rng);

// steady state per cycle operation budget of one honest node
struct OpCounts {
    std::array<double, energy::kOpCount> qty{};
    double operator[](energy::Op op) const { return qty[size_t(op)]; }
};
OpCounts cycle_op_counts(protocol::Variant v);
double energy_per_cycle(protocol::Variant v, const energy::Calibration& cal);

// how many node identities fit the id table, after the preloaded filter
// takes its share of the reserved memory
uint64_t max_network_size(protocol::Variant v, uint64_t memory_bits, uint32_t id_bits,
                          uint64_t filter_bits);

struct SchemeRow {
    std::string scheme;
    double auth_cost_mj = 0.0; // per verification or per cycle, see note
    std::string security;
    std::string dos_resilience;
    std::string scalability;
};
// certificate and hybrid rows carry fixed per verification costs; the three
// broadcast variants carry their computed per cycle energy
std::vector<SchemeRow> comparison_table(const energy::Calibration& cal);

} // namespace wsnkms::analysis
