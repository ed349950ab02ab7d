#pragma once
// Attack scenario drivers. Each run_* builds a simulator, wires attacker
// entities into it, replays the scenario and returns a report of counts and
// time series the tools write out as CSV.
//
//   flooding    junk key broadcasts during the buffering phase; sweeps the
//               attack window length and compares buffered bytes and energy
//               against an attack-free twin run
//   replay      1 same cycle, before disclosure, byte identical copy
//               2 cross cycle, last cycle's broadcast into the next
//               3 victim jammed, genuine broadcast replayed tens of seconds
//                 late so only the inter arrival timing can catch it
//   wormhole    two colluders tunnel a forged ticket from the base station
//               area to a victim many hops out, beating the flooded
//               broadcast; run with the admission window rule on or off
//   battery     replayed legitimate tickets force signature checks and key
//               agreements; the per cycle work cap bounds the damage, and
//               static per verification costs model certificate schemes
//
// Scenario and variant do not always combine (a pre disclosure replay needs
// a disclosure to exist); impossible combinations throw UnsupportedCombo.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "wsnkms/netsim.hpp"
#include "wsnkms/protocol.hpp"

namespace wsnkms::adversary {

struct UnsupportedCombo : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EnergyPoint {
    double time_s = 0.0;
    double cum_mj = 0.0;
};

// ---- flooding ----

struct FloodingParams {
    protocol::Variant variant = protocol::Variant::basic;
    uint32_t nodes = 20;
    double area = 60.0;
    double range = 30.0;
    double rate_hz = 50.0;             // junk broadcasts per second
    std::vector<double> taus{15, 30, 60, 120, 240}; // attack window lengths
    double delta_s = 300.0;            // cycle length, must exceed max tau
    size_t node_memory = size_t(1) << 20;
    uint64_t seed = 1;
    double energy_sample_dt = 1.0;
};

struct FloodingRow {
    double tau = 0.0;
    size_t peak_mem_attack = 0;
    size_t peak_mem_honest = 0;
    size_t attributable_bytes = 0; // attack peak minus honest peak
    uint64_t injected = 0;
    uint64_t delivered = 0;
    uint64_t accepted = 0; // blind buffering counts as acceptance here
    uint64_t rejected = 0;
    uint64_t forwards_of_injected = 0; // relays of junk, summed over nodes
    double key_share = 0.0;            // honest pairing must ride it out
};

struct FloodingReport {
    protocol::Variant variant;
    std::vector<FloodingRow> rows;
    // victim's cumulative energy under the longest window, and attack-free
    std::vector<EnergyPoint> victim_attack;
    std::vector<EnergyPoint> victim_honest;
};

FloodingReport run_flooding(const FloodingParams& p);

// ---- replay ----

struct ReplayParams {
    protocol::Variant variant = protocol::Variant::iba;
    int scenario = 1; // 1, 2 or 3
    uint32_t nodes = 6;
    double delta_s = 300.0;
    uint64_t seed = 1;
};

struct ReplayReport {
    protocol::Variant variant;
    int scenario = 0;
    uint64_t injected = 0;
    uint64_t delivered = 0;
    uint64_t injected_ok = 0; // dispatches that returned ok (blind buffering included)
    uint64_t injected_rejected = 0;
    std::array<uint64_t, protocol::kRejectCount> victim_rejects{};
    uint64_t victim_cycles_completed = 0;
    uint64_t victim_cycles_failed = 0;
    uint64_t forged_pairings = 0; // must stay 0
    double key_share = 0.0;
    uint64_t reject_count(protocol::Reject r) const {
        return victim_rejects[size_t(r)];
    }
};

ReplayReport run_replay(const ReplayParams& p);

// ---- wormhole ----

struct WormholeParams {
    protocol::Variant variant = protocol::Variant::bba;
    bool window_rule = true;
    uint32_t chain_nodes = 16;
    double spacing = 20.0;
    double range = 30.0;
    double tunnel_delay_s = 0.001;
    double delta_s = 300.0;
    uint64_t seed = 1;
};

struct WormholeReport {
    protocol::Variant variant;
    bool window_rule = true;
    uint64_t tunneled = 0;       // forged tickets pushed out near the victim
    uint64_t forged_pairings = 0; // registry audit hits after the run
    uint64_t victim_late_rejects = 0;
    double key_share = 0.0; // honest pairs, should survive the attack
};

WormholeReport run_wormhole(const WormholeParams& p);

// ---- battery exhaustion ----

struct BatteryParams {
    protocol::Variant variant = protocol::Variant::iba;
    uint32_t nodes = 20;
    double area = 60.0;
    double range = 30.0;
    double rate_hz = 10.0; // replayed tickets per second
    double delta_s = 300.0;
    uint64_t seed = 1;
    double energy_sample_dt = 5.0;
};

struct BatteryReport {
    protocol::Variant variant;
    std::vector<double> times;
    std::vector<double> victim_cum_mj;  // simulated, work cap in force
    std::vector<double> cert_cum_mj;    // static cost per processed ticket
    std::vector<double> hybrid_cum_mj;
    uint64_t replayed = 0;
    uint64_t attack_cycle_auth_attempts = 0; // bounded by the work cap
    uint32_t gamma = 0;
};

BatteryReport run_battery(const BatteryParams& p);

} // namespace wsnkms::adversary
