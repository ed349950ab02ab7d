#include "wsnkms/analysis.hpp"

#include <cmath>
#include <queue>
#include <stdexcept>

namespace wsnkms::analysis {

double broadcast_reach(double p_loss, double mean_neighbors, double tol, int max_iter) {
    if (p_loss < 0.0 || p_loss > 1.0) throw std::invalid_argument("loss is a probability");
    if (mean_neighbors < 0.0) throw std::invalid_argument("negative neighbor count");
    if (p_loss == 0.0) return mean_neighbors > 0.0 ? 1.0 : 0.0;
    if (p_loss == 1.0 || mean_neighbors == 0.0) return 0.0;
    double p = 1.0;
    for (int i = 0; i < max_iter; ++i) {
        const double next = 1.0 - std::pow(p_loss, mean_neighbors * p);
        if (std::fabs(next - p) < tol) return next;
        p = next;
    }
    return p;
}

double key_share_probability(protocol::Variant v, double p_r, uint32_t m) {
    if (p_r < 0.0 || p_r > 1.0) throw std::invalid_argument("reach is a probability");
    const int legs = v == protocol::Variant::bba ? 2 : 4;
    const double per_cycle = std::pow(p_r, legs);
    return 1.0 - std::pow(1.0 - per_cycle, double(m));
}

double key_share_montecarlo(protocol::Variant v, double p_r, uint32_t m,
                            uint64_t trials, Rng& rng) {
    const int legs = v == protocol::Variant::bba ? 2 : 4;
    uint64_t hits = 0;
    for (uint64_t t = 0; t < trials; ++t) {
        for (uint32_t c = 0; c < m; ++c) {
            bool ok = true;
            for (int l = 0; l < legs; ++l)
                if (!rng.bernoulli(p_r)) {
                    ok = false;
                    break;
                }
            if (ok) {
                hits++;
                break;
            }
        }
    }
    return trials ? double(hits) / double(trials) : 0.0;
}

double broadcast_reach_montecarlo(const netsim::Topology& topo, double p_loss,
                                  uint32_t reps, Rng& rng) {
    const uint32_t n = topo.num_nodes();
    if (n == 0 || reps == 0) return 0.0;
    uint64_t reached_total = 0;
    std::vector<char> seen(n);
    std::queue<uint16_t> frontier;
    for (uint32_t r = 0; r < reps; ++r) {
        std::fill(seen.begin(), seen.end(), 0);
        while (!frontier.empty()) frontier.pop();
        for (uint16_t v : topo.bs_adj) {
            if (!rng.bernoulli(1.0 - p_loss)) continue;
            if (!seen[v]) {
                seen[v] = 1;
                frontier.push(v);
            }
        }
        while (!frontier.empty()) {
            const uint16_t u = frontier.front();
            frontier.pop();
            for (uint16_t v : topo.adj[u]) {
                if (!rng.bernoulli(1.0 - p_loss)) continue;
                if (!seen[v]) {
                    seen[v] = 1;
                    frontier.push(v);
                }
            }
        }
        for (uint32_t i = 0; i < n; ++i) reached_total += seen[i];
    }
    return double(reached_total) / (double(n) * double(reps));
}

OpCounts cycle_op_counts(protocol::Variant v) {
    using energy::Op;
    OpCounts c;
    auto set = [&c](Op op, double q) { c.qty[size_t(op)] = q; };
    // one ticket out (58 B framed) and one ack out (29 B); in the other
    // direction a neighbor's ticket (58), one ack (29) and the cycle's base
    // station traffic; one pairwise agreement, one signature check, and the
    // hashes split into chain step, key derivation and two ack tags
    set(Op::tx_byte, 87);
    set(Op::mac, 1);
    set(Op::key_agree, 1);
    switch (v) {
    case protocol::Variant::basic:
        set(Op::rx_byte, 142); // + broadcast 28 and disclosure 27
        set(Op::hash, 4);
        set(Op::decrypt_block, 2);
        break;
    case protocol::Variant::iba:
        set(Op::rx_byte, 177); // + two part broadcast 63 and disclosure 27
        set(Op::hash, 5);      // carried hash check on top
        set(Op::decrypt_block, 4);
        break;
    case protocol::Variant::bba:
        set(Op::rx_byte, 115); // + plaintext broadcast 28
        set(Op::hash, 4);
        set(Op::bloom_query, 1);
        break;
    }
    return c;
}

double energy_per_cycle(protocol::Variant v, const energy::Calibration& cal) {
    const OpCounts c = cycle_op_counts(v);
    double total = 0.0;
    for (size_t i = 0; i < energy::kOpCount; ++i)
        total += c.qty[i] * cal.cost(energy::Op(i));
    return total;
}

uint64_t max_network_size(protocol::Variant v, uint64_t memory_bits, uint32_t id_bits,
                          uint64_t filter_bits) {
    if (id_bits == 0) throw std::invalid_argument("zero id width");
    const uint64_t reserved = v == protocol::Variant::bba ? filter_bits : 0;
    if (reserved >= memory_bits) return 0;
    return (memory_bits - reserved) / id_bits;
}

std::vector<SchemeRow> comparison_table(const energy::Calibration& cal) {
    std::vector<SchemeRow> rows;
    rows.push_back({"certificate", kCertAuthMj, "highest", "resilient", "very low"});
    rows.push_back({"hybrid", kHybridAuthMj, "moderate", "resilient", "low"});
    rows.push_back({"basic", energy_per_cycle(protocol::Variant::basic, cal), "highest",
                    "vulnerable", "high"});
    rows.push_back({"iba", energy_per_cycle(protocol::Variant::iba, cal), "highest",
                    "resilient", "high"});
    rows.push_back({"bba", energy_per_cycle(protocol::Variant::bba, cal), "very high",
                    "resilient", "high"});
    return rows;
}

} // namespace wsnkms::analysis
