#include "wsnkms/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <set>
#include <utility>

#include "wsnkms/analysis.hpp"
#include "wsnkms/rng.hpp"

namespace wsnkms::adversary {

namespace {

using protocol::Variant;

wire::MsgKind bcast_kind(Variant v) {
    switch (v) {
    case Variant::basic: return wire::MsgKind::bcast_basic;
    case Variant::iba: return wire::MsgKind::bcast_iba;
    case Variant::bba: return wire::MsgKind::bcast_bba;
    }
    return wire::MsgKind::bcast_basic;
}

Bytes junk_broadcast(Variant v, Rng& rng) {
    if (v == Variant::basic) {
        Bytes b(wire::kKeyBroadcastBytes);
        rng.fill(b.data(), b.size());
        return b;
    }
    if (v == Variant::iba) {
        wire::TwoPart tp;
        tp.part1.resize(wire::kKeyBroadcastBytes);
        tp.part2.resize(wire::kMuCycleBytes);
        rng.fill(tp.part1.data(), tp.part1.size());
        rng.fill(tp.part2.data(), tp.part2.size());
        return wire::encode_two_part(tp);
    }
    for (;;) { // junk still has to parse, or the filter is never even asked
        Bytes b(wire::kKeyBroadcastBytes);
        rng.fill(b.data(), b.size());
        if (wire::decode_key_cycle_delta(b)) return b;
    }
}

protocol::ProtocolConfig base_config(Variant v, uint32_t cycles, double delta_s,
                                     size_t memory) {
    protocol::ProtocolConfig pc;
    pc.variant = v;
    pc.cycles = cycles;
    pc.node_memory_bytes = memory;
    pc.schedule.mode = ScheduleConfig::Mode::uniform;
    pc.schedule.t0 = 0.0;
    pc.schedule.delta_fixed_s = uint32_t(delta_s);
    return pc;
}

} // namespace

// ---- flooding ----

namespace {

struct FloodOutcome {
    size_t victim_peak = 0;
    netsim::AdvStats adv;
    uint64_t fwd_injected = 0;
    double key_share = 0.0;
};

FloodOutcome flood_run(const FloodingParams& p, double tau, bool attack,
                       std::vector<EnergyPoint>* series) {
    Rng topo_rng(p.seed, "topo");
    auto topo = netsim::Topology::place_uniform(p.nodes, p.area, p.area, p.range, topo_rng,
                                                {p.area / 2, p.area / 2});
    auto pc = base_config(p.variant, 2, p.delta_s, p.node_memory);
    netsim::SimConfig sc;
    sc.bs_direct = false; // junk must compete for relaying too
    sc.trace_limit = 0;
    netsim::Simulator sim(std::move(topo), pc, sc, energy::Calibration::defaults(), p.seed);
    const uint16_t victim = 0;
    if (attack) {
        const uint16_t atk = sim.add_attacker(sim.topology().pos[victim]);
        Rng jr(p.seed, "junk");
        const double step = 1.0 / p.rate_hz;
        double t = 1.0 + jr.uniform(0.0, step);
        while (t <= tau) {
            sim.inject(t, atk, netsim::kBsId, bcast_kind(p.variant),
                       junk_broadcast(p.variant, jr));
            t += step;
        }
    }
    const double end = p.delta_s + (p.variant == Variant::bba ? 0.0 : 2.0) + 1.5;
    if (series) {
        series->clear();
        for (double s = 0.0; s < end; s += p.energy_sample_dt) {
            sim.run(s);
            series->push_back({s, sim.ledger().total_mj(victim)});
        }
    }
    sim.run(end);
    if (series) series->push_back({end, sim.ledger().total_mj(victim)});
    FloodOutcome out;
    out.victim_peak = sim.peak_memory(victim);
    out.adv = sim.adv_stats();
    for (uint32_t i = 0; i < p.nodes; ++i)
        out.fwd_injected += sim.forwards_of_injected(uint16_t(i));
    out.key_share = sim.key_share_rate();
    return out;
}

} // namespace

FloodingReport run_flooding(const FloodingParams& p) {
    if (p.taus.empty()) throw std::invalid_argument("need at least one attack window");
    const double max_tau = *std::max_element(p.taus.begin(), p.taus.end());
    if (p.delta_s < max_tau + 20.0)
        throw std::invalid_argument("cycle length must comfortably outlast the attack");
    FloodingReport rep;
    rep.variant = p.variant;
    for (double tau : p.taus) {
        const bool sample = tau == max_tau && rep.victim_attack.empty();
        auto atk = flood_run(p, tau, true, sample ? &rep.victim_attack : nullptr);
        auto hon = flood_run(p, tau, false, sample ? &rep.victim_honest : nullptr);
        FloodingRow row;
        row.tau = tau;
        row.peak_mem_attack = atk.victim_peak;
        row.peak_mem_honest = hon.victim_peak;
        row.attributable_bytes =
            atk.victim_peak > hon.victim_peak ? atk.victim_peak - hon.victim_peak : 0;
        row.injected = atk.adv.injected_copies;
        row.delivered = atk.adv.delivered;
        row.accepted = atk.adv.accepted;
        row.rejected = atk.adv.rejected;
        row.forwards_of_injected = atk.fwd_injected;
        row.key_share = atk.key_share;
        rep.rows.push_back(row);
    }
    return rep;
}

// ---- replay ----

ReplayReport run_replay(const ReplayParams& p) {
    if (p.scenario < 1 || p.scenario > 3)
        throw std::invalid_argument("scenario is 1, 2 or 3");
    if (p.variant == Variant::bba && p.scenario == 1)
        throw UnsupportedCombo(
            "filter verified broadcasts have no pre disclosure window to replay into");
    const uint32_t cycles = p.scenario == 1 ? 2 : 3;
    Rng topo_rng(p.seed, "topo");
    auto topo =
        netsim::Topology::place_uniform(p.nodes, 50.0, 50.0, 30.0, topo_rng, {25.0, 25.0});
    auto pc = base_config(p.variant, cycles, p.delta_s, 4096);
    netsim::SimConfig sc;
    netsim::Simulator sim(std::move(topo), pc, sc, energy::Calibration::defaults(), p.seed);
    const uint16_t victim = 0;
    const uint16_t atk = sim.add_attacker(sim.topology().pos[victim]);
    auto seen = std::make_shared<std::set<std::pair<uint16_t, uint32_t>>>();
    const double T2 = sim.bs().schedule().bs_time(2);

    if (p.scenario == 1) {
        // byte identical copy, shortly after the original, well before the
        // disclosure
        sim.set_attacker_handler(atk, [&sim, atk, seen](const wire::Assembled& m,
                                                        double now) {
            if (m.origin != netsim::kBsId) return;
            if (m.kind != wire::MsgKind::bcast_basic && m.kind != wire::MsgKind::bcast_iba)
                return;
            if (!seen->insert({m.origin, m.seq}).second) return;
            sim.inject(now + 0.3, atk, netsim::kBsId, m.kind, m.payload);
        });
    } else if (p.scenario == 2) {
        // keep the first cycle's broadcast and replay it mid second cycle
        const wire::MsgKind kind = bcast_kind(p.variant);
        sim.set_attacker_handler(
            atk, [&sim, atk, seen, T2, kind](const wire::Assembled& m, double now) {
                if (m.origin != netsim::kBsId || m.kind != kind) return;
                if (!seen->insert({m.origin, m.seq}).second) return;
                if (now < T2 - 1.0) sim.inject(T2 - 10.0, atk, netsim::kBsId, kind, m.payload);
            });
    } else {
        // the victim alone misses cycle 2; everything it gets arrives half a
        // minute stale through the attacker
        const double jam_from = T2 - 0.5, jam_to = T2 + 2.5;
        sim.set_jam([victim, jam_from, jam_to](uint16_t v, uint16_t origin,
                                               wire::MsgKind k, double now) {
            return v == victim && origin == netsim::kBsId && wire::is_bs_kind(k) &&
                   now >= jam_from && now <= jam_to;
        });
        sim.set_attacker_handler(
            atk, [&sim, atk, seen, T2](const wire::Assembled& m, double now) {
                if (m.origin != netsim::kBsId) return;
                if (now < T2 - 1.0 || now > T2 + 3.0) return;
                if (!seen->insert({m.origin, m.seq}).second) return;
                sim.inject(now + 30.0, atk, netsim::kBsId, m.kind, m.payload);
            });
    }

    sim.run_all();
    ReplayReport rep;
    rep.variant = p.variant;
    rep.scenario = p.scenario;
    rep.injected = sim.adv_stats().injected_copies;
    rep.delivered = sim.adv_stats().delivered;
    rep.injected_ok = sim.adv_stats().accepted;
    rep.injected_rejected = sim.adv_stats().rejected;
    rep.victim_rejects = sim.node(victim).counters().rejects;
    rep.victim_cycles_completed = sim.node(victim).counters().cycles_completed;
    rep.victim_cycles_failed = sim.node(victim).counters().cycles_failed;
    rep.forged_pairings = sim.forged_pairings().size();
    rep.key_share = sim.key_share_rate();
    return rep;
}

// ---- wormhole ----

WormholeReport run_wormhole(const WormholeParams& p) {
    auto topo = netsim::Topology::chain(p.chain_nodes, p.spacing, p.range);
    auto pc = base_config(p.variant, 2, p.delta_s, 4096);
    pc.ticket_window = p.window_rule;
    netsim::SimConfig sc;
    sc.bs_direct = false; // hop by hop, so the tunnel has something to beat
    netsim::Simulator sim(std::move(topo), pc, sc, energy::Calibration::defaults(), p.seed);
    const uint16_t a1 = sim.add_attacker(sim.topology().bs_pos);
    const uint16_t a2 = sim.add_attacker(sim.topology().pos[p.chain_nodes - 1]);
    crypto::DhGroup grp;
    Rng wr(p.seed, "wormhole");
    const auto kp = std::make_shared<crypto::KeyPair>(crypto::generate_keypair(grp, wr));
    const uint16_t fake_id = 999; // nobody registered under this id

    struct WormState {
        Bytes last_bcast;
        std::set<std::pair<uint16_t, uint32_t>> seen;
        uint64_t tunneled = 0;
    };
    auto st = std::make_shared<WormState>();

    auto forge_and_tunnel = [&sim, a2, kp, st, fake_id, tunnel = p.tunnel_delay_s](
                                const crypto::SymmetricKey& kds, uint32_t cycle,
                                double now) {
        crypto::Sha1Hash h;
        wire::Ticket t;
        t.node_id = fake_id;
        t.cycle = cycle;
        t.pub = kp->pub;
        t.sig = crypto::mac(h, kds, kp->pub.data(), kp->pub.size());
        sim.inject(now + tunnel, a2, fake_id, wire::MsgKind::ticket, wire::encode_ticket(t));
        st->tunneled++;
    };

    if (p.variant == Variant::bba) {
        // the signing key is right there in the plaintext broadcast
        sim.set_attacker_handler(a1, [st, forge_and_tunnel](const wire::Assembled& m,
                                                            double now) {
            if (m.origin != netsim::kBsId || m.kind != wire::MsgKind::bcast_bba) return;
            if (!st->seen.insert({m.origin, m.seq}).second) return;
            auto kcd = wire::decode_key_cycle_delta(m.payload);
            if (kcd && kcd->cycle == 2) forge_and_tunnel(kcd->key, 2, now);
        });
    } else {
        // wait for the disclosure, decrypt the stored broadcast, then forge
        sim.set_attacker_handler(a1, [st, forge_and_tunnel, v = p.variant](
                                         const wire::Assembled& m, double now) {
            if (m.origin != netsim::kBsId) return;
            if (!st->seen.insert({m.origin, m.seq}).second) return;
            if (m.kind == wire::MsgKind::bcast_basic || m.kind == wire::MsgKind::bcast_iba) {
                st->last_bcast = m.payload;
                return;
            }
            if (m.kind != wire::MsgKind::disclosure || st->last_bcast.empty()) return;
            auto d = wire::decode_disclosure(m.payload);
            if (!d || d->cycle != 2) return;
            Bytes ct = st->last_bcast;
            if (v == Variant::iba) {
                auto tp = wire::decode_two_part(ct);
                if (!tp) return;
                ct = tp->part1;
            }
            crypto::Sha1Hash h;
            Bytes plain = crypto::decrypt(h, d->key, ct);
            auto kcd = wire::decode_key_cycle_delta(plain);
            if (!kcd) return;
            forge_and_tunnel(kcd->key, 2, now);
        });
    }

    sim.run_all();
    WormholeReport rep;
    rep.variant = p.variant;
    rep.window_rule = p.window_rule;
    rep.tunneled = st->tunneled;
    rep.forged_pairings = sim.forged_pairings().size();
    for (uint32_t i = 0; i < p.chain_nodes; ++i)
        rep.victim_late_rejects +=
            sim.node(uint16_t(i)).counters().reject_count(protocol::Reject::late);
    rep.key_share = sim.key_share_rate();
    return rep;
}

// ---- battery exhaustion ----

BatteryReport run_battery(const BatteryParams& p) {
    Rng topo_rng(p.seed, "topo");
    auto topo = netsim::Topology::place_uniform(p.nodes, p.area, p.area, p.range, topo_rng,
                                                {p.area / 2, p.area / 2});
    auto pc = base_config(p.variant, 3, p.delta_s, 4096);
    netsim::SimConfig sc;
    sc.trace_limit = 0;
    netsim::Simulator sim(std::move(topo), pc, sc, energy::Calibration::defaults(), p.seed);
    const uint16_t victim = 0;
    const uint16_t atk = sim.add_attacker(sim.topology().pos[victim]);

    // dispersed listeners pool every distinct ticket they overhear
    auto pool = std::make_shared<std::vector<Bytes>>();
    auto pool_seen = std::make_shared<std::set<std::pair<uint16_t, uint32_t>>>();
    sim.set_promiscuous([pool, pool_seen, victim](uint16_t origin, wire::MsgKind k,
                                                  const Bytes& payload, double) {
        if (k != wire::MsgKind::ticket || origin == victim) return;
        auto t = wire::decode_ticket(payload);
        if (!t) return;
        if (pool_seen->insert({t->node_id, t->cycle}).second) pool->push_back(payload);
    });

    const double T1 = sim.bs().schedule().bs_time(1);
    const double T2 = sim.bs().schedule().bs_time(2);
    const double T3 = sim.bs().schedule().bs_time(3);
    const double tail = p.variant == Variant::bba ? 0.0 : 2.0;
    const double start = T1 + tail + 5.0;
    const double stop = T2 - 2.5;
    auto replayed = std::make_shared<uint64_t>(0);
    std::vector<double> inj_times;
    for (double t = start; t <= stop; t += 1.0 / p.rate_hz) inj_times.push_back(t);
    for (size_t k = 0; k < inj_times.size(); ++k) {
        const double t = inj_times[k];
        sim.at(t, [&sim, atk, pool, replayed, k, t] {
            if (pool->empty()) return;
            const Bytes payload = (*pool)[k % pool->size()];
            auto tk = wire::decode_ticket(payload);
            sim.inject(t, atk, tk ? tk->node_id : uint16_t(0), wire::MsgKind::ticket,
                       payload);
            (*replayed)++;
        });
    }

    const double end = T3 + tail + 2.0;
    BatteryReport rep;
    rep.variant = p.variant;
    rep.gamma = pc.gamma;
    uint64_t attempts_before = 0, attempts_after = 0;
    bool b1 = false, b2 = false;
    std::vector<double> samples;
    for (double s = 0.0; s < end; s += p.energy_sample_dt) samples.push_back(s);
    samples.push_back(end);
    for (double s : samples) {
        if (!b1 && s >= T2 - 0.5) {
            sim.run(T2 - 0.5);
            attempts_before = sim.node(victim).counters().auth_attempts;
            b1 = true;
        }
        if (!b2 && s >= T2 + tail + 1.0) {
            sim.run(T2 + tail + 1.0);
            attempts_after = sim.node(victim).counters().auth_attempts;
            b2 = true;
        }
        sim.run(s);
        rep.times.push_back(s);
        rep.victim_cum_mj.push_back(sim.ledger().total_mj(victim));
    }
    if (!b2) {
        sim.run_all();
        attempts_after = sim.node(victim).counters().auth_attempts;
    }
    rep.replayed = *replayed;
    rep.attack_cycle_auth_attempts = attempts_after - attempts_before;
    // certificate style schemes pay a fixed verification price per replayed
    // ticket the moment it arrives; no admission cap applies
    for (double s : rep.times) {
        uint64_t cnt = 0;
        for (double t : inj_times) {
            if (t + 0.002 <= s)
                cnt++;
            else
                break;
        }
        rep.cert_cum_mj.push_back(double(cnt) * analysis::kCertAuthMj);
        rep.hybrid_cum_mj.push_back(double(cnt) * analysis::kHybridAuthMj);
    }
    return rep;
}

} // namespace wsnkms::adversary
