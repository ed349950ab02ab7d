#include "wsnkms/protocol.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "wsnkms/rng.hpp"

namespace wsnkms::protocol {

const char* variant_name(Variant v) {
    switch (v) {
    case Variant::basic: return "basic";
    case Variant::iba: return "iba";
    case Variant::bba: return "bba";
    }
    return "?";
}

std::optional<Variant> variant_from_name(std::string_view name) {
    if (name == "basic") return Variant::basic;
    if (name == "iba") return Variant::iba;
    if (name == "bba") return Variant::bba;
    return std::nullopt;
}

const char* reject_name(Reject r) {
    switch (r) {
    case Reject::none: return "none";
    case Reject::bogus: return "bogus";
    case Reject::late: return "late";
    case Reject::memory: return "memory";
    case Reject::duplicate: return "duplicate";
    case Reject::wrong_cycle: return "wrong_cycle";
    case Reject::inauthentic: return "inauthentic";
    case Reject::integrity: return "integrity";
    case Reject::replay: return "replay";
    }
    return "?";
}

// ---- base station ----

BaseStation::BaseStation(const ProtocolConfig& cfg, uint32_t num_nodes, uint64_t seed,
                         const crypto::HashFunction& h, const crypto::DhGroup& grp)
    : cfg_(cfg), num_nodes_(num_nodes), hash_(h), grp_(grp) {
    if (cfg.cycles == 0 || cfg.cycles > wire::kMaxCycleField)
        throw std::invalid_argument("cycle count must be 1.." +
                                    std::to_string(wire::kMaxCycleField) +
                                    " to fit the wire cycle field");
    if (num_nodes == 0 || num_nodes > 60000)
        throw std::invalid_argument("node count must be 1..60000");

    Rng chain_rng(seed, "chains");
    crypto::SymmetricKey ds_seed{}, auth_seed{};
    chain_rng.fill(ds_seed.data(), ds_seed.size());
    chain_rng.fill(auth_seed.data(), auth_seed.size());
    ds_chain_ = crypto::generate_chain(h, ds_seed, cfg.cycles);

    Rng sched_rng(seed, "schedule");
    schedule_ = CycleSchedule::make(cfg.schedule, cfg.cycles, sched_rng);

    Rng key_rng(seed, "keys");
    keypairs_.reserve(num_nodes);
    for (uint32_t x = 0; x < num_nodes; ++x)
        keypairs_.push_back(crypto::generate_keypair(grp, key_rng));

    const uint32_t L = cfg.cycles;
    if (cfg.variant == Variant::bba) {
        const uint32_t k = cfg.bloom_k ? cfg.bloom_k : bloom::optimal_k(cfg.bloom_m, L);
        Rng bloom_rng(seed, "bloom");
        filter_ = std::make_shared<bloom::Filter>(h, cfg.bloom_m, k, bloom_rng.next());
        for (uint32_t i = 1; i <= L; ++i) {
            wire::KeyCycleDelta body{ds_chain_.at(i), i, schedule_.delta(i)};
            filter_->insert(wire::encode_key_cycle_delta(body));
        }
    } else {
        auth_chain_ = crypto::generate_chain(h, auth_seed, L);
        part1_ct_.resize(L);
        for (uint32_t i = 1; i <= L; ++i) {
            wire::KeyCycleDelta body{ds_chain_.at(i), i, schedule_.delta(i)};
            part1_ct_[i - 1] =
                crypto::encrypt(h, auth_chain_.at(i), wire::encode_key_cycle_delta(body));
        }
        if (cfg.variant == Variant::iba) {
            carried_.resize(L);
            for (uint32_t i = 1; i <= L; ++i) {
                if (i < L) {
                    auto d = h.digest(part1_ct_[i].data(), part1_ct_[i].size());
                    carried_[i - 1] = d;
                } else {
                    carried_[i - 1] = crypto::Digest{}; // terminator, all zero
                }
            }
            mu0_ = h.digest(part1_ct_[0].data(), part1_ct_[0].size());
        }
    }
}

NodeBundle BaseStation::bundle_for(uint16_t node_id) const {
    if (node_id >= num_nodes_) throw std::out_of_range("no such node");
    NodeBundle b;
    b.id = node_id;
    b.keys = keypairs_[node_id];
    b.sigs.reserve(cfg_.cycles);
    for (uint32_t i = 1; i <= cfg_.cycles; ++i)
        b.sigs.push_back(crypto::mac(hash_, ds_chain_.at(i), b.keys.pub.data(),
                                     b.keys.pub.size()));
    if (cfg_.variant == Variant::bba) {
        b.ds_anchor = ds_chain_.anchor;
        b.filter = filter_;
    } else {
        b.auth_anchor = auth_chain_.anchor;
        if (cfg_.variant == Variant::iba) b.mu0 = mu0_;
    }
    b.t0 = cfg_.schedule.t0;
    return b;
}

const crypto::GroupElement& BaseStation::public_of(uint16_t node_id) const {
    if (node_id >= num_nodes_) throw std::out_of_range("no such node");
    return keypairs_[node_id].pub;
}

crypto::SymmetricKey BaseStation::expected_pairwise(uint16_t a, uint16_t b,
                                                    uint32_t cycle) const {
    if (a >= num_nodes_ || b >= num_nodes_) throw std::out_of_range("no such node");
    auto shared = grp_.pow(keypairs_[b].pub, keypairs_[a].priv);
    return crypto::derive_pairwise(hash_, shared, cycle);
}

std::vector<BsEmission> BaseStation::emit_cycle(uint32_t i) {
    if (i != next_emit_) throw std::logic_error("cycles must be emitted in order");
    if (i > cfg_.cycles) throw std::out_of_range("past the last cycle");
    next_emit_++;
    const double T = schedule_.bs_time(i);
    std::vector<BsEmission> out;
    switch (cfg_.variant) {
    case Variant::basic: {
        out.push_back({T, wire::MsgKind::bcast_basic, part1_ct_[i - 1]});
        wire::Disclosure d{auth_chain_.at(i), i};
        out.push_back({T + cfg_.disclosure_delay_s, wire::MsgKind::disclosure,
                       wire::encode_disclosure(d)});
        break;
    }
    case Variant::iba: {
        wire::MuCycle mc{carried_[i - 1], i};
        Bytes part2 = crypto::encrypt(hash_, auth_chain_.at(i), wire::encode_mu_cycle(mc));
        wire::TwoPart tp{part1_ct_[i - 1], part2};
        out.push_back({T, wire::MsgKind::bcast_iba, wire::encode_two_part(tp)});
        wire::Disclosure d{auth_chain_.at(i), i};
        out.push_back({T + cfg_.disclosure_delay_s, wire::MsgKind::disclosure,
                       wire::encode_disclosure(d)});
        break;
    }
    case Variant::bba: {
        wire::KeyCycleDelta body{ds_chain_.at(i), i, schedule_.delta(i)};
        out.push_back({T, wire::MsgKind::bcast_bba, wire::encode_key_cycle_delta(body)});
        break;
    }
    }
    return out;
}

// ---- node ----

namespace {
size_t cipher_blocks(size_t n) { return (n + crypto::kCipherBlock - 1) / crypto::kCipherBlock; }
} // namespace

Node::Node(NodeBundle bundle, const ProtocolConfig& cfg, const crypto::HashFunction& h,
           const crypto::DhGroup& grp)
    : bundle_(std::move(bundle)), cfg_(cfg), hash_(h), grp_(grp) {
    if (cfg_.variant == Variant::bba) {
        if (!bundle_.filter) throw std::invalid_argument("bba node needs the preloaded filter");
        ds_anchor_key_ = bundle_.ds_anchor;
    } else {
        auth_anchor_key_ = bundle_.auth_anchor;
        if (cfg_.variant == Variant::iba) expected_mu_ = bundle_.mu0;
    }
    last_rx_time_ = bundle_.t0;
}

bool Node::send_ticket() {
    if (done_ || current_cycle_ > bundle_.sigs.size()) return false;
    wire::Ticket t;
    t.node_id = bundle_.id;
    t.cycle = current_cycle_;
    t.pub = bundle_.keys.pub;
    t.sig = bundle_.sigs[current_cycle_ - 1];
    env_->send(wire::MsgKind::ticket, wire::encode_ticket(t), 0.0);
    return true;
}

Result Node::on_ticket(const Bytes& payload) {
    if (done_) return reject(Reject::late);
    auto t = wire::decode_ticket(payload);
    if (!t) return reject(Reject::bogus);
    if (t->cycle != current_cycle_) return reject(Reject::wrong_cycle);
    if (cfg_.ticket_window && bcast_received_) return reject(Reject::late);
    if (t->node_id == bundle_.id) return reject(Reject::duplicate);
    if (ticket_seen_.count({t->node_id, t->cycle})) return reject(Reject::duplicate);
    if (memory_used_ + wire::kTicketBytes > cfg_.node_memory_bytes)
        return reject(Reject::memory);
    memory_used_ += wire::kTicketBytes;
    ticket_seen_.insert({t->node_id, t->cycle});
    tickets_.push_back({*t, env_->now()});
    counters_.accepted_tickets++;
    return Result::pass();
}

Result Node::on_broadcast(const Bytes& payload) {
    switch (cfg_.variant) {
    case Variant::basic: return on_broadcast_basic(payload);
    case Variant::iba: return on_broadcast_iba(payload);
    case Variant::bba: return on_broadcast_bba(payload);
    }
    return reject(Reject::bogus);
}

Result Node::on_broadcast_iba(const Bytes& payload) {
    if (done_) return reject(Reject::late);
    auto tp = wire::decode_two_part(payload);
    if (!tp) return reject(Reject::bogus);
    if (bcast_received_) return reject(Reject::duplicate);
    // the carried hash settles authenticity before anything is stored
    env_->charge(energy::Op::hash, 1);
    auto d = hash_.digest(tp->part1.data(), tp->part1.size());
    if (d != expected_mu_) return reject(Reject::bogus);
    const size_t need = tp->part1.size() + tp->part2.size();
    if (memory_used_ + need > cfg_.node_memory_bytes) return reject(Reject::memory);
    memory_used_ += need;
    pending_ = std::move(*tp);
    bcast_arrival_ = env_->now();
    bcast_received_ = true;
    counters_.accepted_broadcasts++;
    return Result::pass();
}

Result Node::on_broadcast_basic(const Bytes& payload) {
    if (done_) return reject(Reject::late);
    if (payload.size() != wire::kKeyBroadcastBytes) return reject(Reject::bogus);
    for (const auto& c : candidates_)
        if (c.ct == payload) return reject(Reject::duplicate);
    if (memory_used_ + payload.size() > cfg_.node_memory_bytes)
        return reject(Reject::memory);
    memory_used_ += payload.size();
    candidates_.push_back({payload, env_->now()});
    counters_.accepted_broadcasts++;
    return Result::pass();
}

Result Node::on_broadcast_bba(const Bytes& payload) {
    if (done_) return reject(Reject::late);
    auto kcd = wire::decode_key_cycle_delta(payload);
    if (!kcd) return reject(Reject::bogus);
    const double arrival = env_->now();
    env_->charge(energy::Op::bloom_query, 1);
    if (!bundle_.filter->query(payload)) return reject(Reject::bogus);
    const int64_t gap = int64_t(kcd->cycle) - ds_anchor_idx_;
    if (gap <= 0) return reject(Reject::replay);
    if (gap > cfg_.gap_limit()) return reject(Reject::inauthentic);
    env_->charge(energy::Op::hash, double(gap));
    if (!crypto::verify_chain_element(hash_, kcd->key, ds_anchor_key_, uint32_t(gap)))
        return reject(Reject::inauthentic);
    // inter arrival timing is only meaningful between consecutive cycles; a
    // failed timing check discards the message but leaves the anchor alone
    if (gap == 1 && last_rx_cycle_ + 1 == kcd->cycle) {
        const double dt = arrival - last_rx_time_;
        if (std::fabs(dt - kcd->delta_s) > cfg_.clock_tolerance_s)
            return reject(Reject::replay);
    }
    ds_anchor_key_ = kcd->key;
    ds_anchor_idx_ = kcd->cycle;
    if (kcd->cycle > current_cycle_) {
        counters_.stale_tickets += tickets_.size();
        tickets_.clear();
        ticket_seen_.clear();
        memory_used_ = 0;
        env_->trace("resync", "jumped to cycle " + std::to_string(kcd->cycle));
        current_cycle_ = kcd->cycle;
    }
    last_rx_cycle_ = kcd->cycle;
    last_rx_time_ = arrival;
    bcast_arrival_ = arrival;
    bcast_received_ = true;
    counters_.accepted_broadcasts++;
    const double close = cfg_.ticket_window ? arrival - cfg_.disclosure_delay_s
                                            : std::numeric_limits<double>::infinity();
    verify_tickets_and_pair(kcd->key, kcd->cycle, close);
    complete_cycle(kcd->cycle, true);
    return Result::pass();
}

Result Node::on_disclosure(const Bytes& payload) {
    if (cfg_.variant == Variant::bba) return reject(Reject::bogus);
    if (done_) return reject(Reject::late);
    auto d = wire::decode_disclosure(payload);
    if (!d) return reject(Reject::bogus);

    if (cfg_.variant == Variant::iba) {
        // the carried hash pins the whole exchange to one cycle, so a
        // disclosure for any other cycle is unusable here
        if (d->cycle != current_cycle_) return reject(Reject::wrong_cycle);
        const int64_t gap = int64_t(d->cycle) - auth_anchor_idx_;
        if (gap <= 0) return reject(Reject::replay);
        if (gap > cfg_.gap_limit()) return reject(Reject::inauthentic);
        env_->charge(energy::Op::hash, double(gap));
        if (!crypto::verify_chain_element(hash_, d->key, auth_anchor_key_, uint32_t(gap)))
            return reject(Reject::inauthentic);
        const bool fresh_applicable = gap == 1 && last_rx_cycle_ + 1 == d->cycle;
        auth_anchor_key_ = d->key;
        auth_anchor_idx_ = d->cycle;
        counters_.accepted_disclosures++;
        if (!pending_) {
            complete_cycle(d->cycle, false);
            return Result::pass();
        }
        env_->charge(energy::Op::decrypt_block, double(cipher_blocks(pending_->part1.size())));
        Bytes p1 = crypto::decrypt(hash_, d->key, pending_->part1);
        auto kcd = wire::decode_key_cycle_delta(p1);
        if (!kcd || kcd->cycle != d->cycle) {
            counters_.rejects[size_t(Reject::integrity)]++;
            complete_cycle(d->cycle, false);
            return Result::pass();
        }
        if (fresh_applicable &&
            std::fabs((bcast_arrival_ - last_rx_time_) - kcd->delta_s) >
                cfg_.clock_tolerance_s) {
            counters_.rejects[size_t(Reject::replay)]++;
            complete_cycle(d->cycle, false);
            return Result::pass();
        }
        env_->charge(energy::Op::decrypt_block, double(cipher_blocks(pending_->part2.size())));
        Bytes p2 = crypto::decrypt(hash_, d->key, pending_->part2);
        auto mc = wire::decode_mu_cycle(p2);
        if (!mc || mc->cycle != d->cycle) {
            counters_.rejects[size_t(Reject::integrity)]++;
            complete_cycle(d->cycle, false);
            return Result::pass();
        }
        expected_mu_ = mc->mu;
        last_rx_cycle_ = d->cycle;
        last_rx_time_ = bcast_arrival_;
        const double close = cfg_.ticket_window
                                 ? bcast_arrival_ - cfg_.disclosure_delay_s
                                 : std::numeric_limits<double>::infinity();
        verify_tickets_and_pair(kcd->key, d->cycle, close);
        complete_cycle(d->cycle, true);
        return Result::pass();
    }

    // basic: any buffered ciphertext may turn out to be the real broadcast
    if (d->cycle < current_cycle_) return reject(Reject::wrong_cycle);
    const int64_t gap = int64_t(d->cycle) - auth_anchor_idx_;
    if (gap <= 0) return reject(Reject::replay);
    if (gap > cfg_.gap_limit()) return reject(Reject::inauthentic);
    env_->charge(energy::Op::hash, double(gap));
    if (!crypto::verify_chain_element(hash_, d->key, auth_anchor_key_, uint32_t(gap)))
        return reject(Reject::inauthentic);
    const bool fresh_applicable = gap == 1 && last_rx_cycle_ + 1 == d->cycle;
    auth_anchor_key_ = d->key;
    auth_anchor_idx_ = d->cycle;
    counters_.accepted_disclosures++;
    const double disclosure_arrival = env_->now();
    bool won = false;
    double won_arrival = 0.0;
    crypto::SymmetricKey kds{};
    for (const auto& c : candidates_) {
        if (won) break;
        env_->charge(energy::Op::decrypt_block, double(cipher_blocks(c.ct.size())));
        Bytes plain = crypto::decrypt(hash_, d->key, c.ct);
        auto kcd = wire::decode_key_cycle_delta(plain);
        if (!kcd || kcd->cycle != d->cycle) {
            counters_.rejects[size_t(Reject::integrity)]++;
            continue;
        }
        if (fresh_applicable &&
            std::fabs((c.arrival - last_rx_time_) - kcd->delta_s) > cfg_.clock_tolerance_s) {
            counters_.rejects[size_t(Reject::replay)]++;
            continue;
        }
        won = true;
        won_arrival = c.arrival;
        kds = kcd->key;
    }
    if (!won) {
        complete_cycle(d->cycle, false);
        return Result::pass();
    }
    last_rx_cycle_ = d->cycle;
    last_rx_time_ = won_arrival;
    const double close = cfg_.ticket_window ? disclosure_arrival - cfg_.disclosure_delay_s
                                            : std::numeric_limits<double>::infinity();
    verify_tickets_and_pair(kds, d->cycle, close);
    complete_cycle(d->cycle, true);
    return Result::pass();
}

void Node::verify_tickets_and_pair(const crypto::SymmetricKey& kds, uint32_t cycle,
                                   double window_close) {
    for (const auto& bt : tickets_) {
        if (bt.ticket.cycle != cycle) {
            counters_.stale_tickets++;
            continue;
        }
        if (bt.arrival > window_close) {
            counters_.rejects[size_t(Reject::late)]++;
            continue;
        }
        if (auth_used_ >= cfg_.gamma) {
            counters_.gamma_skipped++;
            continue;
        }
        auth_used_++;
        counters_.auth_attempts++;
        env_->charge(energy::Op::mac, 1);
        auto expect = crypto::mac(hash_, kds, bt.ticket.pub.data(), bt.ticket.pub.size());
        if (!crypto::tag_equal(expect, bt.ticket.sig)) {
            counters_.rejects[size_t(Reject::inauthentic)]++;
            continue;
        }
        counters_.verified_tickets++;
        env_->charge(energy::Op::key_agree, 1);
        if (!grp_.valid_element(bt.ticket.pub)) {
            counters_.rejects[size_t(Reject::inauthentic)]++;
            continue;
        }
        auto shared = grp_.pow(bt.ticket.pub, bundle_.keys.priv);
        env_->charge(energy::Op::hash, 1);
        Pairing p;
        p.key = crypto::derive_pairwise(hash_, shared, cycle);
        p.cycle = cycle;
        p.initiator = bundle_.id < bt.ticket.node_id;
        pairings_[bt.ticket.node_id] = p;
        if (p.initiator) {
            env_->charge(energy::Op::hash, 1);
            wire::Ack a{bundle_.id, cycle, crypto::ack_tag(hash_, p.key, 0)};
            env_->send(wire::MsgKind::ack, wire::encode_ack(a), cfg_.ack_delay_s);
            counters_.acks_sent++;
        }
    }
}

Result Node::on_ack(const Bytes& payload) {
    // acks for the final cycle may land after the node has run out of cycles,
    // so this path stays open when done_
    auto a = wire::decode_ack(payload);
    if (!a) return reject(Reject::bogus);
    auto it = pairings_.find(a->sender);
    if (it == pairings_.end()) return reject(Reject::inauthentic);
    Pairing& p = it->second;
    if (a->cycle != p.cycle) return reject(Reject::wrong_cycle);
    const uint32_t offset = p.initiator ? 1 : 0;
    env_->charge(energy::Op::hash, 1);
    auto expect = crypto::ack_tag(hash_, p.key, offset);
    if (!crypto::tag_equal(expect, a->tag)) return reject(Reject::inauthentic);
    counters_.accepted_acks++;
    if (!p.confirmed) {
        p.confirmed = true;
        if (!p.initiator && !p.replied) {
            p.replied = true;
            env_->charge(energy::Op::hash, 1);
            wire::Ack reply{bundle_.id, p.cycle, crypto::ack_tag(hash_, p.key, 1)};
            env_->send(wire::MsgKind::ack, wire::encode_ack(reply), cfg_.ack_delay_s);
            counters_.acks_sent++;
        }
    }
    return Result::pass();
}

void Node::complete_cycle(uint32_t finished_cycle, bool success) {
    tickets_.clear();
    ticket_seen_.clear();
    pending_.reset();
    candidates_.clear();
    memory_used_ = 0;
    auth_used_ = 0;
    bcast_received_ = false;
    if (success)
        counters_.cycles_completed++;
    else
        counters_.cycles_failed++;
    current_cycle_ = finished_cycle + 1;
    if (current_cycle_ > cfg_.cycles) {
        done_ = true;
    } else {
        env_->cycle_advanced(current_cycle_);
    }
}

} // namespace wsnkms::protocol
