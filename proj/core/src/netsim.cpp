#include "wsnkms/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace wsnkms::netsim {

namespace {
constexpr uint16_t kNoSensor = 0xffff;
constexpr size_t kNoAttacker = size_t(-1);

double dist(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }
} // namespace

// ---- topology ----

Topology Topology::place_uniform(uint32_t n, double width, double height, double range,
                                 Rng& rng, Vec2 bs_pos) {
    Topology t;
    t.width = width;
    t.height = height;
    t.range = range;
    t.bs_pos = bs_pos;
    t.pos.reserve(n);
    for (uint32_t i = 0; i < n; ++i)
        t.pos.push_back({rng.uniform(0.0, width), rng.uniform(0.0, height)});
    t.rebuild_adjacency();
    return t;
}

Topology Topology::chain(uint32_t n, double spacing, double range) {
    Topology t;
    t.width = spacing * (n + 1);
    t.height = 0.0;
    t.range = range;
    t.bs_pos = {0.0, 0.0};
    t.pos.reserve(n);
    for (uint32_t i = 0; i < n; ++i) t.pos.push_back({spacing * (i + 1), 0.0});
    t.rebuild_adjacency();
    return t;
}

void Topology::rebuild_adjacency() {
    const uint32_t n = num_nodes();
    adj.assign(n, {});
    bs_adj.clear();
    for (uint32_t a = 0; a < n; ++a) {
        for (uint32_t b = a + 1; b < n; ++b) {
            if (dist(pos[a], pos[b]) <= range) {
                adj[a].push_back(uint16_t(b));
                adj[b].push_back(uint16_t(a));
            }
        }
        if (dist(pos[a], bs_pos) <= range) bs_adj.push_back(uint16_t(a));
    }
    for (auto& v : adj) std::sort(v.begin(), v.end());
}

double Topology::mean_degree() const {
    if (adj.empty()) return 0.0;
    size_t total = 0;
    for (const auto& v : adj) total += v.size();
    return double(total) / double(adj.size());
}

size_t Topology::adjacent_pair_count() const {
    size_t total = 0;
    for (const auto& v : adj) total += v.size();
    return total / 2;
}

bool Topology::adjacent(uint16_t a, uint16_t b) const {
    if (a == b || a >= adj.size()) return false;
    return std::binary_search(adj[a].begin(), adj[a].end(), b);
}

// ---- node environment ----

class Simulator::EnvImpl : public protocol::NodeEnv {
  public:
    EnvImpl(Simulator* sim, uint16_t id) : sim_(sim), id_(id) {}
    double now() const override { return sim_->now_; }
    void send(wire::MsgKind kind, const Bytes& payload, double delay) override {
        if (delay <= 0.0) {
            sim_->send_from_sensor(id_, kind, payload);
        } else {
            Bytes copy = payload;
            sim_->schedule(sim_->now_ + delay,
                           [sim = sim_, id = id_, kind, copy = std::move(copy)] {
                               sim->send_from_sensor(id, kind, copy);
                           });
        }
    }
    void charge(energy::Op op, double qty) override { sim_->ledger_.charge(id_, op, qty); }
    void cycle_advanced(uint32_t) override { sim_->schedule_ticket(id_, sim_->now_); }
    void trace(const char* event, const std::string& detail) override {
        sim_->add_trace({sim_->now_, id_, event, wire::MsgKind::ticket, id_, true,
                         protocol::Reject::none, sim_->nodes_[id_]->current_cycle(),
                         detail});
    }

  private:
    Simulator* sim_;
    uint16_t id_;
};

// ---- simulator ----

Simulator::Simulator(Topology topo, const protocol::ProtocolConfig& pc, const SimConfig& sc,
                     const energy::Calibration& cal, uint64_t seed)
    : topo_(std::move(topo)), pc_(pc), sc_(sc),
      bs_(pc_, topo_.num_nodes(), seed, hash_, grp_), rng_(seed, "sim") {
    const uint32_t n = topo_.num_nodes();
    reasm_.resize(n);
    dispatched_.resize(n);
    forwarded_.resize(n);
    peak_mem_.assign(n, 0);
    fwd_injected_.assign(n, 0);
    node_seq_.assign(n, 0);
    ledger_.reset(n, cal);
    nodes_.reserve(n);
    envs_.reserve(n);
    for (uint32_t i = 0; i < n; ++i) {
        nodes_.push_back(
            std::make_unique<protocol::Node>(bs_.bundle_for(uint16_t(i)), pc_, hash_, grp_));
        envs_.push_back(std::make_unique<EnvImpl>(this, uint16_t(i)));
        nodes_.back()->attach(envs_.back().get());
    }
    for (uint32_t c = 1; c <= pc_.cycles; ++c) {
        for (auto& em : bs_.emit_cycle(c)) {
            schedule(em.time, [this, em] {
                const uint32_t seq = bs_seq_++;
                radiate(topo_.bs_pos, kNoSensor, kNoAttacker, kBsId, seq, em.kind,
                        em.payload, sc_.bs_direct, false, sc_.bs_direct);
            });
        }
        if (sc_.snapshots) {
            const double at =
                bs_.schedule().bs_time(c) +
                (pc_.variant == protocol::Variant::bba ? 0.0 : pc_.disclosure_delay_s) +
                sc_.snapshot_margin_s;
            schedule(at, [this, c] { snapshot(c); });
        }
    }
    const double t0 = pc_.schedule.t0;
    for (uint32_t i = 0; i < n; ++i) schedule_ticket(uint16_t(i), t0);
}

Simulator::~Simulator() = default;

void Simulator::schedule(double t, std::function<void()> fn) {
    queue_.push({t, next_seq_++, std::move(fn)});
}

void Simulator::run(double until) {
    while (!queue_.empty() && queue_.top().t <= until) {
        Ev ev = queue_.top();
        queue_.pop();
        now_ = ev.t;
        last_event_time_ = ev.t;
        ev.fn();
    }
    if (std::isfinite(until) && until > now_) now_ = until;
}

void Simulator::run_all() { run(std::numeric_limits<double>::infinity()); }

uint16_t Simulator::add_attacker(Vec2 pos) {
    if (attackers_.size() >= 500) throw std::length_error("too many attackers");
    attackers_.push_back({pos, nullptr, {}});
    return uint16_t(kAttackerBase + attackers_.size() - 1);
}

void Simulator::set_attacker_handler(uint16_t attacker_id, AttackerFn fn) {
    attackers_.at(attacker_id - kAttackerBase).fn = std::move(fn);
}

void Simulator::set_promiscuous(PromiscFn fn) { promisc_ = std::move(fn); }
void Simulator::set_jam(JamFn fn) { jam_ = std::move(fn); }

void Simulator::inject(double time, uint16_t attacker_id, uint16_t spoof_origin,
                       wire::MsgKind kind, Bytes payload) {
    const size_t idx = attacker_id - kAttackerBase;
    if (idx >= attackers_.size()) throw std::out_of_range("no such attacker");
    schedule(time, [this, idx, spoof_origin, kind, payload = std::move(payload)] {
        const uint32_t seq = inj_seq_++;
        radiate(attackers_[idx].pos, kNoSensor, idx, spoof_origin, seq, kind, payload,
                false, true, false);
    });
}

void Simulator::schedule_ticket(uint16_t id, double cycle_start) {
    const double at = cycle_start + rng_.uniform(sc_.ticket_jitter_lo, sc_.ticket_jitter_hi);
    schedule(at, [this, id] {
        if (!nodes_[id]->done()) nodes_[id]->send_ticket();
    });
}

void Simulator::send_from_sensor(uint16_t id, wire::MsgKind kind, const Bytes& payload) {
    const uint32_t seq = node_seq_[id]++;
    ledger_.charge(id, energy::Op::tx_byte, double(wire::wire_size(payload.size())));
    add_trace({now_, id, "tx", kind, id, true, protocol::Reject::none,
               nodes_[id]->current_cycle(), ""});
    if (promisc_) promisc_(id, kind, payload, now_);
    radiate(topo_.pos[id], id, kNoAttacker, id, seq, kind, payload, false, false, false);
}

// one transmission: fragment, then per receiver and per fragment decide loss
// and schedule the delivery one hop of propagation later
void Simulator::radiate(Vec2 from, uint16_t skip_sensor, size_t skip_attacker,
                        uint16_t origin, uint32_t seq, wire::MsgKind kind,
                        const Bytes& payload, bool lossless, bool count_injected,
                        bool everyone) {
    const auto frames = wire::fragment(origin, seq, kind, payload);
    const double at = now_ + sc_.prop_delay_s;
    const uint32_t n = topo_.num_nodes();
    const bool lossy = !lossless && sc_.p_loss > 0.0;
    for (uint32_t s = 0; s < n; ++s) {
        if (s == skip_sensor) continue;
        if (!everyone && dist(from, topo_.pos[s]) > topo_.range) continue;
        if (count_injected) adv_.injected_copies++;
        for (const auto& f : frames) {
            if (lossy && rng_.bernoulli(sc_.p_loss)) continue;
            schedule(at, [this, s, f] { deliver_fragment(uint16_t(s), f); });
        }
    }
    for (size_t a = 0; a < attackers_.size(); ++a) {
        if (a == skip_attacker) continue;
        if (!everyone && dist(from, attackers_[a].pos) > topo_.range) continue;
        for (const auto& f : frames) {
            if (lossy && rng_.bernoulli(sc_.p_loss)) continue;
            schedule(at, [this, a, f] { deliver_to_attacker(a, f); });
        }
    }
}

void Simulator::deliver_fragment(uint16_t sensor, const Bytes& frame) {
    auto frag = wire::parse_fragment(frame);
    if (!frag) return;
    ledger_.charge(sensor, energy::Op::rx_byte, double(frame.size()));
    if (jam_ && jam_(sensor, frag->origin, frag->kind, now_)) {
        add_trace({now_, sensor, "jam", frag->kind, frag->origin, false,
                   protocol::Reject::none, nodes_[sensor]->current_cycle(), "",
                   frag->seq});
        return;
    }
    auto assembled = reasm_[sensor].feed(*frag);
    if (!assembled) return;
    const auto key = std::make_pair(assembled->origin, assembled->seq);
    if (dispatched_[sensor].count(key)) return; // stray re-reception
    dispatched_[sensor].insert(key);
    dispatch(sensor, *assembled);
}

void Simulator::deliver_to_attacker(size_t idx, const Bytes& frame) {
    auto frag = wire::parse_fragment(frame);
    if (!frag) return;
    auto assembled = attackers_[idx].reasm.feed(*frag);
    if (assembled && attackers_[idx].fn) attackers_[idx].fn(*assembled, now_);
}

void Simulator::dispatch(uint16_t sensor, const wire::Assembled& msg) {
    protocol::Node& nd = *nodes_[sensor];
    const uint32_t cycle_before = nd.current_cycle();
    protocol::Result r;
    switch (msg.kind) {
    case wire::MsgKind::ticket: r = nd.on_ticket(msg.payload); break;
    case wire::MsgKind::bcast_basic:
    case wire::MsgKind::bcast_iba:
    case wire::MsgKind::bcast_bba: r = nd.on_broadcast(msg.payload); break;
    case wire::MsgKind::disclosure: r = nd.on_disclosure(msg.payload); break;
    case wire::MsgKind::ack: r = nd.on_ack(msg.payload); break;
    }
    peak_mem_[sensor] = std::max(peak_mem_[sensor], nd.memory_used());
    if (msg.seq >= kInjectedSeqBase) {
        adv_.delivered++;
        if (r.ok)
            adv_.accepted++;
        else
            adv_.rejected++;
    }
    add_trace({now_, sensor, "rx", msg.kind, msg.origin, r.ok, r.reason, cycle_before, "",
               msg.seq});
    forward_if_needed(sensor, msg, r.ok);
}

void Simulator::forward_if_needed(uint16_t sensor, const wire::Assembled& msg,
                                  bool accepted) {
    if (sc_.bs_direct || !wire::is_bs_kind(msg.kind)) return;
    if (pc_.variant != protocol::Variant::basic && !accepted) return;
    const auto key = std::make_pair(msg.origin, msg.seq);
    if (forwarded_[sensor].count(key)) return;
    forwarded_[sensor].insert(key);
    if (msg.seq >= kInjectedSeqBase) fwd_injected_[sensor]++;
    ledger_.charge(sensor, energy::Op::tx_byte, double(wire::wire_size(msg.payload.size())));
    add_trace({now_, sensor, "fwd", msg.kind, msg.origin, true, protocol::Reject::none,
               nodes_[sensor]->current_cycle(), "", msg.seq});
    radiate(topo_.pos[sensor], sensor, kNoAttacker, msg.origin, msg.seq, msg.kind,
            msg.payload, false, false, false);
}

void Simulator::snapshot(uint32_t cycle) {
    CycleStats st;
    st.cycle = cycle;
    const uint32_t n = topo_.num_nodes();
    for (uint32_t a = 0; a < n; ++a) {
        for (uint16_t b : topo_.adj[a]) {
            if (b <= a) continue;
            st.pairs_expected++;
            const auto& pa = nodes_[a]->pairings();
            const auto& pb = nodes_[b]->pairings();
            auto ia = pa.find(b);
            auto ib = pb.find(uint16_t(a));
            const bool keyed = ia != pa.end() && ib != pb.end() &&
                               ia->second.cycle == cycle && ib->second.cycle == cycle;
            if (!keyed) continue;
            st.pairs_keyed++;
            if (ia->second.confirmed && ib->second.confirmed) st.pairs_confirmed++;
        }
    }
    st.node_energy_mj.reserve(n);
    for (uint32_t i = 0; i < n; ++i) st.node_energy_mj.push_back(ledger_.total_mj(i));
    cycle_stats_.push_back(std::move(st));
}

double Simulator::key_share_rate() const {
    uint64_t expected = 0, confirmed = 0;
    for (const auto& st : cycle_stats_) {
        expected += st.pairs_expected;
        confirmed += st.pairs_confirmed;
    }
    return expected ? double(confirmed) / double(expected) : 0.0;
}

std::vector<ForgedPairing> Simulator::forged_pairings() const {
    std::vector<ForgedPairing> out;
    const uint32_t n = topo_.num_nodes();
    for (uint32_t i = 0; i < n; ++i) {
        for (const auto& [peer, p] : nodes_[i]->pairings()) {
            if (peer >= n) {
                out.push_back({uint16_t(i), peer, p.cycle});
                continue;
            }
            if (p.key != bs_.expected_pairwise(uint16_t(i), peer, p.cycle))
                out.push_back({uint16_t(i), peer, p.cycle});
        }
    }
    return out;
}

void Simulator::add_trace(TraceRow row) {
    if (trace_.size() < sc_.trace_limit)
        trace_.push_back(std::move(row));
    else
        trace_dropped_++;
}

} // namespace wsnkms::netsim
