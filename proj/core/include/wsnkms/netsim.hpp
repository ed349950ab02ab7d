#pragma once
// Discrete event radio simulator. Sensors run the protocol state machines,
// the base station plays its precomputed emission schedule, and attacker
// entities can listen, inject spoofed frames and jam victims.
//
// Radio model: transmissions are fragmented to a fixed MTU and each fragment
// crosses each link independently (Bernoulli loss). Receivers pay the radio
// energy price per fragment that physically reaches them, jammed or not.
// The base station is mains powered; by default it reaches every sensor in
// one lossless hop (bs_direct). With bs_direct off it transmits like an
// ordinary radio from its position and sensors flood its traffic outward:
// the basic variant relays every base station frame it sees once, the other
// variants relay only what they accepted.
//
// Determinism: one seeded generator drives losses and jitters, and the event
// queue breaks time ties by insertion order, so a (topology, config, seed)
// triple replays exactly.

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <set>
#include <vector>

#include "wsnkms/energy.hpp"
#include "wsnkms/protocol.hpp"
#include "wsnkms/rng.hpp"
#include "wsnkms/wire.hpp"

namespace wsnkms::netsim {

constexpr uint16_t kBsId = 65534;
constexpr uint16_t kAttackerBase = 65000;
constexpr uint32_t kInjectedSeqBase = uint32_t(1) << 30;

struct Vec2 {
    double x = 0.0, y = 0.0;
};

struct Topology {
    std::vector<Vec2> pos; // sensor positions, index is node id
    Vec2 bs_pos{0.0, 0.0};
    double range = 30.0;
    double width = 0.0, height = 0.0;
    std::vector<std::vector<uint16_t>> adj;
    std::vector<uint16_t> bs_adj;

    static Topology place_uniform(uint32_t n, double width, double height, double range,
                                  Rng& rng, Vec2 bs_pos);
    // straight line away from the base station, node i at (i+1)*spacing
    static Topology chain(uint32_t n, double spacing, double range);
    void rebuild_adjacency();
    double mean_degree() const;
    size_t adjacent_pair_count() const;
    bool adjacent(uint16_t a, uint16_t b) const;
    uint32_t num_nodes() const { return uint32_t(pos.size()); }
};

struct TraceRow {
    double time = 0.0;
    uint16_t entity = 0;
    const char* event = "";
    wire::MsgKind kind = wire::MsgKind::ticket;
    uint16_t origin = 0;
    bool ok = false;
    protocol::Reject reason = protocol::Reject::none;
    uint32_t cycle = 0; // entity's cycle at the time
    std::string detail;
    uint32_t seq = 0; // frame sequence; >= kInjectedSeqBase marks injections
};

struct CycleStats {
    uint32_t cycle = 0;
    uint64_t pairs_expected = 0;
    uint64_t pairs_keyed = 0;     // both ends derived this cycle's key
    uint64_t pairs_confirmed = 0; // both ends saw a valid ack
    std::vector<double> node_energy_mj; // cumulative, per node, at snapshot
};

struct ForgedPairing {
    uint16_t node = 0;
    uint16_t peer = 0;
    uint32_t cycle = 0;
};

// assembled frames whose sequence marks them as injected
struct AdvStats {
    uint64_t injected_copies = 0; // per addressed receiver
    uint64_t delivered = 0;       // assembled at a sensor
    uint64_t accepted = 0;
    uint64_t rejected = 0;
    uint64_t lost() const { return injected_copies - delivered; }
};

struct SimConfig {
    double p_loss = 0.0;
    double prop_delay_s = 0.001; // per hop
    bool bs_direct = true;
    double ticket_jitter_lo = 0.2; // after cycle start
    double ticket_jitter_hi = 1.0;
    double snapshot_margin_s = 1.0;
    bool snapshots = true;
    size_t trace_limit = 200000;
};

using JamFn =
    std::function<bool(uint16_t victim, uint16_t origin, wire::MsgKind kind, double now)>;
using AttackerFn = std::function<void(const wire::Assembled& msg, double now)>;
using PromiscFn = std::function<void(uint16_t origin, wire::MsgKind kind,
                                     const Bytes& payload, double now)>;

class Simulator {
  public:
    Simulator(Topology topo, const protocol::ProtocolConfig& pc, const SimConfig& sc,
              const energy::Calibration& cal, uint64_t seed);
    Simulator(const Simulator&) = delete;
    Simulator& operator=(const Simulator&) = delete;
    ~Simulator();

    void run(double until); // process events with time <= until
    void run_all();
    double now() const { return now_; }
    double last_event_time() const { return last_event_time_; }
    // let scenario code run its own logic at a point in simulated time
    void at(double time, std::function<void()> fn) { schedule(time, std::move(fn)); }

    // ---- attacker surface ----
    uint16_t add_attacker(Vec2 pos);
    void set_attacker_handler(uint16_t attacker_id, AttackerFn fn);
    void set_promiscuous(PromiscFn fn); // hears every sensor transmission
    void set_jam(JamFn fn);
    void inject(double time, uint16_t attacker_id, uint16_t spoof_origin,
                wire::MsgKind kind, Bytes payload);

    // ---- results ----
    const protocol::Node& node(uint16_t id) const { return *nodes_[id]; }
    const protocol::BaseStation& bs() const { return bs_; }
    const energy::Ledger& ledger() const { return ledger_; }
    const Topology& topology() const { return topo_; }
    const std::vector<TraceRow>& trace() const { return trace_; }
    uint64_t trace_dropped() const { return trace_dropped_; }
    const std::vector<CycleStats>& cycle_stats() const { return cycle_stats_; }
    double key_share_rate() const; // confirmed fraction, averaged over cycles
    std::vector<ForgedPairing> forged_pairings() const;
    const AdvStats& adv_stats() const { return adv_; }
    size_t peak_memory(uint16_t id) const { return peak_mem_[id]; }
    uint64_t forwards_of_injected(uint16_t id) const { return fwd_injected_[id]; }

  private:
    struct Ev {
        double t;
        uint64_t seq;
        std::function<void()> fn;
    };
    struct EvCmp {
        bool operator()(const Ev& a, const Ev& b) const {
            return a.t > b.t || (a.t == b.t && a.seq > b.seq);
        }
    };
    struct Attacker {
        Vec2 pos;
        AttackerFn fn;
        wire::Reassembler reasm;
    };
    class EnvImpl;
    friend class EnvImpl;

    void schedule(double t, std::function<void()> fn);
    void schedule_ticket(uint16_t id, double cycle_start);
    void send_from_sensor(uint16_t id, wire::MsgKind kind, const Bytes& payload);
    void radiate(Vec2 from, uint16_t skip_sensor, size_t skip_attacker, uint16_t origin,
                 uint32_t seq, wire::MsgKind kind, const Bytes& payload, bool lossless,
                 bool count_injected, bool everyone);
    void deliver_fragment(uint16_t sensor, const Bytes& frame);
    void deliver_to_attacker(size_t idx, const Bytes& frame);
    void dispatch(uint16_t sensor, const wire::Assembled& msg);
    void forward_if_needed(uint16_t sensor, const wire::Assembled& msg, bool accepted);
    void snapshot(uint32_t cycle);
    void add_trace(TraceRow row);

    Topology topo_;
    protocol::ProtocolConfig pc_;
    SimConfig sc_;
    crypto::Sha1Hash hash_;
    crypto::DhGroup grp_;
    protocol::BaseStation bs_;
    std::vector<std::unique_ptr<protocol::Node>> nodes_;
    std::vector<std::unique_ptr<EnvImpl>> envs_;
    std::vector<wire::Reassembler> reasm_;
    std::vector<std::set<std::pair<uint16_t, uint32_t>>> dispatched_; // radio dedup
    std::vector<std::set<std::pair<uint16_t, uint32_t>>> forwarded_;
    std::vector<size_t> peak_mem_;
    std::vector<uint64_t> fwd_injected_;
    energy::Ledger ledger_;
    Rng rng_;
    std::priority_queue<Ev, std::vector<Ev>, EvCmp> queue_;
    uint64_t next_seq_ = 0;
    double now_ = 0.0;
    double last_event_time_ = 0.0;
    uint32_t bs_seq_ = 0;
    uint32_t inj_seq_ = kInjectedSeqBase;
    std::vector<uint32_t> node_seq_;
    std::vector<Attacker> attackers_;
    JamFn jam_;
    PromiscFn promisc_;
    std::vector<TraceRow> trace_;
    uint64_t trace_dropped_ = 0;
    std::vector<CycleStats> cycle_stats_;
    AdvStats adv_;
};

} // namespace wsnkms::netsim
