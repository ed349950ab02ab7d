#pragma once
// Broadcast authenticated pairwise key establishment. A powered base station
// walks two reverse hash chains (an encryption chain and a signature chain)
// and emits one authenticated key broadcast per cycle; battery nodes verify
// tickets from their neighbours against the per cycle signature key and run
// a discrete log agreement with every peer that checks out.
//
// Three variants share the machinery and differ in how a node decides that
// a broadcast is genuine:
//   basic  buffer blindly, verify when the chain key is disclosed t seconds
//          later (vulnerable to buffer/battery flooding by design)
//   iba    a hash carried in the previous cycle pre-authenticates the next
//          broadcast immediately; junk is dropped before it costs memory
//   bba    the broadcast travels in plaintext and is checked on the spot
//          against a preloaded bloom filter of all future payloads
//
// Nodes run as passive state machines: the host (simulator or test harness)
// owns time, radio and energy metering through the NodeEnv callback.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "wsnkms/bloom.hpp"
#include "wsnkms/bytes.hpp"
#include "wsnkms/crypto.hpp"
#include "wsnkms/energy.hpp"
#include "wsnkms/schedule.hpp"
#include "wsnkms/wire.hpp"

namespace wsnkms::protocol {

enum class Variant : uint8_t { basic = 0, iba, bba };
const char* variant_name(Variant v);
std::optional<Variant> variant_from_name(std::string_view name);

enum class Reject : uint8_t {
    none = 0,
    bogus,       // malformed or failed an immediate authenticity check
    late,        // ticket window closed or node out of cycles
    memory,      // buffer budget exhausted
    duplicate,   // (sender, cycle) or payload already held
    wrong_cycle, // message for a cycle the node is not in
    inauthentic, // chain or signature verification failed
    integrity,   // decrypted structure inconsistent (wrong key or cut+paste)
    replay,      // stale chain index or failed freshness timing
};
constexpr size_t kRejectCount = 9;
const char* reject_name(Reject r);

struct Result {
    bool ok = false;
    Reject reason = Reject::none;
    static Result pass() { return {true, Reject::none}; }
    static Result fail(Reject r) { return {false, r}; }
};

struct ProtocolConfig {
    Variant variant = Variant::iba;
    uint32_t cycles = 4; // L, at most 1024
    uint32_t gamma = 8;  // ticket verifications allowed per cycle
    double disclosure_delay_s = 2.0;
    double clock_tolerance_s = 0.5;
    size_t node_memory_bytes = 4096;
    bool ticket_window = true; // reject tickets near or after the broadcast
    uint32_t chain_gap_limit = 0; // 0 means cycles + 1 (anchor sits at index -1)
    double ack_delay_s = 0.05;
    ScheduleConfig schedule;
    uint64_t bloom_m = uint64_t(1) << 15;
    uint32_t bloom_k = 0; // 0 picks optimal_k(bloom_m, cycles)

    uint32_t gap_limit() const { return chain_gap_limit ? chain_gap_limit : cycles + 1; }
};

// Host side of a node: simulation time, radio and the energy meter.
class NodeEnv {
  public:
    virtual ~NodeEnv() = default;
    virtual double now() const = 0;
    virtual void send(wire::MsgKind kind, const Bytes& payload, double delay) = 0;
    virtual void charge(energy::Op op, double qty) = 0;
    virtual void cycle_advanced(uint32_t new_cycle) { (void)new_cycle; }
    virtual void trace(const char* event, const std::string& detail) {
        (void)event;
        (void)detail;
    }
};

// Everything a node carries out of the factory.
struct NodeBundle {
    uint16_t id = 0;
    crypto::KeyPair keys;
    std::vector<crypto::MacTag> sigs; // sigs[i-1] authenticates pub in cycle i
    crypto::SymmetricKey auth_anchor{}; // basic/iba
    crypto::SymmetricKey ds_anchor{};   // bba
    crypto::Digest mu0{};               // iba
    std::shared_ptr<const bloom::Filter> filter; // bba
    double t0 = 0.0; // deployment reference time (cycle 0 anchor)
};

struct BsEmission {
    double time = 0.0;
    wire::MsgKind kind;
    Bytes payload;
};

class BaseStation {
  public:
    BaseStation(const ProtocolConfig& cfg, uint32_t num_nodes, uint64_t seed,
                const crypto::HashFunction& h, const crypto::DhGroup& grp);

    NodeBundle bundle_for(uint16_t node_id) const;
    // emissions of cycle i; must be called in order i = 1, 2, ...
    std::vector<BsEmission> emit_cycle(uint32_t i);
    const CycleSchedule& schedule() const { return schedule_; }
    const ProtocolConfig& config() const { return cfg_; }
    uint32_t num_nodes() const { return num_nodes_; }
    const crypto::GroupElement& public_of(uint16_t node_id) const;
    // what the pairwise key between two registered nodes ought to be; used by
    // audits that hunt for pairings talked into existence by an outsider
    crypto::SymmetricKey expected_pairwise(uint16_t a, uint16_t b, uint32_t cycle) const;

  private:
    ProtocolConfig cfg_;
    uint32_t num_nodes_;
    const crypto::HashFunction& hash_;
    const crypto::DhGroup& grp_;
    CycleSchedule schedule_;
    crypto::HashChain ds_chain_;
    crypto::HashChain auth_chain_; // unused for bba
    std::vector<crypto::KeyPair> keypairs_;
    std::vector<Bytes> part1_ct_;   // basic/iba, [i-1] for cycle i
    std::vector<crypto::Digest> carried_; // iba, carried_[i-1] rides in cycle i
    crypto::Digest mu0_{};
    std::shared_ptr<bloom::Filter> filter_;
    uint32_t next_emit_ = 1;
};

struct Pairing {
    crypto::SymmetricKey key{};
    uint32_t cycle = 0;
    bool confirmed = false;
    bool initiator = false;
    bool replied = false;
};

struct NodeCounters {
    std::array<uint64_t, kRejectCount> rejects{};
    uint64_t accepted_tickets = 0;
    uint64_t accepted_broadcasts = 0;
    uint64_t accepted_disclosures = 0;
    uint64_t accepted_acks = 0;
    uint64_t verified_tickets = 0; // signature checks that passed
    uint64_t auth_attempts = 0;    // tickets that reached the signature check
    uint64_t gamma_skipped = 0;    // eligible tickets dropped by the work cap
    uint64_t stale_tickets = 0;    // discarded on resync
    uint64_t cycles_completed = 0;
    uint64_t cycles_failed = 0;
    uint64_t acks_sent = 0;
    uint64_t reject_count(Reject r) const { return rejects[size_t(r)]; }
};

class Node {
  public:
    Node(NodeBundle bundle, const ProtocolConfig& cfg, const crypto::HashFunction& h,
         const crypto::DhGroup& grp);
    void attach(NodeEnv* env) { env_ = env; }

    uint16_t id() const { return bundle_.id; }
    uint32_t current_cycle() const { return current_cycle_; }
    bool done() const { return done_; }
    size_t memory_used() const { return memory_used_; }
    const NodeCounters& counters() const { return counters_; }
    const std::map<uint16_t, Pairing>& pairings() const { return pairings_; }
    const crypto::GroupElement& public_part() const { return bundle_.keys.pub; }

    // false once the per cycle signatures are exhausted
    bool send_ticket();

    Result on_ticket(const Bytes& payload);
    Result on_broadcast(const Bytes& payload);
    Result on_disclosure(const Bytes& payload);
    Result on_ack(const Bytes& payload);

  private:
    struct BufferedTicket {
        wire::Ticket ticket;
        double arrival;
    };
    struct Candidate {
        Bytes ct;
        double arrival;
    };

    Result on_broadcast_iba(const Bytes& payload);
    Result on_broadcast_basic(const Bytes& payload);
    Result on_broadcast_bba(const Bytes& payload);
    void verify_tickets_and_pair(const crypto::SymmetricKey& kds, uint32_t cycle,
                                 double window_close);
    void complete_cycle(uint32_t finished_cycle, bool success);
    Result reject(Reject r) {
        counters_.rejects[size_t(r)]++;
        return Result::fail(r);
    }

    NodeBundle bundle_;
    ProtocolConfig cfg_;
    const crypto::HashFunction& hash_;
    const crypto::DhGroup& grp_;
    NodeEnv* env_ = nullptr;

    uint32_t current_cycle_ = 1;
    bool done_ = false;
    crypto::SymmetricKey auth_anchor_key_{};
    int64_t auth_anchor_idx_ = -1;
    crypto::SymmetricKey ds_anchor_key_{};
    int64_t ds_anchor_idx_ = -1;
    crypto::Digest expected_mu_{};
    uint32_t last_rx_cycle_ = 0;
    double last_rx_time_ = 0.0;

    bool bcast_received_ = false;
    double bcast_arrival_ = 0.0;
    std::optional<wire::TwoPart> pending_; // iba
    std::vector<Candidate> candidates_;    // basic
    std::vector<BufferedTicket> tickets_;
    std::set<std::pair<uint16_t, uint32_t>> ticket_seen_;
    size_t memory_used_ = 0;
    uint32_t auth_used_ = 0;

    std::map<uint16_t, Pairing> pairings_;
    NodeCounters counters_;
};

} // namespace wsnkms::protocol
