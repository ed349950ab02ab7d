#pragma once
// Wire formats. All multi-bit fields are packed MSB first and buffers are
// zero padded to whole bytes; decoders reject non-zero padding. Cycle
// numbers are 1-based in APIs but travel as (cycle - 1) on the wire so the
// highest cycle still fits its 10 bit field.
//
//   ticket            id(16) | cycle(10) | pub(160) | sig(128)      -> 40 B
//   key broadcast     key(128) | cycle(10) | delta_s(14)            -> 19 B
//   two part broadcast len1(16) | part1 | len2(16) | part2
//   disclosure        key(128) | cycle(16)                          -> 18 B
//   ack               sender(16) | cycle(16) | tag(128)             -> 20 B
//
// Radio frames carry at most 32 payload bytes behind a 9 byte header
// (origin(16) | seq(32) | kind(8) | index(8) | count(8)); larger messages
// are fragmented and reassembled per (origin, seq).

#include <cstdint>
#include <optional>
#include <map>
#include <vector>

#include "wsnkms/bytes.hpp"
#include "wsnkms/crypto.hpp"

namespace wsnkms::wire {

enum class MsgKind : uint8_t {
    ticket = 1,
    bcast_basic = 2, // encrypted key broadcast, delayed verification
    bcast_iba = 3,   // two part broadcast with carried hash
    bcast_bba = 4,   // plaintext key broadcast, filter verified
    disclosure = 5,
    ack = 6,
};
const char* kind_name(MsgKind k);
bool is_bs_kind(MsgKind k); // broadcast classes nodes may forward

constexpr size_t kTicketBytes = 40;
constexpr size_t kKeyBroadcastBytes = 19;
constexpr size_t kDisclosureBytes = 18;
constexpr size_t kAckBytes = 20;
constexpr size_t kMuCycleBytes = 22;
constexpr uint32_t kMaxCycleField = 1u << 10; // cycles 1..1024 on 10 bits

struct Ticket {
    uint16_t node_id = 0;
    uint32_t cycle = 0;
    crypto::GroupElement pub{};
    crypto::MacTag sig{};
};
Bytes encode_ticket(const Ticket& t);
std::optional<Ticket> decode_ticket(const Bytes& b);

// key || cycle || delta triple: the plaintext body of the basic broadcast,
// the whole bba broadcast, and the bloom set element (identical bytes)
struct KeyCycleDelta {
    crypto::SymmetricKey key{};
    uint32_t cycle = 0;
    uint32_t delta_s = 0;
};
Bytes encode_key_cycle_delta(const KeyCycleDelta& v);
std::optional<KeyCycleDelta> decode_key_cycle_delta(const Bytes& b);

struct TwoPart {
    Bytes part1; // ciphertext of KeyCycleDelta
    Bytes part2; // ciphertext of MuCycle
};
Bytes encode_two_part(const TwoPart& v);
std::optional<TwoPart> decode_two_part(const Bytes& b);

// carried hash of the next cycle's part1 ciphertext
struct MuCycle {
    crypto::Digest mu{};
    uint32_t cycle = 0;
};
Bytes encode_mu_cycle(const MuCycle& v);
std::optional<MuCycle> decode_mu_cycle(const Bytes& b);

struct Disclosure {
    crypto::SymmetricKey key{};
    uint32_t cycle = 0;
};
Bytes encode_disclosure(const Disclosure& v);
std::optional<Disclosure> decode_disclosure(const Bytes& b);

struct Ack {
    uint16_t sender = 0;
    uint32_t cycle = 0;
    crypto::MacTag tag{};
};
Bytes encode_ack(const Ack& v);
std::optional<Ack> decode_ack(const Bytes& b);

// ---- framing ----

constexpr size_t kFrameHeaderBytes = 9;
constexpr size_t kFramePayloadMax = 32;

struct Fragment {
    uint16_t origin = 0;
    uint32_t seq = 0;
    MsgKind kind = MsgKind::ticket;
    uint8_t index = 0;
    uint8_t count = 1;
    Bytes chunk;
};

std::vector<Bytes> fragment(uint16_t origin, uint32_t seq, MsgKind kind, const Bytes& msg);
std::optional<Fragment> parse_fragment(const Bytes& frame);
// total bytes on air for a message of msg_len payload bytes
size_t wire_size(size_t msg_len);

struct Assembled {
    uint16_t origin;
    uint32_t seq;
    MsgKind kind;
    Bytes payload;
};

class Reassembler {
  public:
    // returns the whole message once every fragment of (origin, seq) arrived
    std::optional<Assembled> feed(const Fragment& f);
    void clear() { partial_.clear(); }

  private:
    struct Partial {
        std::vector<Bytes> chunks;
        size_t have = 0;
        MsgKind kind;
    };
    std::map<std::pair<uint16_t, uint32_t>, Partial> partial_;
};

} // namespace wsnkms::wire
