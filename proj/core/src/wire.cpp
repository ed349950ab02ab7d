#include "wsnkms/wire.hpp"

#include <stdexcept>

namespace wsnkms::wire {

const char* kind_name(MsgKind k) {
    switch (k) {
        case MsgKind::ticket: return "ticket";
        case MsgKind::bcast_basic: return "bcast_basic";
        case MsgKind::bcast_iba: return "bcast_iba";
        case MsgKind::bcast_bba: return "bcast_bba";
        case MsgKind::disclosure: return "disclosure";
        case MsgKind::ack: return "ack";
    }
    return "?";
}

bool is_bs_kind(MsgKind k) {
    return k == MsgKind::bcast_basic || k == MsgKind::bcast_iba || k == MsgKind::bcast_bba ||
           k == MsgKind::disclosure;
}

namespace {
bool cycle_in_range(uint32_t cycle) { return cycle >= 1 && cycle <= kMaxCycleField; }
void require_cycle(uint32_t cycle) {
    if (!cycle_in_range(cycle)) throw std::invalid_argument("cycle outside 1..1024");
}
}

Bytes encode_ticket(const Ticket& t) {
    require_cycle(t.cycle);
    BitWriter w;
    w.put(t.node_id, 16);
    w.put(t.cycle - 1, 10);
    w.put_bytes(t.pub.data(), t.pub.size());
    w.put_bytes(t.sig.data(), t.sig.size());
    return w.finish();
}

std::optional<Ticket> decode_ticket(const Bytes& b) {
    if (b.size() != kTicketBytes) return std::nullopt;
    BitReader r(b.data(), b.size());
    Ticket t;
    t.node_id = uint16_t(r.get(16));
    t.cycle = uint32_t(r.get(10)) + 1;
    r.get_bytes(t.pub.data(), t.pub.size());
    r.get_bytes(t.sig.data(), t.sig.size());
    if (!r.padding_clear()) return std::nullopt;
    return t;
}

Bytes encode_key_cycle_delta(const KeyCycleDelta& v) {
    require_cycle(v.cycle);
    if (v.delta_s < 1 || v.delta_s > 16383)
        throw std::invalid_argument("delta outside 1..16383");
    BitWriter w;
    w.put_bytes(v.key.data(), v.key.size());
    w.put(v.cycle - 1, 10);
    w.put(v.delta_s, 14);
    return w.finish();
}

std::optional<KeyCycleDelta> decode_key_cycle_delta(const Bytes& b) {
    if (b.size() != kKeyBroadcastBytes) return std::nullopt;
    BitReader r(b.data(), b.size());
    KeyCycleDelta v;
    r.get_bytes(v.key.data(), v.key.size());
    v.cycle = uint32_t(r.get(10)) + 1;
    v.delta_s = uint32_t(r.get(14));
    return v; // 152 bits exactly, no padding
}

Bytes encode_two_part(const TwoPart& v) {
    Bytes out;
    out.reserve(4 + v.part1.size() + v.part2.size());
    put_u16be(out, uint16_t(v.part1.size()));
    out.insert(out.end(), v.part1.begin(), v.part1.end());
    put_u16be(out, uint16_t(v.part2.size()));
    out.insert(out.end(), v.part2.begin(), v.part2.end());
    return out;
}

std::optional<TwoPart> decode_two_part(const Bytes& b) {
    if (b.size() < 4) return std::nullopt;
    size_t pos = 0;
    uint16_t l1 = get_u16be(b.data());
    pos = 2;
    if (pos + l1 + 2 > b.size()) return std::nullopt;
    TwoPart v;
    v.part1.assign(b.begin() + long(pos), b.begin() + long(pos + l1));
    pos += l1;
    uint16_t l2 = get_u16be(b.data() + pos);
    pos += 2;
    if (pos + l2 != b.size()) return std::nullopt;
    v.part2.assign(b.begin() + long(pos), b.begin() + long(pos + l2));
    return v;
}

Bytes encode_mu_cycle(const MuCycle& v) {
    require_cycle(v.cycle);
    BitWriter w;
    w.put_bytes(v.mu.data(), v.mu.size());
    w.put(v.cycle - 1, 10);
    return w.finish();
}

std::optional<MuCycle> decode_mu_cycle(const Bytes& b) {
    if (b.size() != kMuCycleBytes) return std::nullopt;
    BitReader r(b.data(), b.size());
    MuCycle v;
    r.get_bytes(v.mu.data(), v.mu.size());
    v.cycle = uint32_t(r.get(10)) + 1;
    if (!r.padding_clear()) return std::nullopt;
    return v;
}

Bytes encode_disclosure(const Disclosure& v) {
    require_cycle(v.cycle);
    Bytes out;
    out.reserve(kDisclosureBytes);
    out.insert(out.end(), v.key.begin(), v.key.end());
    put_u16be(out, uint16_t(v.cycle - 1));
    return out;
}

std::optional<Disclosure> decode_disclosure(const Bytes& b) {
    if (b.size() != kDisclosureBytes) return std::nullopt;
    Disclosure v;
    std::copy(b.begin(), b.begin() + long(crypto::kKeyLen), v.key.begin());
    v.cycle = uint32_t(get_u16be(b.data() + crypto::kKeyLen)) + 1;
    if (!cycle_in_range(v.cycle)) return std::nullopt;
    return v;
}

Bytes encode_ack(const Ack& v) {
    require_cycle(v.cycle);
    Bytes out;
    out.reserve(kAckBytes);
    put_u16be(out, v.sender);
    put_u16be(out, uint16_t(v.cycle - 1));
    out.insert(out.end(), v.tag.begin(), v.tag.end());
    return out;
}

std::optional<Ack> decode_ack(const Bytes& b) {
    if (b.size() != kAckBytes) return std::nullopt;
    Ack v;
    v.sender = get_u16be(b.data());
    v.cycle = uint32_t(get_u16be(b.data() + 2)) + 1;
    std::copy(b.begin() + 4, b.end(), v.tag.begin());
    if (!cycle_in_range(v.cycle)) return std::nullopt;
    return v;
}

// ---- framing ----

std::vector<Bytes> fragment(uint16_t origin, uint32_t seq, MsgKind kind, const Bytes& msg) {
    size_t count = msg.empty() ? 1 : (msg.size() + kFramePayloadMax - 1) / kFramePayloadMax;
    if (count > 255) throw std::invalid_argument("message too large to frame");
    std::vector<Bytes> frames;
    frames.reserve(count);
    for (size_t i = 0; i < count; i++) {
        size_t off = i * kFramePayloadMax;
        size_t len = std::min(kFramePayloadMax, msg.size() - off);
        Bytes f;
        f.reserve(kFrameHeaderBytes + len);
        put_u16be(f, origin);
        put_u32be(f, seq);
        f.push_back(uint8_t(kind));
        f.push_back(uint8_t(i));
        f.push_back(uint8_t(count));
        f.insert(f.end(), msg.begin() + long(off), msg.begin() + long(off + len));
        frames.push_back(std::move(f));
    }
    return frames;
}

std::optional<Fragment> parse_fragment(const Bytes& frame) {
    if (frame.size() < kFrameHeaderBytes ||
        frame.size() > kFrameHeaderBytes + kFramePayloadMax)
        return std::nullopt;
    Fragment f;
    f.origin = get_u16be(frame.data());
    f.seq = get_u32be(frame.data() + 2);
    uint8_t kind = frame[6];
    if (kind < uint8_t(MsgKind::ticket) || kind > uint8_t(MsgKind::ack)) return std::nullopt;
    f.kind = MsgKind(kind);
    f.index = frame[7];
    f.count = frame[8];
    if (f.count == 0 || f.index >= f.count) return std::nullopt;
    f.chunk.assign(frame.begin() + kFrameHeaderBytes, frame.end());
    return f;
}

size_t wire_size(size_t msg_len) {
    size_t count = msg_len == 0 ? 1 : (msg_len + kFramePayloadMax - 1) / kFramePayloadMax;
    return msg_len + count * kFrameHeaderBytes;
}

std::optional<Assembled> Reassembler::feed(const Fragment& f) {
    auto key = std::make_pair(f.origin, f.seq);
    auto& p = partial_[key];
    if (p.chunks.empty()) {
        p.chunks.resize(f.count);
        p.kind = f.kind;
    }
    if (f.count != p.chunks.size() || f.kind != p.kind) return std::nullopt; // mangled
    if (!p.chunks[f.index].empty()) return std::nullopt;                    // duplicate frame
    p.chunks[f.index] = f.chunk;
    p.have++;
    if (p.have < p.chunks.size()) return std::nullopt;
    Assembled a{f.origin, f.seq, p.kind, {}};
    for (auto& c : p.chunks) a.payload.insert(a.payload.end(), c.begin(), c.end());
    partial_.erase(key);
    return a;
}

} // namespace wsnkms::wire
