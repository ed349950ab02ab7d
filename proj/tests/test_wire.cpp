#include "doctest.h"

#include "wsnkms/rng.hpp"
#include "wsnkms/wire.hpp"

using namespace wsnkms;
using namespace wsnkms::wire;

namespace {

template <typename A> A filled(uint8_t start) {
    A a{};
    for (size_t i = 0; i < a.size(); i++) a[i] = uint8_t(start + i);
    return a;
}

} // namespace

TEST_CASE("ticket round trip and bounds") {
    Ticket t;
    t.node_id = 0xBEEF;
    t.cycle = 1024; // top of the range
    t.pub = filled<crypto::GroupElement>(0x40);
    t.sig = filled<crypto::MacTag>(0x90);
    Bytes b = encode_ticket(t);
    REQUIRE(b.size() == kTicketBytes);
    auto d = decode_ticket(b);
    REQUIRE(d.has_value());
    CHECK(d->node_id == t.node_id);
    CHECK(d->cycle == t.cycle);
    CHECK(d->pub == t.pub);
    CHECK(d->sig == t.sig);

    t.cycle = 1;
    CHECK(decode_ticket(encode_ticket(t))->cycle == 1);
    t.cycle = 0;
    CHECK_THROWS(encode_ticket(t));
    t.cycle = 1025;
    CHECK_THROWS(encode_ticket(t));

    b = encode_ticket(*d);
    b.pop_back();
    CHECK_FALSE(decode_ticket(b).has_value());
    b = encode_ticket(*d);
    b.push_back(0);
    CHECK_FALSE(decode_ticket(b).has_value());
}

TEST_CASE("key cycle delta round trip") {
    KeyCycleDelta v;
    v.key = filled<crypto::SymmetricKey>(0x01);
    v.cycle = 513;
    v.delta_s = 16383; // 14 bit ceiling
    Bytes b = encode_key_cycle_delta(v);
    REQUIRE(b.size() == kKeyBroadcastBytes);
    auto d = decode_key_cycle_delta(b);
    REQUIRE(d.has_value());
    CHECK(d->key == v.key);
    CHECK(d->cycle == v.cycle);
    CHECK(d->delta_s == v.delta_s);

    v.delta_s = 16384;
    CHECK_THROWS(encode_key_cycle_delta(v));
    v.delta_s = 0;
    CHECK_THROWS(encode_key_cycle_delta(v));
}

TEST_CASE("two part carries both ciphertexts") {
    TwoPart tp;
    tp.part1 = Bytes(19, 0xAA);
    tp.part2 = Bytes(22, 0xBB);
    Bytes b = encode_two_part(tp);
    auto d = decode_two_part(b);
    REQUIRE(d.has_value());
    CHECK(d->part1 == tp.part1);
    CHECK(d->part2 == tp.part2);
    b.pop_back();
    CHECK_FALSE(decode_two_part(b).has_value());
    CHECK_FALSE(decode_two_part(Bytes{0x00}).has_value());
}

TEST_CASE("mu cycle, disclosure, ack round trips") {
    MuCycle mc;
    mc.mu = filled<crypto::Digest>(0x10);
    mc.cycle = 77;
    auto b = encode_mu_cycle(mc);
    REQUIRE(b.size() == kMuCycleBytes);
    auto md = decode_mu_cycle(b);
    REQUIRE(md.has_value());
    CHECK(md->mu == mc.mu);
    CHECK(md->cycle == mc.cycle);

    Disclosure dis;
    dis.key = filled<crypto::SymmetricKey>(0x21);
    dis.cycle = 300;
    auto db = encode_disclosure(dis);
    REQUIRE(db.size() == kDisclosureBytes);
    auto dd = decode_disclosure(db);
    REQUIRE(dd.has_value());
    CHECK(dd->key == dis.key);
    CHECK(dd->cycle == dis.cycle);

    Ack ack;
    ack.sender = 7;
    ack.cycle = 3;
    ack.tag = filled<crypto::MacTag>(0x55);
    auto ab = encode_ack(ack);
    REQUIRE(ab.size() == kAckBytes);
    auto ad = decode_ack(ab);
    REQUIRE(ad.has_value());
    CHECK(ad->sender == ack.sender);
    CHECK(ad->cycle == ack.cycle);
    CHECK(ad->tag == ack.tag);
}

TEST_CASE("fragmentation sizes and totals") {
    Rng rng(31, "frag");
    for (size_t len : {1u, 19u, 32u, 33u, 40u, 45u, 64u, 100u}) {
        Bytes msg(len);
        rng.fill(msg.data(), msg.size());
        auto frames = fragment(0x1234, 99, MsgKind::ticket, msg);
        size_t expect_frames = (len + kFramePayloadMax - 1) / kFramePayloadMax;
        REQUIRE(frames.size() == expect_frames);
        size_t total = 0;
        for (const auto& f : frames) {
            CHECK(f.size() <= kFrameHeaderBytes + kFramePayloadMax);
            total += f.size();
        }
        CHECK(total == wire_size(len));
        CHECK(total == len + expect_frames * kFrameHeaderBytes);
    }
    CHECK(wire_size(19) == 28);
    CHECK(wire_size(40) == 58);
    CHECK(wire_size(45) == 63);
    CHECK(wire_size(18) == 27);
    CHECK(wire_size(20) == 29);
}

TEST_CASE("reassembly in and out of order") {
    Rng rng(37, "reasm");
    Bytes msg(77);
    rng.fill(msg.data(), msg.size());
    auto frames = fragment(5, 11, MsgKind::bcast_iba, msg);
    REQUIRE(frames.size() == 3);

    Reassembler r;
    SUBCASE("in order") {
        for (size_t i = 0; i + 1 < frames.size(); i++) {
            auto f = parse_fragment(frames[i]);
            REQUIRE(f.has_value());
            CHECK_FALSE(r.feed(*f).has_value());
        }
        auto got = r.feed(*parse_fragment(frames.back()));
        REQUIRE(got.has_value());
        CHECK(got->origin == 5);
        CHECK(got->seq == 11);
        CHECK(got->kind == MsgKind::bcast_iba);
        CHECK(got->payload == msg);
    }
    SUBCASE("reversed, interleaved with another origin") {
        Bytes other(40, 0xEE);
        auto frames2 = fragment(6, 11, MsgKind::ticket, other);
        CHECK_FALSE(r.feed(*parse_fragment(frames[2])).has_value());
        CHECK_FALSE(r.feed(*parse_fragment(frames2[0])).has_value());
        CHECK_FALSE(r.feed(*parse_fragment(frames[1])).has_value());
        auto done2 = r.feed(*parse_fragment(frames2[1]));
        REQUIRE(done2.has_value());
        CHECK(done2->payload == other);
        auto done1 = r.feed(*parse_fragment(frames[0]));
        REQUIRE(done1.has_value());
        CHECK(done1->payload == msg);
    }
    SUBCASE("duplicate fragment does not complete early") {
        CHECK_FALSE(r.feed(*parse_fragment(frames[0])).has_value());
        CHECK_FALSE(r.feed(*parse_fragment(frames[0])).has_value());
        CHECK_FALSE(r.feed(*parse_fragment(frames[1])).has_value());
        CHECK(r.feed(*parse_fragment(frames[2])).has_value());
    }

    CHECK_FALSE(parse_fragment(Bytes(3, 0)).has_value());
}
