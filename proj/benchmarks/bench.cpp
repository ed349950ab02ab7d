// Microbenchmarks for the hot paths: hashing, signatures, the length
// preserving cipher, group exponentiation, filter probes, and one full
// honest cycle end to end through the simulator.

#include <benchmark/benchmark.h>

#include "wsnkms/analysis.hpp"
#include "wsnkms/bloom.hpp"
#include "wsnkms/crypto.hpp"
#include "wsnkms/netsim.hpp"

using namespace wsnkms;

namespace {

const crypto::Sha1Hash g_sha1;
const crypto::HashFunction& g_hash = g_sha1;

Bytes random_bytes(size_t n, uint64_t seed) {
    Rng rng(seed, "bench");
    Bytes b(n);
    rng.fill(b.data(), b.size());
    return b;
}

void BM_Sha1Digest(benchmark::State& state) {
    const Bytes msg = random_bytes(size_t(state.range(0)), 1);
    for (auto _ : state) {
        auto d = g_hash.digest(msg);
        benchmark::DoNotOptimize(d);
    }
    state.SetBytesProcessed(int64_t(state.iterations()) * state.range(0));
}
BENCHMARK(BM_Sha1Digest)->Arg(20)->Arg(64)->Arg(1024);

void BM_MacTag(benchmark::State& state) {
    crypto::SymmetricKey key{};
    key.fill(0x5a);
    const Bytes msg = random_bytes(20, 2); // one public element
    for (auto _ : state) {
        auto t = crypto::mac(g_hash, key, msg);
        benchmark::DoNotOptimize(t);
    }
}
BENCHMARK(BM_MacTag);

void BM_ChainGenerate(benchmark::State& state) {
    crypto::SymmetricKey seed{};
    seed.fill(0x17);
    for (auto _ : state) {
        auto chain = crypto::generate_chain(g_hash, seed, uint32_t(state.range(0)));
        benchmark::DoNotOptimize(chain);
    }
}
BENCHMARK(BM_ChainGenerate)->Arg(16)->Arg(1024);

void BM_ChainVerify(benchmark::State& state) {
    crypto::SymmetricKey seed{};
    seed.fill(0x17);
    const auto chain = crypto::generate_chain(g_hash, seed, 1024);
    const uint32_t gap = uint32_t(state.range(0));
    for (auto _ : state) {
        bool ok = crypto::verify_chain_element(g_hash, chain.at(gap), chain.anchor,
                                               gap + 1);
        benchmark::DoNotOptimize(ok);
    }
}
BENCHMARK(BM_ChainVerify)->Arg(0)->Arg(7);

void BM_EncryptBody(benchmark::State& state) {
    crypto::SymmetricKey key{};
    key.fill(0xc3);
    const Bytes body = random_bytes(19, 3);
    for (auto _ : state) {
        auto ct = crypto::encrypt(g_hash, key, body);
        benchmark::DoNotOptimize(ct);
    }
}
BENCHMARK(BM_EncryptBody);

void BM_KeyAgree(benchmark::State& state) {
    crypto::DhGroup grp;
    Rng rng(4, "bench-ka");
    auto a = crypto::generate_keypair(grp, rng);
    auto b = crypto::generate_keypair(grp, rng);
    for (auto _ : state) {
        auto s = crypto::key_agree(grp, a.priv, b.pub);
        benchmark::DoNotOptimize(s);
    }
}
BENCHMARK(BM_KeyAgree);

void BM_BloomQuery(benchmark::State& state) {
    bloom::Filter f(g_hash, uint64_t(1) << 15, 23, 7);
    Rng rng(5, "bench-bloom");
    std::vector<Bytes> members;
    for (int i = 0; i < 1024; i++) {
        Bytes b(19);
        rng.fill(b.data(), b.size());
        f.insert(b);
        members.push_back(std::move(b));
    }
    const bool hit = state.range(0) != 0;
    Bytes probe = hit ? members[members.size() / 2] : random_bytes(19, 6);
    for (auto _ : state) {
        bool in = f.query(probe);
        benchmark::DoNotOptimize(in);
    }
}
BENCHMARK(BM_BloomQuery)->Arg(0)->Arg(1); // miss, then member

void BM_HonestCycle(benchmark::State& state) {
    const auto v = protocol::Variant(state.range(0));
    protocol::ProtocolConfig pc;
    pc.variant = v;
    pc.cycles = 1;
    pc.schedule.mode = ScheduleConfig::Mode::uniform;
    pc.schedule.t0 = 0.0;
    pc.schedule.delta_fixed_s = 300;
    netsim::Topology topo;
    topo.pos = {{0.0, 0.0}, {10.0, 0.0}};
    topo.bs_pos = {5.0, 0.0};
    topo.range = 30.0;
    topo.width = 60.0;
    topo.height = 1.0;
    topo.rebuild_adjacency();
    const auto cal = energy::Calibration::defaults();
    netsim::SimConfig sc;
    sc.trace_limit = 0;
    uint64_t seed = 1;
    for (auto _ : state) {
        netsim::Simulator sim(topo, pc, sc, cal, seed++);
        sim.run_all();
        benchmark::DoNotOptimize(sim.key_share_rate());
    }
}
BENCHMARK(BM_HonestCycle)
    ->Arg(int(protocol::Variant::basic))
    ->Arg(int(protocol::Variant::iba))
    ->Arg(int(protocol::Variant::bba));

void BM_ReachSolver(benchmark::State& state) {
    for (auto _ : state) {
        double p = analysis::broadcast_reach(0.5, 10.0);
        benchmark::DoNotOptimize(p);
    }
}
BENCHMARK(BM_ReachSolver);

} // namespace

BENCHMARK_MAIN();
