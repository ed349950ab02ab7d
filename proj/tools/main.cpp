// Experiment driver. Three subcommands:
//   simulate   run a configured scenario over N replicas, write the event
//              trace, the per node energy ledger and a replica summary
//   attack     run the configured attack family and write its report CSVs
//   analyze    evaluate the closed form models without simulating
// All outputs are header first CSV written atomically into --out-dir.
// Exit codes: 0 ok, 2 configuration problem, 3 attack/variant combination
// that cannot exist, 1 anything else.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "wsnkms/adversary.hpp"
#include "wsnkms/analysis.hpp"
#include "wsnkms/bloom.hpp"
#include "wsnkms/config.hpp"
#include "wsnkms/netsim.hpp"

using namespace wsnkms;

namespace {

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void write_file(const std::string& dir, const std::string& name, const std::string& body) {
    std::filesystem::create_directories(dir);
    config::atomic_write((std::filesystem::path(dir) / name).string(), body);
    std::printf("wrote %s\n", (std::filesystem::path(dir) / name).c_str());
}

// --calibration flag beats the scenario's [energy] entry, which beats the
// WSNKMS_CALIBRATION environment variable; otherwise the shipped defaults
energy::Calibration resolve_calibration(const std::string& flag,
                                        const std::string& from_scenario) {
    std::string path = flag;
    if (path.empty()) path = from_scenario;
    if (path.empty()) {
        const char* env = std::getenv("WSNKMS_CALIBRATION");
        if (env) path = env;
    }
    if (path.empty()) return energy::Calibration::defaults();
    return energy::Calibration::load(path);
}

netsim::Topology build_topology(const config::Scenario& sc, uint64_t seed) {
    if (sc.topology == config::TopologyKind::chain)
        return netsim::Topology::chain(sc.nodes, sc.spacing, sc.range);
    Rng rng(seed, "topo");
    return netsim::Topology::place_uniform(sc.nodes, sc.width, sc.height, sc.range, rng,
                                           {sc.width / 2.0, sc.height / 2.0});
}

void apply_variant(config::Scenario& sc, const std::string& flag) {
    if (flag.empty()) return;
    sc.pc.variant = *protocol::variant_from_name(flag);
}

// ---- simulate ----

struct ReplicaRow {
    uint64_t seed = 0;
    double key_share = 0.0;
    uint64_t pairs_expected = 0;
    uint64_t pairs_confirmed = 0;
    uint64_t forged = 0;
    double total_mj = 0.0;
    size_t peak_mem = 0;
};

int cmd_simulate(const std::string& cfg_path, uint64_t seed, uint32_t replicas,
                 const std::string& out_dir, const std::string& variant,
                 const std::string& calib_flag) {
    config::Scenario sc = config::load_scenario(cfg_path);
    apply_variant(sc, variant);
    const auto cal = resolve_calibration(calib_flag, sc.calibration_path);

    std::vector<ReplicaRow> rows(replicas);
    std::string trace_csv, energy_csv;
    std::mutex first_mu;

    auto run_one = [&](uint32_t r) {
        const uint64_t s = seed + r;
        netsim::SimConfig simc;
        simc.p_loss = sc.p_loss;
        simc.bs_direct = sc.bs_direct;
        if (r != 0) simc.trace_limit = 0; // only the first replica keeps a tape
        netsim::Simulator sim(build_topology(sc, s), sc.pc, simc, cal, s);
        sim.run_all();

        ReplicaRow row;
        row.seed = s;
        row.key_share = sim.key_share_rate();
        for (const auto& st : sim.cycle_stats()) {
            row.pairs_expected += st.pairs_expected;
            row.pairs_confirmed += st.pairs_confirmed;
        }
        row.forged = sim.forged_pairings().size();
        row.total_mj = sim.ledger().total_mj();
        for (uint16_t id = 0; id < sc.nodes; id++)
            row.peak_mem = std::max(row.peak_mem, sim.peak_memory(id));
        rows[r] = row;

        if (r == 0) {
            std::ostringstream tr;
            tr << "time,entity,event,kind,origin,ok,reason,cycle,seq,detail\n";
            for (const auto& t : sim.trace()) {
                tr << fmt("%.6f", t.time) << ',' << t.entity << ',' << t.event << ','
                   << wire::kind_name(t.kind) << ',' << t.origin << ',' << (t.ok ? 1 : 0)
                   << ',' << protocol::reject_name(t.reason) << ',' << t.cycle << ','
                   << t.seq << ',' << csv_field(t.detail) << '\n';
            }
            std::ostringstream en;
            sim.ledger().write_csv(en, 0, sc.nodes);
            std::lock_guard<std::mutex> lk(first_mu);
            trace_csv = tr.str();
            energy_csv = en.str();
        }
    };

    // replicas are independent by construction; farm them out by index
    const uint32_t workers =
        std::min<uint32_t>(replicas, std::max(1u, std::thread::hardware_concurrency()));
    if (workers <= 1 || replicas == 1) {
        for (uint32_t r = 0; r < replicas; r++) run_one(r);
    } else {
        std::vector<std::thread> pool;
        std::atomic<uint32_t> next{0};
        for (uint32_t w = 0; w < workers; w++)
            pool.emplace_back([&] {
                for (uint32_t r; (r = next.fetch_add(1)) < replicas;) run_one(r);
            });
        for (auto& t : pool) t.join();
    }

    std::ostringstream sum;
    sum << "replica,seed,key_share_rate,pairs_expected,pairs_confirmed,forged_pairings,"
           "total_node_mj,mean_node_mj,max_peak_memory_bytes\n";
    ReplicaRow mean;
    for (uint32_t r = 0; r < replicas; r++) {
        const auto& row = rows[r];
        sum << r << ',' << row.seed << ',' << fmt("%.6f", row.key_share) << ','
            << row.pairs_expected << ',' << row.pairs_confirmed << ',' << row.forged << ','
            << fmt("%.6f", row.total_mj) << ',' << fmt("%.6f", row.total_mj / sc.nodes)
            << ',' << row.peak_mem << '\n';
        mean.key_share += row.key_share;
        mean.pairs_expected += row.pairs_expected;
        mean.pairs_confirmed += row.pairs_confirmed;
        mean.forged += row.forged;
        mean.total_mj += row.total_mj;
        mean.peak_mem = std::max(mean.peak_mem, rows[r].peak_mem);
    }
    const double n = double(replicas);
    sum << "mean,," << fmt("%.6f", mean.key_share / n) << ','
        << fmt("%.2f", double(mean.pairs_expected) / n) << ','
        << fmt("%.2f", double(mean.pairs_confirmed) / n) << ','
        << fmt("%.2f", double(mean.forged) / n) << ',' << fmt("%.6f", mean.total_mj / n)
        << ',' << fmt("%.6f", mean.total_mj / n / sc.nodes) << ',' << mean.peak_mem
        << '\n';

    write_file(out_dir, "trace.csv", trace_csv);
    write_file(out_dir, "energy.csv", energy_csv);
    write_file(out_dir, "summary.csv", sum.str());
    return 0;
}

// ---- attack ----

std::string report_kv(const std::vector<std::pair<std::string, std::string>>& kv) {
    std::ostringstream os;
    os << "key,value\n";
    for (const auto& [k, v] : kv) os << k << ',' << csv_field(v) << '\n';
    return os.str();
}

int cmd_attack(const std::string& cfg_path, uint64_t seed, const std::string& out_dir,
               const std::string& variant, const std::string& calib_flag) {
    config::Scenario sc = config::load_scenario(cfg_path);
    apply_variant(sc, variant);
    resolve_calibration(calib_flag, sc.calibration_path); // fail early if broken
    const uint32_t delta = sc.pc.schedule.delta_fixed_s;

    switch (sc.attack) {
    case config::AttackKind::none:
        throw config::ConfigError(cfg_path + ": [attack] kind is none; nothing to run");

    case config::AttackKind::flooding: {
        adversary::FloodingParams p;
        p.variant = sc.pc.variant;
        p.nodes = sc.nodes;
        p.area = sc.width;
        p.range = sc.range;
        p.rate_hz = sc.rate_hz;
        p.taus = sc.taus;
        p.delta_s = delta;
        p.node_memory = sc.pc.node_memory_bytes;
        p.seed = seed;
        p.energy_sample_dt = sc.sample_dt;
        auto rep = adversary::run_flooding(p);

        std::ostringstream a;
        a << "tau_s,peak_mem_attack_bytes,peak_mem_honest_bytes,attributable_bytes,"
             "injected,delivered,accepted,rejected,forwards_of_injected,key_share_rate\n";
        for (const auto& r : rep.rows)
            a << fmt("%.1f", r.tau) << ',' << r.peak_mem_attack << ',' << r.peak_mem_honest
              << ',' << r.attributable_bytes << ',' << r.injected << ',' << r.delivered
              << ',' << r.accepted << ',' << r.rejected << ',' << r.forwards_of_injected
              << ',' << fmt("%.6f", r.key_share) << '\n';
        std::ostringstream b;
        b << "series,time_s,cum_mj\n";
        for (const auto& pt : rep.victim_attack)
            b << "attack," << fmt("%.1f", pt.time_s) << ',' << fmt("%.6f", pt.cum_mj)
              << '\n';
        for (const auto& pt : rep.victim_honest)
            b << "honest," << fmt("%.1f", pt.time_s) << ',' << fmt("%.6f", pt.cum_mj)
              << '\n';
        write_file(out_dir, "fig2a.csv", a.str());
        write_file(out_dir, "fig2b.csv", b.str());
        return 0;
    }

    case config::AttackKind::replay: {
        adversary::ReplayParams p;
        p.variant = sc.pc.variant;
        p.scenario = int(sc.replay_scenario);
        p.nodes = sc.nodes;
        p.delta_s = delta;
        p.seed = seed;
        auto rep = adversary::run_replay(p);

        std::vector<std::pair<std::string, std::string>> kv{
            {"variant", protocol::variant_name(rep.variant)},
            {"scenario", std::to_string(rep.scenario)},
            {"injected", std::to_string(rep.injected)},
            {"delivered", std::to_string(rep.delivered)},
            {"injected_ok", std::to_string(rep.injected_ok)},
            {"injected_rejected", std::to_string(rep.injected_rejected)},
            {"forged_pairings", std::to_string(rep.forged_pairings)},
            {"victim_cycles_completed", std::to_string(rep.victim_cycles_completed)},
            {"victim_cycles_failed", std::to_string(rep.victim_cycles_failed)},
            {"key_share_rate", fmt("%.6f", rep.key_share)},
        };
        for (size_t i = 1; i < protocol::kRejectCount; i++)
            kv.emplace_back(std::string("victim_reject_") +
                                protocol::reject_name(protocol::Reject(i)),
                            std::to_string(rep.victim_rejects[i]));
        write_file(out_dir, "report.csv", report_kv(kv));
        return 0;
    }

    case config::AttackKind::wormhole: {
        adversary::WormholeParams p;
        p.variant = sc.pc.variant;
        p.window_rule = sc.window_rule;
        p.chain_nodes = sc.nodes;
        p.spacing = sc.spacing;
        p.range = sc.range;
        p.tunnel_delay_s = sc.tunnel_delay_s;
        p.delta_s = delta;
        p.seed = seed;
        auto rep = adversary::run_wormhole(p);
        write_file(out_dir, "report.csv",
                   report_kv({{"variant", protocol::variant_name(rep.variant)},
                              {"window_rule", rep.window_rule ? "on" : "off"},
                              {"tunneled", std::to_string(rep.tunneled)},
                              {"forged_pairings", std::to_string(rep.forged_pairings)},
                              {"victim_late_rejects",
                               std::to_string(rep.victim_late_rejects)},
                              {"key_share_rate", fmt("%.6f", rep.key_share)}}));
        return 0;
    }

    case config::AttackKind::battery: {
        adversary::BatteryParams p;
        p.variant = sc.pc.variant;
        p.nodes = sc.nodes;
        p.area = sc.width;
        p.range = sc.range;
        p.rate_hz = sc.rate_hz;
        p.delta_s = delta;
        p.seed = seed;
        p.energy_sample_dt = sc.sample_dt;
        auto rep = adversary::run_battery(p);

        std::ostringstream f;
        f << "time_s,certificate_mj,hybrid_mj,capped_victim_mj\n";
        for (size_t i = 0; i < rep.times.size(); i++)
            f << fmt("%.1f", rep.times[i]) << ',' << fmt("%.6f", rep.cert_cum_mj[i]) << ','
              << fmt("%.6f", rep.hybrid_cum_mj[i]) << ','
              << fmt("%.6f", rep.victim_cum_mj[i]) << '\n';
        write_file(out_dir, "fig6.csv", f.str());
        write_file(
            out_dir, "report.csv",
            report_kv({{"variant", protocol::variant_name(rep.variant)},
                       {"replayed_tickets", std::to_string(rep.replayed)},
                       {"attack_cycle_auth_attempts",
                        std::to_string(rep.attack_cycle_auth_attempts)},
                       {"gamma", std::to_string(rep.gamma)}}));
        return 0;
    }
    }
    return 1;
}

// ---- analyze ----

int cmd_analyze(const std::string& what, const std::string& out_dir, double mean_degree,
                uint32_t steps, uint64_t memory_bits, uint32_t id_bits,
                uint64_t filter_bits, uint64_t m, uint64_t n,
                const std::string& calib_flag) {
    const protocol::Variant variants[] = {protocol::Variant::basic, protocol::Variant::iba,
                                          protocol::Variant::bba};
    if (what == "connectivity") {
        std::ostringstream os;
        os << "p_loss,predicted_reach\n";
        for (uint32_t i = 0; i < steps; i++) {
            const double p = steps == 1 ? 0.0 : double(i) / (steps - 1);
            os << fmt("%.4f", p) << ','
               << fmt("%.8f", analysis::broadcast_reach(p, mean_degree)) << '\n';
        }
        write_file(out_dir, "connectivity.csv", os.str());
        return 0;
    }
    if (what == "energy") {
        const auto cal = resolve_calibration(calib_flag, "");
        std::ostringstream os;
        os << "variant,tx_bytes,rx_bytes,hashes,macs,encrypt_blocks,decrypt_blocks,"
              "key_agreements,bloom_queries,per_cycle_mj\n";
        for (auto v : variants) {
            const auto c = analysis::cycle_op_counts(v);
            os << protocol::variant_name(v);
            for (size_t op = 0; op < energy::kOpCount; op++)
                os << ',' << fmt("%g", c.qty[op]);
            os << ',' << fmt("%.4f", analysis::energy_per_cycle(v, cal)) << '\n';
        }
        write_file(out_dir, "energy_model.csv", os.str());
        return 0;
    }
    if (what == "scalability") {
        std::ostringstream os;
        os << "variant,memory_bits,id_bits,filter_bits,max_nodes\n";
        for (auto v : variants)
            os << protocol::variant_name(v) << ',' << memory_bits << ',' << id_bits << ','
               << filter_bits << ','
               << analysis::max_network_size(v, memory_bits, id_bits, filter_bits) << '\n';
        write_file(out_dir, "scalability.csv", os.str());
        return 0;
    }
    if (what == "bloom") {
        const uint32_t k = bloom::optimal_k(m, n);
        std::ostringstream os;
        os << "m,n,optimal_k,false_positive_rate,fp_log2_at_real_k,forgery_log2,"
              "forgery_probability\n";
        os << m << ',' << n << ',' << k << ','
           << fmt("%.6g", bloom::false_positive_rate(m, n, k)) << ','
           << fmt("%.4f", bloom::optimal_fp_log2(m, n)) << ','
           << fmt("%.4f", bloom::forgery_probability_log2(128, 10, m, n)) << ','
           << fmt("%.6g", bloom::forgery_probability(128, 10, m, n)) << '\n';
        write_file(out_dir, "bloom.csv", os.str());
        return 0;
    }
    if (what == "table4") {
        const auto cal = resolve_calibration(calib_flag, "");
        std::ostringstream os;
        os << "scheme,auth_cost_mj,security,dos_resilience,scalability\n";
        for (const auto& row : analysis::comparison_table(cal))
            os << csv_field(row.scheme) << ',' << fmt("%.2f", row.auth_cost_mj) << ','
               << csv_field(row.security) << ',' << csv_field(row.dos_resilience) << ','
               << csv_field(row.scalability) << '\n';
        write_file(out_dir, "table4.csv", os.str());
        return 0;
    }
    throw config::ConfigError("unknown analyze target '" + what +
                              "'; expected connectivity, energy, scalability, bloom or "
                              "table4");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"key management scheme experiment driver"};
    app.require_subcommand(1);

    std::string cfg_path, out_dir = ".", variant, calib;
    uint64_t seed = 1;
    uint32_t replicas = 1;

    auto add_common = [&](CLI::App* c, bool with_config) {
        if (with_config)
            c->add_option("--config", cfg_path, "scenario file")->required();
        c->add_option("--seed", seed, "base random seed");
        c->add_option("--out-dir", out_dir, "directory for output CSVs");
        c->add_option("--variant", variant, "protocol variant override")
            ->check(CLI::IsMember({"basic", "iba", "bba"}));
        c->add_option("--calibration", calib, "energy calibration file");
    };

    auto* sim = app.add_subcommand("simulate", "run a scenario and write trace, "
                                               "energy ledger and summary");
    add_common(sim, true);
    sim->add_option("--replicas", replicas, "independent runs, seeds seed..seed+N-1")
        ->check(CLI::Range(1u, 100000u));

    auto* atk = app.add_subcommand("attack", "run the scenario's attack family and "
                                             "write its report CSVs");
    add_common(atk, true);

    auto* ana = app.add_subcommand("analyze", "evaluate closed form models");
    std::string what;
    double mean_degree = 10.0;
    uint32_t steps = 21;
    uint64_t memory_bits = uint64_t(1) << 19;
    uint32_t id_bits = 16;
    uint64_t filter_bits = uint64_t(1) << 15;
    uint64_t bloom_m = uint64_t(1) << 15;
    uint64_t bloom_n = 1024;
    ana->add_option("what", what,
                    "connectivity | energy | scalability | bloom | table4")
        ->required();
    add_common(ana, false);
    ana->add_option("--mean-degree", mean_degree, "neighbors per node (connectivity)");
    ana->add_option("--steps", steps, "loss grid points (connectivity)")
        ->check(CLI::Range(1u, 100000u));
    ana->add_option("--memory-bits", memory_bits, "reserved bits (scalability)");
    ana->add_option("--id-bits", id_bits, "bits per identity (scalability)");
    ana->add_option("--filter-bits", filter_bits, "preloaded filter bits (scalability)");
    ana->add_option("--m", bloom_m, "filter size in bits (bloom)");
    ana->add_option("--n", bloom_n, "inserted elements (bloom)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed())
            return cmd_simulate(cfg_path, seed, replicas, out_dir, variant, calib);
        if (atk->parsed()) return cmd_attack(cfg_path, seed, out_dir, variant, calib);
        return cmd_analyze(what, out_dir, mean_degree, steps, memory_bits, id_bits,
                           filter_bits, bloom_m, bloom_n, calib);
    } catch (const adversary::UnsupportedCombo& e) {
        std::fprintf(stderr, "unsupported combination: %s\n", e.what());
        return 3;
    } catch (const config::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::runtime_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
