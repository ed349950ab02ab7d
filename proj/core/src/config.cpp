#include "wsnkms/config.hpp"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace wsnkms::config {

const char* attack_name(AttackKind k) {
    switch (k) {
    case AttackKind::none: return "none";
    case AttackKind::flooding: return "flooding";
    case AttackKind::replay: return "replay";
    case AttackKind::wormhole: return "wormhole";
    case AttackKind::battery: return "battery";
    }
    return "?";
}

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

// Per line parse context so every complaint carries path:line.
struct LineCtx {
    const std::string& path;
    int lineno;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError(path + ":" + std::to_string(lineno) + ": " + msg);
    }

    uint64_t u64(const std::string& v, uint64_t lo, uint64_t hi) const {
        uint64_t out = 0;
        auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc() || p != v.data() + v.size())
            fail("expected an integer, got '" + v + "'");
        if (out < lo || out > hi)
            fail("value " + v + " outside [" + std::to_string(lo) + ", " +
                 std::to_string(hi) + "]");
        return out;
    }

    uint32_t u32(const std::string& v, uint64_t lo, uint64_t hi) const {
        return uint32_t(u64(v, lo, hi));
    }

    double dbl(const std::string& v, double lo, double hi) const {
        size_t idx = 0;
        double out = 0;
        try {
            out = std::stod(v, &idx);
        } catch (const std::exception&) {
            fail("expected a number, got '" + v + "'");
        }
        if (idx != v.size()) fail("trailing junk after number '" + v + "'");
        if (!(out >= lo && out <= hi))
            fail("value " + v + " outside [" + std::to_string(lo) + ", " +
                 std::to_string(hi) + "]");
        return out;
    }

    bool flag(const std::string& v) const {
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        fail("expected true or false, got '" + v + "'");
    }

    std::vector<double> dbl_list(const std::string& v, double lo, double hi) const {
        std::vector<double> out;
        std::stringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) fail("empty entry in list");
            out.push_back(dbl(item, lo, hi));
        }
        if (out.empty()) fail("expected a comma separated list");
        return out;
    }
};

} // namespace

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open");
    Scenario sc;
    std::string raw, section;
    int lineno = 0;
    bool saw_version = false;
    while (std::getline(in, raw)) {
        ++lineno;
        LineCtx c{path, lineno};
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']') c.fail("malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "network" && section != "protocol" && section != "schedule" &&
                section != "attack" && section != "energy")
                c.fail("unknown section [" + section + "]");
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos) c.fail("expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty()) c.fail("empty key");
        if (val.empty()) c.fail("empty value for '" + key + "'");

        if (section.empty()) {
            if (key == "version") {
                if (c.u64(val, 0, 1u << 30) != 1)
                    c.fail("unsupported version " + val + ", expected 1");
                saw_version = true;
            } else {
                c.fail("key '" + key + "' before any section");
            }
            continue;
        }

        if (section == "network") {
            if (key == "topology") {
                if (val == "uniform")
                    sc.topology = TopologyKind::uniform;
                else if (val == "chain")
                    sc.topology = TopologyKind::chain;
                else
                    c.fail("unknown topology '" + val + "'");
            } else if (key == "nodes") {
                sc.nodes = c.u32(val, 1, 60000);
            } else if (key == "width") {
                sc.width = c.dbl(val, 1.0, 1e6);
            } else if (key == "height") {
                sc.height = c.dbl(val, 1.0, 1e6);
            } else if (key == "range") {
                sc.range = c.dbl(val, 0.1, 1e6);
            } else if (key == "spacing") {
                sc.spacing = c.dbl(val, 0.1, 1e6);
            } else if (key == "p_loss") {
                sc.p_loss = c.dbl(val, 0.0, 1.0);
            } else if (key == "bs_direct") {
                sc.bs_direct = c.flag(val);
            } else {
                c.fail("unknown key '" + key + "' in [network]");
            }
        } else if (section == "protocol") {
            if (key == "variant") {
                auto v = protocol::variant_from_name(val);
                if (!v) c.fail("unknown variant '" + val + "'");
                sc.pc.variant = *v;
            } else if (key == "cycles") {
                sc.pc.cycles = c.u32(val, 1, 1024);
            } else if (key == "gamma") {
                sc.pc.gamma = c.u32(val, 1, 1u << 20);
            } else if (key == "disclosure_delay_s") {
                sc.pc.disclosure_delay_s = c.dbl(val, 0.0, 1e4);
            } else if (key == "clock_tolerance_s") {
                sc.pc.clock_tolerance_s = c.dbl(val, 0.0, 1e4);
            } else if (key == "node_memory_bytes") {
                sc.pc.node_memory_bytes = size_t(c.u64(val, 64, uint64_t(1) << 32));
            } else if (key == "ticket_window") {
                sc.pc.ticket_window = c.flag(val);
            } else if (key == "chain_gap_limit") {
                sc.pc.chain_gap_limit = c.u32(val, 0, 1024);
            } else if (key == "ack_delay_s") {
                sc.pc.ack_delay_s = c.dbl(val, 0.0, 1e4);
            } else if (key == "bloom_m") {
                sc.pc.bloom_m = c.u64(val, 8, uint64_t(1) << 30);
            } else if (key == "bloom_k") {
                sc.pc.bloom_k = c.u32(val, 0, 256);
            } else {
                c.fail("unknown key '" + key + "' in [protocol]");
            }
        } else if (section == "schedule") {
            if (key == "mode") {
                if (val == "uniform")
                    sc.pc.schedule.mode = ScheduleConfig::Mode::uniform;
                else if (val == "nonuniform")
                    sc.pc.schedule.mode = ScheduleConfig::Mode::nonuniform;
                else
                    c.fail("unknown mode '" + val + "'");
            } else if (key == "t0") {
                sc.pc.schedule.t0 = c.dbl(val, 0.0, 1e9);
            } else if (key == "delta_s") {
                sc.pc.schedule.delta_fixed_s = c.u32(val, 1, 16383);
            } else if (key == "delta_min_s") {
                sc.pc.schedule.delta_min_s = c.u32(val, 1, 16383);
            } else if (key == "delta_max_s") {
                sc.pc.schedule.delta_max_s = c.u32(val, 1, 16383);
            } else {
                c.fail("unknown key '" + key + "' in [schedule]");
            }
        } else if (section == "attack") {
            if (key == "kind") {
                if (val == "none")
                    sc.attack = AttackKind::none;
                else if (val == "flooding")
                    sc.attack = AttackKind::flooding;
                else if (val == "replay")
                    sc.attack = AttackKind::replay;
                else if (val == "wormhole")
                    sc.attack = AttackKind::wormhole;
                else if (val == "battery")
                    sc.attack = AttackKind::battery;
                else
                    c.fail("unknown attack '" + val + "'");
            } else if (key == "scenario") {
                sc.replay_scenario = c.u32(val, 1, 3);
            } else if (key == "rate_hz") {
                sc.rate_hz = c.dbl(val, 0.001, 1e6);
            } else if (key == "taus") {
                sc.taus = c.dbl_list(val, 0.1, 1e6);
            } else if (key == "window_rule") {
                sc.window_rule = c.flag(val);
            } else if (key == "tunnel_delay_s") {
                sc.tunnel_delay_s = c.dbl(val, 0.0, 1e4);
            } else if (key == "sample_dt") {
                sc.sample_dt = c.dbl(val, 0.01, 1e6);
            } else {
                c.fail("unknown key '" + key + "' in [attack]");
            }
        } else { // energy
            if (key == "calibration") {
                sc.calibration_path = val;
            } else {
                c.fail("unknown key '" + key + "' in [energy]");
            }
        }
    }
    if (!saw_version) throw ConfigError(path + ": missing 'version = 1'");
    if (sc.pc.schedule.delta_min_s >= sc.pc.schedule.delta_max_s &&
        sc.pc.schedule.mode == ScheduleConfig::Mode::nonuniform)
        throw ConfigError(path + ": delta_min_s must be below delta_max_s");
    return sc;
}

void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error(tmp + ": cannot open for writing");
        out << content;
        out.flush();
        if (!out) throw std::runtime_error(tmp + ": write failed");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw std::runtime_error(path + ": rename failed");
    }
}

} // namespace wsnkms::config
