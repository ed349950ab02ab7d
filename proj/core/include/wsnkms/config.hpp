#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "wsnkms/protocol.hpp"

namespace wsnkms::config {

// Scenario files are deliberately strict: an unknown section or key is an
// error, not a shrug. Typos in experiment configs otherwise surface as
// quietly wrong results weeks later.

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class TopologyKind : uint8_t { uniform, chain };
enum class AttackKind : uint8_t { none, flooding, replay, wormhole, battery };

const char* attack_name(AttackKind k);

struct Scenario {
    uint32_t version = 0;

    // [network]
    TopologyKind topology = TopologyKind::uniform;
    uint32_t nodes = 20;
    double width = 60.0;
    double height = 60.0;
    double range = 30.0;
    double spacing = 20.0;
    double p_loss = 0.0;
    bool bs_direct = true;

    // [protocol] and [schedule]
    protocol::ProtocolConfig pc;

    // [attack]
    AttackKind attack = AttackKind::none;
    uint32_t replay_scenario = 1;
    double rate_hz = 50.0;
    std::vector<double> taus = {15.0, 30.0, 60.0, 120.0, 240.0};
    bool window_rule = true;
    double tunnel_delay_s = 0.001;
    double sample_dt = 1.0;

    // [energy]
    std::string calibration_path;
};

// Parses a scenario file. Throws ConfigError with "path:line: what" context.
Scenario load_scenario(const std::string& path);

// Writes via a temp file in the same directory plus rename, so readers never
// observe a half written file.
void atomic_write(const std::string& path, const std::string& content);

} // namespace wsnkms::config
