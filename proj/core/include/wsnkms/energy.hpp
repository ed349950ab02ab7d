#pragma once
// Energy accounting. Unit costs live in a calibration table (millijoules per
// operation); the shipped defaults were fitted by least squares so that the
// per cycle operation counts of the three protocol variants reproduce the
// reference totals 58.68 / 60.50 / 62.54 mJ exactly (see analysis.hpp for
// the counts). A ledger tallies quantities and energy per entity.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace wsnkms::energy {

enum class Op : uint8_t {
    tx_byte = 0,
    rx_byte,
    hash,
    mac,
    encrypt_block,
    decrypt_block,
    key_agree,
    bloom_query,
};
constexpr size_t kOpCount = 8;
const char* op_name(Op op);

struct Calibration {
    std::array<double, kOpCount> cost_mj{}; // per unit

    double cost(Op op) const { return cost_mj[size_t(op)]; }
    static Calibration defaults();
    // plain config file, [calibration] section, one key per op
    static Calibration load(const std::string& path);
    void save(const std::string& path) const;
};

class Ledger {
  public:
    Ledger() = default;
    Ledger(size_t entities, const Calibration& calib) { reset(entities, calib); }
    void reset(size_t entities, const Calibration& calib);

    double charge(size_t entity, Op op, double qty); // returns mJ added
    double qty(size_t entity, Op op) const;
    double mj(size_t entity, Op op) const;
    double total_mj(size_t entity) const;
    double total_mj() const;
    size_t entities() const { return rows_.size(); }
    const Calibration& calibration() const { return calib_; }

    // one row per entity with per-op quantities and energies
    void write_csv(std::ostream& out, size_t first, size_t last) const;

  private:
    struct Row {
        std::array<double, kOpCount> qty{};
        std::array<double, kOpCount> mj{};
    };
    std::vector<Row> rows_;
    Calibration calib_{};
};

} // namespace wsnkms::energy
