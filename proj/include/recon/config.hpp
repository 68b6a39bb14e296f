#pragma once

#include <map>

#include "recon/atlas.hpp"

namespace recon {

// Calibratable constants. The hypothesis thresholds and the frozen_C family
// have no principled numeric values; the defaults below come from the seeded
// calibration protocol (see the calibrate subcommand) and are labeled
// non-rigorous in every artifact that uses them.
struct ConstantsConfig {
    double sigma0 = 0.25;  // flatness hypothesis: defect / r below this
    double sigma1 = 0.30;  // closeness hypothesis: delta_a / r below this

    std::map<std::string, double> frozen_C;
    std::map<std::string, double> tolerances;
    uint64_t seed = 0;
    int threads = 0;

    // Structural knobs (unit scale).
    double interp_net_separation = 0.01;
    AtlasOptions atlas;

    static ConstantsConfig defaults();
    static ConstantsConfig from_json_file(const std::string& path);
    void to_json_file(const std::string& path) const;
    double C(const std::string& name) const;
};

}  // namespace recon
