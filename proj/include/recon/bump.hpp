#pragma once

#include "recon/common.hpp"

namespace recon {

// Radial blend profile: identically 1 on [0, 1/3], identically 0 on [1/2, inf),
// C^inf in between, built from exp(-1/s) quotients.
class BumpProfile {
public:
    BumpProfile();

    double value(double t) const;
    double d1(double t) const;
    double d2(double t) const;

    double max_d1() const { return max_d1_; }
    double max_d2() const { return max_d2_; }

    static constexpr double kOne = 1.0 / 3.0;   // value 1 up to here
    static constexpr double kZero = 0.5;        // value 0 from here on

private:
    double max_d1_ = 0.0;
    double max_d2_ = 0.0;
};

// Plateau weight for partitions of unity: 1 on [0, inner], 0 on [outer, inf).
class PlateauBump {
public:
    PlateauBump(double inner, double outer) : inner_(inner), outer_(outer) {
        require(0.0 < inner && inner < outer, "plateau bump needs 0 < inner < outer");
    }
    double value(double t) const {
        if (t <= inner_) return 1.0;
        if (t >= outer_) return 0.0;
        return smooth_step((outer_ - t) / (outer_ - inner_));
    }
    double inner() const { return inner_; }
    double outer() const { return outer_; }

private:
    double inner_, outer_;
};

}  // namespace recon
