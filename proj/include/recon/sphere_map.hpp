#pragma once

#include "recon/common.hpp"

namespace recon {

// Smooth map from R^n onto the unit sphere S centered at e_{n+1}, collapsing
// everything outside B_{1/5} to the south pole (the origin) and sending 0 to
// the north pole 2 e_{n+1}. The radial profile rho gives the polar angle from
// the north pole as a function of |x|; it is strictly increasing on (0, 1/5)
// with flat contact at both ends and hits the chord-angle anchors
// rho(1/50) = 2 asin(1/20) and rho(1/10) = pi/3.
class SphereMap {
public:
    explicit SphereMap(int n);

    int dim() const { return n_; }

    double rho(double t) const;
    double rho_d1(double t) const;

    // Value in R^{n+1}.
    Vec value(const Vec& x) const;
    // Jacobian, (n+1) x n.
    Mat jacobian(const Vec& x) const;

    // Recorded magnitude bounds (measured on a fine radial grid).
    double max_d1() const { return max_d1_; }
    double max_d2() const { return max_d2_; }

    static constexpr double kSupport = 0.2;   // 1/5
    static constexpr double kCapOne = 0.1;    // maps onto S_1
    static constexpr double kCapSmall = 0.02; // maps onto S_{1/10}

private:
    double warp(double x) const;     // strictly increasing [0,1] -> [0,1]
    double warp_d1(double x) const;

    int n_;
    double ga_ = 0.0, gb_ = 0.0;  // solved weight-field coefficients
    double norm_ = 1.0;           // integral of the weight over [0,1]
    std::vector<double> cum_;     // cumulative weight integral on a fine grid
    double max_d1_ = 0.0, max_d2_ = 0.0;
};

}  // namespace recon
