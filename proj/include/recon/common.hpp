#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace recon {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = int;

constexpr double kInf = std::numeric_limits<double>::infinity();

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw Error(msg);
}

// Deterministic RNG. All stochastic steps take an explicit seed.
using Rng = std::mt19937_64;

// exp(-1/s) for s > 0, else 0. The building block of every smooth cutoff here.
inline double exp_bump(double s) {
    if (s <= 0.0) return 0.0;
    return std::exp(-1.0 / s);
}

// d/ds exp_bump
inline double exp_bump_d1(double s) {
    if (s <= 0.0) return 0.0;
    return std::exp(-1.0 / s) / (s * s);
}

// d2/ds2 exp_bump
inline double exp_bump_d2(double s) {
    if (s <= 0.0) return 0.0;
    return std::exp(-1.0 / s) * (1.0 - 2.0 * s) / (s * s * s * s);
}

// Smooth monotone step: 0 on (-inf,0], 1 on [1,inf), C^inf, flat contact at both ends.
inline double smooth_step(double u) {
    const double a = exp_bump(u);
    const double b = exp_bump(1.0 - u);
    return a / (a + b);
}

inline double smooth_step_d1(double u) {
    const double a = exp_bump(u), b = exp_bump(1.0 - u);
    const double ad = exp_bump_d1(u), bd = -exp_bump_d1(1.0 - u);
    const double s = a + b;
    if (s == 0.0) return 0.0;
    return (ad * b - a * bd) / (s * s);
}

inline double sqr(double x) { return x * x; }

}  // namespace recon
