#include "recon/bump.hpp"

namespace recon {

namespace {
// mu(t) = a/(a+b) with a = psi(1/2 - t), b = psi(t - 1/3); psi(s) = exp(-1/s).
struct Parts {
    double a, b, a1, b1, a2, b2;
};
Parts parts(double t) {
    Parts p;
    p.a = exp_bump(0.5 - t);
    p.b = exp_bump(t - 1.0 / 3.0);
    p.a1 = -exp_bump_d1(0.5 - t);
    p.b1 = exp_bump_d1(t - 1.0 / 3.0);
    p.a2 = exp_bump_d2(0.5 - t);
    p.b2 = exp_bump_d2(t - 1.0 / 3.0);
    return p;
}
}  // namespace

BumpProfile::BumpProfile() {
    for (int i = 0; i <= 4000; ++i) {
        double t = kOne + (kZero - kOne) * i / 4000.0;
        max_d1_ = std::max(max_d1_, std::abs(d1(t)));
        max_d2_ = std::max(max_d2_, std::abs(d2(t)));
    }
}

double BumpProfile::value(double t) const {
    if (t <= kOne) return 1.0;
    if (t >= kZero) return 0.0;
    auto p = parts(t);
    return p.a / (p.a + p.b);
}

double BumpProfile::d1(double t) const {
    if (t <= kOne || t >= kZero) return 0.0;
    auto p = parts(t);
    double s = p.a + p.b;
    return (p.a1 * p.b - p.a * p.b1) / (s * s);
}

double BumpProfile::d2(double t) const {
    if (t <= kOne || t >= kZero) return 0.0;
    auto p = parts(t);
    double s = p.a + p.b;
    double num = (p.a2 * p.b - p.a * p.b2) * s - 2.0 * (p.a1 * p.b - p.a * p.b1) * (p.a1 + p.b1);
    return num / (s * s * s);
}

}  // namespace recon
