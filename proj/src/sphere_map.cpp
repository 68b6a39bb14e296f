#include "recon/sphere_map.hpp"

namespace recon {

namespace {

constexpr int kGrid = 4096;

double weight(double u, double a, double b) {
    const double b1 = std::exp(-sqr((u - 0.07) / 0.10));
    const double b2 = std::exp(-sqr((u - 0.45) / 0.25));
    return std::exp(a * b1 + b * b2);
}

// 7-point Gauss-Legendre on [lo, hi].
template <class Fn>
double gauss7(Fn f, double lo, double hi) {
    static const double xs[] = {0.0, 0.4058451513773972, -0.4058451513773972,
                                0.7415311855993945, -0.7415311855993945,
                                0.9491079123427585, -0.9491079123427585};
    static const double ws[] = {0.4179591836734694, 0.3818300505051189, 0.3818300505051189,
                                0.2797053914892766, 0.2797053914892766,
                                0.1294849661688697, 0.1294849661688697};
    const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    double s = 0.0;
    for (int i = 0; i < 7; ++i) s += ws[i] * f(c + h * xs[i]);
    return s * h;
}

// Inverse of smooth_step by bisection (smooth_step is strictly increasing
// on (0,1)).
double smooth_step_inv(double y) {
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (smooth_step(mid) < y)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

SphereMap::SphereMap(int n) : n_(n) {
    require(n >= 1, "sphere map dimension must be >= 1");

    // Anchor values for the warp: rho = pi * s(warp(t / 0.2)).
    const double y1 = smooth_step_inv(2.0 * std::asin(1.0 / 20.0) / M_PI);  // at x = 0.1
    const double y2 = smooth_step_inv(1.0 / 3.0);                           // at x = 0.5

    auto m_of = [&](double x, double a, double b) {
        auto w = [&](double u) { return weight(u, a, b); };
        double num = 0.0;
        const int panels = 64;
        int full = static_cast<int>(std::floor(x * panels));
        for (int p = 0; p < full; ++p)
            num += gauss7(w, static_cast<double>(p) / panels, static_cast<double>(p + 1) / panels);
        num += gauss7(w, static_cast<double>(full) / panels, x);
        double den = 0.0;
        for (int p = 0; p < panels; ++p)
            den += gauss7(w, static_cast<double>(p) / panels, static_cast<double>(p + 1) / panels);
        return num / den;
    };

    // 2x2 Newton with numeric Jacobian for the two anchor equations.
    double a = 0.0, b = 0.0;
    for (int it = 0; it < 60; ++it) {
        double r1 = m_of(0.1, a, b) - y1;
        double r2 = m_of(0.5, a, b) - y2;
        if (std::abs(r1) < 1e-14 && std::abs(r2) < 1e-14) break;
        const double h = 1e-6;
        double j11 = (m_of(0.1, a + h, b) - m_of(0.1, a - h, b)) / (2 * h);
        double j12 = (m_of(0.1, a, b + h) - m_of(0.1, a, b - h)) / (2 * h);
        double j21 = (m_of(0.5, a + h, b) - m_of(0.5, a - h, b)) / (2 * h);
        double j22 = (m_of(0.5, a, b + h) - m_of(0.5, a, b - h)) / (2 * h);
        double det = j11 * j22 - j12 * j21;
        require(std::abs(det) > 1e-14, "sphere profile solve is singular");
        a -= (j22 * r1 - j12 * r2) / det;
        b -= (-j21 * r1 + j11 * r2) / det;
    }
    ga_ = a;
    gb_ = b;

    // Cumulative integral of the weight on a fine grid for fast evaluation.
    cum_.assign(kGrid + 1, 0.0);
    auto w = [&](double u) { return weight(u, ga_, gb_); };
    for (int i = 0; i < kGrid; ++i)
        cum_[i + 1] =
            cum_[i] + gauss7(w, static_cast<double>(i) / kGrid, static_cast<double>(i + 1) / kGrid);
    norm_ = cum_[kGrid];

    // Recorded derivative bounds, by scan.
    double prev = 0.0;
    const int scan = 4000;
    for (int i = 0; i <= scan; ++i) {
        double t = kSupport * i / scan;
        double d1 = rho_d1(t);
        max_d1_ = std::max(max_d1_, std::abs(d1));
        if (i > 0) max_d2_ = std::max(max_d2_, std::abs(d1 - prev) / (kSupport / scan));
        prev = d1;
    }
}

double SphereMap::warp(double x) const {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double pos = x * kGrid;
    int cell = std::min(static_cast<int>(pos), kGrid - 1);
    auto w = [&](double u) { return weight(u, ga_, gb_); };
    double val = cum_[cell] + gauss7(w, static_cast<double>(cell) / kGrid, x);
    return val / norm_;
}

double SphereMap::warp_d1(double x) const {
    if (x <= 0.0 || x >= 1.0) return weight(std::clamp(x, 0.0, 1.0), ga_, gb_) / norm_;
    return weight(x, ga_, gb_) / norm_;
}

double SphereMap::rho(double t) const {
    if (t <= 0.0) return 0.0;
    if (t >= kSupport) return M_PI;
    return M_PI * smooth_step(warp(t / kSupport));
}

double SphereMap::rho_d1(double t) const {
    if (t <= 0.0 || t >= kSupport) return 0.0;
    double x = t / kSupport;
    return M_PI * smooth_step_d1(warp(x)) * warp_d1(x) / kSupport;
}

Vec SphereMap::value(const Vec& x) const {
    require(static_cast<int>(x.size()) == n_, "sphere map input has wrong dimension");
    Vec out = Vec::Zero(n_ + 1);
    const double t = x.norm();
    if (t >= kSupport) return out;  // south pole = origin
    const double r = rho(t);
    if (t == 0.0) {
        out[n_] = 2.0;
        return out;
    }
    out.head(n_) = (std::sin(r) / t) * x;
    out[n_] = 1.0 + std::cos(r);
    return out;
}

Mat SphereMap::jacobian(const Vec& x) const {
    Mat J = Mat::Zero(n_ + 1, n_);
    const double t = x.norm();
    if (t >= kSupport || t < 1e-300) return J;  // flat contact at both ends
    const double r = rho(t), r1 = rho_d1(t);
    const Vec u = x / t;
    // d(sin(rho) u) = cos(rho) rho' u u^T + sin(rho)/t (I - u u^T)
    J.topRows(n_) = std::cos(r) * r1 * u * u.transpose() +
                    (std::sin(r) / t) * (Mat::Identity(n_, n_) - u * u.transpose());
    // d(1 + cos(rho)) = -sin(rho) rho' u^T
    J.row(n_) = -std::sin(r) * r1 * u.transpose();
    return J;
}

}  // namespace recon
