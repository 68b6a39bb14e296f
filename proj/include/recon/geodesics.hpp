#pragma once

#include "recon/gh_verify.hpp"
#include "recon/metric_field.hpp"

namespace recon {

struct GeodesicState {
    int chart = -1;
    Vec position;   // centered chart coordinates
    Vec velocity;   // chart coordinates, g-unit at the start
    double length = 0.0;
};

struct GeodesicOptions {
    double step = 0.0;          // 0 -> grid pitch / 3
    int handoff_stride = 4;     // try a hand-off every this many steps
    double record_every = 0.05; // arc-length between recorded states
};

struct GeodesicTrace {
    std::vector<GeodesicState> states;  // recorded along the way, start first
    GeodesicState final;
    bool fell_off = false;      // left the atlas before reaching the length
    double energy_drift = 0.0;  // max relative |v|_g drift per unit length
};

// Integrates the geodesic flow in Hamiltonian form through the stored metric
// grids, handing off between charts via the stored transition fields.
GeodesicTrace geodesic_trace(const Atlas& atlas, const GeodesicState& start, double length,
                             const GeodesicOptions& opts = {});

// Normal-coordinate grid around a base point: metric tensors pulled back
// through the exponential map, sampled on a Cartesian grid of the tangent
// space (g(x0)-orthonormal basis).
struct NormalGrid {
    double pitch = 0.0;
    int half = 0;
    int dim = 0;
    struct Node {
        bool valid = false;
        int chart = -1;
        Vec position;  // centered chart coordinates of exp(y)
        Mat g;         // metric in normal coordinates at y
    };
    std::vector<Node> nodes;  // row-major over (-half..half)^n

    int per_axis() const { return 2 * half + 1; }
    const Node* at(const std::vector<int>& idx) const;
};

NormalGrid exp_and_normal_coordinates(const Atlas& atlas, int chart, const Vec& x0, double rho,
                                      double pitch, const GeodesicOptions& opts = {});

// det g over a 2-plane of normal coordinates; masked cells hold -1.
struct SliceGrid {
    double pitch = 0.0;
    int half = 0;
    std::vector<double> detg;  // row-major, -1 where masked
    int masked = 0;
    void to_csv_file(const std::string& path) const;
};

SliceGrid slice_map(const Atlas& atlas, int chart, const Vec& x0, const Vec& xi1, const Vec& xi2,
                    double rho, int resolution, const GeodesicOptions& opts = {});

// Lower estimate of the injectivity radius at x0 by shooting a direction fan:
// short geodesic loops through the start and near-collisions of exponential
// images at common radius shells count as violations.
struct InjectivityEstimate {
    double lower = 0.0;        // original distance units
    double loop_length = kInf; // shortest detected loop, original units
    bool hit_probe_limit = false;
};

InjectivityEstimate injectivity_radius_probe(const Atlas& atlas, int chart, const Vec& x0,
                                             double rho_max, int fan = 192,
                                             const GeodesicOptions& opts = {});

// Samples the geodesic ball of (original-scale) radius r around a point, runs
// the GH ball certification on it, and compares against K_claim * r^3.
struct BallComparison {
    double proxy = 0.0;       // r * delta_a, original units
    double bound = 0.0;       // 2 K_claim r^3 + pitch
    double pitch = 0.0;       // radial sampling pitch, original units
    bool pass = false;
    GHCertificate certificate;
};

BallComparison ball_comparison_check(const Atlas& atlas, int chart, const Vec& x0, double r,
                                     double k_claim, int fan = 48,
                                     const GeodesicOptions& opts = {});

}  // namespace recon
