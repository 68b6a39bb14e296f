#pragma once

#include "recon/metric_space.hpp"

namespace recon {

// A metric ball with its center as distinguished point (always local index 0).
struct CenteredBall {
    FiniteMetricSpace space;
    std::vector<Index> global_indices;  // global_indices[0] is the center
    Index center_global = -1;
};

// Output of the coordinate-building certification of a unit ball against B_1^n.
// coords[k] is the image of local point k; coords[0] = 0 always.
struct GHCertificate {
    double delta_a = 0.0;
    double delta_1 = 0.0;
    double delta_2 = 0.0;
    std::vector<Index> frame;  // local indices x_1..x_n
    std::vector<Vec> coords;
    bool degenerate_frame = false;  // Gram determinant below tolerance
    double frame_gram_det = 0.0;

    void to_json_file(const std::string& path) const;
};

struct OrthogonalAlignment {
    Mat rotation;  // orthogonal, may include a reflection
    double residual = 0.0;
};

struct ClosenessScan {
    std::vector<double> delta_a;  // per point, already rescaled by r
    double max_delta_a = 0.0;
    Index argmax = -1;
};

// Censored entries inside the ball are an error: the ball exceeds the
// known-distance horizon.
CenteredBall extract_ball(const FiniteMetricSpace& x, Index center, double radius);

// The ball must be rescaled to radius 1 by the caller. Needs >= n+1 points.
// delta_2 is estimated on a deterministic grid (pitch added as rigor margin)
// for n <= 3 and on low-discrepancy samples for larger n.
GHCertificate ghdist_to_ball(const CenteredBall& ball, int n,
                             double delta2_pitch = 0.02);

// Orthogonal Procrustes over the common indices; both maps must be centered
// (coords of the distinguished point = 0).
OrthogonalAlignment align_coordinate_maps(const std::vector<Vec>& f1,
                                          const std::vector<Vec>& f2,
                                          const std::vector<Index>& common);

ClosenessScan closeness_to_Rn_scan(const FiniteMetricSpace& x, double r, int n);

}  // namespace recon
