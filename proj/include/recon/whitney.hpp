#pragma once

#include "recon/block_vec.hpp"
#include "recon/chart_system.hpp"
#include "recon/sphere_map.hpp"

namespace recon {

// Block map F: a point x in chart j produces, for every chart i adjacent to j
// (and j itself), the sphere-map image of A_{ji}(x) in block i; all other
// blocks vanish. Radii are magnified by kappa: block i reads
// phi((A_{ji}(x) - p_i) / kappa).
class WhitneyMap {
public:
    WhitneyMap(std::shared_ptr<const ChartSystem> cs,
               std::shared_ptr<const TransitionSet> transitions, double kappa);

    int block_dim() const { return cs_->dim + 1; }
    double kappa() const { return kappa_; }
    const SphereMap& sphere() const { return sphere_; }
    const ChartSystem& charts() const { return *cs_; }
    const TransitionSet& transitions() const { return *trans_; }

    // Value at chart-j coordinates x, plus dF applied to chart tangents.
    struct Eval {
        BVec value;
        std::vector<BVec> jac;
    };
    Eval evaluate(int j, const Vec& x, const std::vector<Vec>& tangents = {}) const;

    // Measured bi-Lipschitz constants of F restricted to D_i^{kappa/10}.
    struct BiLipschitz {
        double lower = kInf;
        double upper = 0.0;
    };
    BiLipschitz measure_bilipschitz(int i, int probes = 40, uint64_t seed = 7) const;

private:
    struct Arm {  // cached transition into an adjacent chart
        int chart;
        Mat rot;
        Vec tr;
    };
    std::shared_ptr<const ChartSystem> cs_;
    std::shared_ptr<const TransitionSet> trans_;
    SphereMap sphere_;
    double kappa_;
    std::vector<std::vector<Arm>> arms_;  // per home chart, sorted by target id
};

}  // namespace recon
