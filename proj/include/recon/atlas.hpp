#pragma once

#include "recon/interpolant.hpp"
#include "recon/whitney.hpp"

namespace recon {

// One stored metric-grid node of a chart: the averaged metric tensor, the
// transition images of this node's manifold point into every overlapping
// chart, their Jacobians, and the partition weights.
struct MetricNode {
    bool valid = false;
    Mat g;
    double u_self = 1.0;
    std::vector<int> over;
    std::vector<Vec> eta;
    std::vector<Mat> deta;
    std::vector<double> u;
};

struct ChartGrid {
    double pitch = 0.0;
    int half = 0;        // node indices run -half..half per axis
    double extent = 0.0; // validity radius in centered chart coordinates
    std::vector<MetricNode> nodes;

    int per_axis() const { return 2 * half + 1; }
    int node_index(const std::vector<int>& idx) const {
        int s = 0;
        for (int k = static_cast<int>(idx.size()) - 1; k >= 0; --k)
            s = s * per_axis() + (idx[k] + half);
        return s;
    }
};

struct PsiAssignment {
    int chart = -1;
    Vec coords;
};

struct AtlasOptions {
    // The sphere-map support (kappa/5) plus the evaluation extent (~kappa/15)
    // must stay below the adjacency radius 1, or blocks of charts adjacent to
    // one endpoint of an overlap but not the other get cut off at visible
    // magnitude and the Whitney sheets stop coinciding. kappa = 3 keeps that
    // margin while the flat-contact profile makes near-edge blocks ~1e-5.
    double chart_net_separation = 0.18;  // unit scale; < kappa/15 for coverage
    double kappa = 3.0;                  // chart radius magnification
    double sigma_sep = 0.045;            // Sigma sampling pitch, chart coords
    double r0 = 0.45;                    // interpolation scale on Sigma
    double grid_pitch = 0.0;             // 0 -> kappa/100
    double delta2_pitch = 0.02;
    int threads = 0;                     // 0 -> hardware concurrency
    bool build_grids = true;
};

class Atlas {
public:
    int dim = 0;
    double scale = 1.0;   // original r; everything inside is unit scale
    double kappa = 3.0;
    double r0 = 0.45;

    std::shared_ptr<const ChartSystem> cs;
    std::shared_ptr<const TransitionSet> transitions;
    std::shared_ptr<const WhitneyMap> whitney;  // null for file-loaded atlases

    // Interpolation stage over the Whitney image (live builds only).
    BlendedComposition sigma;
    std::vector<std::vector<int>> sigma_candidates;  // candidate CHART ids per home chart
    double sigma_flat_defect = 0.0;

    std::vector<ChartGrid> grids;
    std::vector<std::pair<int, int>> overlap_set;  // pairs with observed overlap
    CocycleReport cocycle;
    double max_transition_residual = 0.0;
    std::vector<PsiAssignment> psi_assignment;     // per data point

    // Nested radii, unit scale.
    double radius_build() const { return kappa / 10.0; }
    double radius_overlap() const { return kappa / 15.0; }
    double radius_publish() const { return kappa / 30.0; }

    bool has_maps() const { return whitney != nullptr; }

    // --- live-map operations -------------------------------------------
    // psi_j = (Sigma interpolation) o F restricted to chart j.
    BVec psi(int j, const Vec& x) const;
    // Value plus the images of the chart basis vectors under d(psi_j).
    std::pair<BVec, std::vector<BVec>> psi_jacobian(int j, const Vec& x) const;
    // Newton solve for psi_i(y) = m; throws after 50 iterations.
    Vec chart_inverse(int i, const BVec& m, const Vec& seed, double tol = 1e-9) const;
    // Partition weights of all charts at the manifold point psi_j(x).
    std::vector<std::pair<int, double>> partition_at(int j, const Vec& x) const;
    // Whitney-composed quasi-isometry image of data point idx.
    BVec psi_image(Index idx) const;

    // --- stored-field operations ----------------------------------------
    // Multilinear metric at centered chart coordinates; false outside.
    bool metric_at(int j, const Vec& xc, Mat* g) const;
    // Transition of a point near a stored node into chart i (first order).
    bool stored_transition(int j, const Vec& xc, int i, Vec* y, Mat* dy) const;
    // Charts overlapping chart j somewhere on its grid.
    std::vector<int> grid_overlaps(int j) const;

    const MetricNode* node_at(int j, const std::vector<int>& idx) const;

    void save(const std::string& path) const;
    static Atlas load(const std::string& path);

    // Partition profile (plateau 1 inside kappa/30, 0 outside kappa/15).
    double u_profile(double t) const;
    double u_build_profile(double t) const;
};

Atlas construct_manifold(const FiniteMetricSpace& x, double r, int n,
                         const AtlasOptions& opts = {});

// Quasi-isometry report of the chart-assignment map Psi against graph-refined
// geodesic distances measured through the stored metric fields.
struct PsiReport {
    QuasiIsometryReport qi;
    int measured_points = 0;
};
PsiReport measure_psi_quasi_isometry(const Atlas& atlas, int max_sources = 400);

// Geodesic-graph distances between data points through the atlas metric
// (unit scale). Rows follow `sources`, columns cover all data points.
Mat atlas_graph_distances(const Atlas& atlas, const std::vector<Index>& sources);

}  // namespace recon
