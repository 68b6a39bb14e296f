#pragma once

#include <memory>
#include <optional>

#include <json.hpp>

#include "recon/block_vec.hpp"
#include "recon/metric_space.hpp"
#include "recon/bump.hpp"
#include "recon/flat_fit.hpp"
#include "recon/point_cloud.hpp"

namespace recon {

// One blended-projection step: phi(x) = mu(|x - q|) P(x) + (1 - mu(|x - q|)) x
// at unit scale, with P the orthogonal projection onto the flat through q.
struct ProjectionStep {
    BVec center;               // q, unit scale
    std::vector<BVec> frame;   // orthonormal directions of the flat
    double center_norm2 = 0.0; // cached |q|^2
    // Quick-reject data: the home block's column of the center. The distance
    // within one block lower-bounds the full distance.
    int reject_block = -1;
    Vec reject_col;
};

// Finite composition f = phi_J o ... o phi_1 with analytic derivatives.
// Works on block vectors, so the same engine serves small dense clouds and
// the high-dimensional block-structured stage.
class BlendedComposition {
public:
    const BumpProfile& bump() const { return bump_; }
    std::vector<ProjectionStep> steps;

    // Optional locality index for block-structured stages: steps grouped by
    // home chart, with a representative center and patch radius per chart.
    std::vector<std::pair<int, int>> chart_ranges;
    std::vector<BVec> chart_reps;
    std::vector<double> chart_radius;
    bool has_locality() const { return !chart_ranges.empty(); }
    void build_locality(const std::vector<int>& step_home, int n_charts);

    struct EvalResult {
        BVec value;
        std::vector<BVec> jac;              // d f applied to the input tangents
        std::vector<BVec> hess;             // pair-indexed second derivatives
        double max_drift = 0.0;             // max |y_i - y_0| over the trajectory
    };

    // tangents may be empty (value only). hessian_pairs indexes into tangents:
    // for each (a, b) the result holds d^2 f[t_a, t_b].
    EvalResult evaluate(const BVec& x, const std::vector<BVec>& tangents,
                        const std::vector<std::pair<int, int>>& hessian_pairs = {},
                        const std::vector<int>* candidates = nullptr) const;

    // Allocation-free fast path over a slot-indexed workspace, restricted to
    // the steps of the given charts (sorted ids). Values only, or values plus
    // Jacobian actions.
    struct Workspace {
        std::vector<int> slot;      // block id -> slot, -1 when inactive
        std::vector<int> blocks;    // slot -> block id
        Mat y;                      // bdim x capacity
        std::vector<Mat> tan;
        Mat w, rel;
        std::vector<Mat> pmiu;
        std::vector<double> fcoef, edotu;
    };
    EvalResult evaluate_local(const BVec& x, const std::vector<BVec>& tangents,
                              const std::vector<int>& candidate_charts, Workspace& ws,
                              int total_blocks) const;

private:
    BumpProfile bump_;
};

struct InterpolantDiagnostics {
    double flat_defect = 0.0;      // max fitted defect of the flats, original scale
    bool hypothesis_met = true;    // defect / r < sigma0 at build time
};

// Public interpolation map on a point cloud in R^N (original scale outside,
// unit scale inside). Evaluation is restricted to U_{r/4}(X0).
class InterpolantMap {
public:
    BlendedComposition engine;   // steps at unit scale
    double scale = 1.0;          // r
    int ambient_dim = 0;
    std::vector<Index> net;      // data indices of the step centers, in order
    std::vector<Vec> net_points; // unit-scale step centers (dense)
    InterpolantDiagnostics diagnostics;

    // Distance from x (original scale) to the certified domain; <= 0 inside.
    double domain_distance(const Vec& x) const;

    Vec evaluate(const Vec& x) const;
    Mat jacobian(const Vec& x) const;                  // N x N
    std::vector<Mat> hessian(const Vec& x) const;      // N matrices N x N
    // Value and Jacobian in one pass (no domain check on the Jacobian path).
    std::pair<Vec, Mat> value_and_jacobian(const Vec& x) const;
    // Trajectory drift audit for the capture property.
    double drift(const Vec& x) const;

    void to_json(nlohmann::json& j) const;
};

struct BuildOptions {
    double net_separation = 0.01;  // unit scale
    double sigma0 = 0.1;           // hypothesis threshold for defect / r
    std::optional<std::vector<Index>> net_override;  // test hook
};

InterpolantMap build_interpolant(const PointCloud& x, double r, int n,
                                 const FlatnessCertificate* flats = nullptr,
                                 const BuildOptions& opts = {});

struct SurfaceDiagnostics {
    double hausdorff_to_data = 0.0;
    double sff_bound = 0.0;
    double sff_fit_residual = 0.0;
    double normal_inj_lower = 0.0;
};

struct EmbeddedSurface {
    std::shared_ptr<const InterpolantMap> interpolant;
    PointCloud samples;
    std::vector<Vec> preimages;
    std::vector<Mat> tangent_frames;  // N x n per sample
    double sample_pitch = 0.0;
    int dim = 0;
    SurfaceDiagnostics diagnostics;
};

EmbeddedSurface sample_surface(std::shared_ptr<const InterpolantMap> map,
                               const PointCloud& x, double density, uint64_t seed = 0);

// Max principal-curvature estimate by local quadratic fits over the tangent
// frames; samples with too few neighbors are skipped and counted.
struct SffResult {
    double bound = 0.0;
    double fit_residual = 0.0;
    int skipped = 0;
};
SffResult second_fundamental_form_bound(const EmbeddedSurface& surface);

double normal_injectivity_lower(const EmbeddedSurface& surface, double probe_radius);

Vec approx_normal_projection(const EmbeddedSurface& surface, const Vec& x,
                             bool refine = true);

double tangent_angle_check(const EmbeddedSurface& surface, const FlatnessCertificate& flats);

}  // namespace recon
