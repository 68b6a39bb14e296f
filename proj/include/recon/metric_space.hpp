#pragma once

#include <map>
#include <optional>
#include <utility>

#include "recon/common.hpp"

namespace recon {

// Finite metric space stored as a dense symmetric matrix. Entries at or above
// censored_value (when a cutoff is set) are lower bounds only, not exact
// distances; they carry no triangle obligation and are never used as link
// weights.
class FiniteMetricSpace {
public:
    FiniteMetricSpace() = default;
    // Throws on asymmetry, nonzero diagonal, negative entries, or n > 20000.
    FiniteMetricSpace(Mat dist, std::optional<double> cutoff = std::nullopt,
                      std::optional<double> censored_value = std::nullopt);

    int size() const { return static_cast<int>(dist_.rows()); }
    double d(Index i, Index j) const { return dist_(i, j); }
    const Mat& matrix() const { return dist_; }

    std::optional<double> cutoff() const { return cutoff_; }
    std::optional<double> censored_value() const { return censored_value_; }
    bool censored(Index i, Index j) const {
        return cutoff_.has_value() && i != j && dist_(i, j) >= *censored_value_;
    }
    bool has_censoring() const { return cutoff_.has_value(); }

    // Max violation of d(i,k) <= d(i,j) + d(j,k) over non-censored triples.
    double triangle_slack() const;

    // Indices with d(center, .) <= radius, center first.
    std::vector<Index> ball(Index center, double radius) const;

    FiniteMetricSpace restricted(const std::vector<Index>& subset) const;
    FiniteMetricSpace rescaled(double factor) const;

    static FiniteMetricSpace from_json_file(const std::string& path);
    void to_json_file(const std::string& path) const;

private:
    Mat dist_;
    std::optional<double> cutoff_;
    std::optional<double> censored_value_;
};

struct Net {
    std::vector<Index> indices;
    double separation = 0.0;
    double covering_radius = 0.0;
};

struct QuasiIsometryReport {
    double lambda = 1.0;       // multiplicative distortion, >= 1
    double epsilon = 0.0;      // additive slack under that lambda
    double epsilon_additive = 0.0;  // slack for the lambda = 1 fit
    double net_radius = 0.0;   // covering radius of f(X) in Y
    std::pair<Index, Index> worst_pair{-1, -1};
};

struct ChainCertificate {
    std::vector<Index> points;
    double straightness_slack = 0.0;
    double link_bound = 0.0;
};

struct StraightnessCheck {
    bool ok = false;
    std::array<Index, 3> worst_triple{-1, -1, -1};
    double worst_excess = -kInf;  // d(i,j)+d(j,k)-d(i,k); ok iff < slack
};

struct IntrinsifyResult {
    // component[i] = component id of point i (0-based, by first occurrence).
    std::vector<int> component;
    int n_components = 1;
    // Shortest-path metric; +inf across components.
    FiniteMetricSpace space;
    std::vector<Index> members(int comp) const;
    // Throws unless the link graph was connected.
    const FiniteMetricSpace& single() const;
};

struct WitnessResult {
    std::map<std::pair<Index, Index>, ChainCertificate> witnesses;
    // Pairs for which the search found no delta-straight delta-chain.
    // Failure is only lack of evidence, never a disproof.
    std::vector<std::pair<Index, Index>> failures;
    bool all_witnessed() const { return failures.empty(); }
};

// Hausdorff distance between two index subsets of a common ambient space.
double hausdorff_distance(const std::vector<Index>& a, const std::vector<Index>& b,
                          const FiniteMetricSpace& ambient);
// Same over two point sets in R^N (brute force).
double hausdorff_distance(const std::vector<Vec>& a, const std::vector<Vec>& b);

// Greedy in index order, so deterministic: separation >= s, covering < s.
Net maximal_separated_net(const FiniteMetricSpace& x, double s);
Net maximal_separated_net(const std::vector<Vec>& pts, double s);

// Shortest-path completion over the r-link graph: edge (i,j) iff some witness
// z has max(d(z,i), d(z,j)) < r. Censored entries never become edges.
IntrinsifyResult intrinsify(const FiniteMetricSpace& x, double r);

StraightnessCheck check_delta_straight(const ChainCertificate& chain,
                                       const FiniteMetricSpace& x);

WitnessResult delta_intrinsic_witness(const FiniteMetricSpace& x, double delta,
                                      int refine_depth = 2);

// f maps indices of x to indices of y (f.size() == x.size()).
QuasiIsometryReport measure_quasi_isometry(const std::vector<Index>& f,
                                           const FiniteMetricSpace& x,
                                           const FiniteMetricSpace& y);

}  // namespace recon
