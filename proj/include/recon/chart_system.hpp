#pragma once

#include <memory>

#include "recon/gh_verify.hpp"
#include "recon/metric_space.hpp"

namespace recon {

// One approximate chart: GH coordinates of the unit ball around a net point,
// translated so the net point lands on the chart base p_i.
struct Chart {
    Index net_index = -1;            // index into the net (chart id)
    Index center = -1;               // global data index of q_i
    Vec base;                        // p_i
    std::vector<Index> members;      // global indices of B_1(q_i), center first
    std::vector<Vec> coords;         // f_i per member (chart coordinates)
    double delta_a = 0.0;            // certificate level of the ball
    std::vector<int> member_slot;    // global index -> slot, -1 if absent

    const Vec* coord_of(Index global) const {
        if (global < 0 || global >= static_cast<Index>(member_slot.size())) return nullptr;
        int s = member_slot[global];
        return s < 0 ? nullptr : &coords[s];
    }
};

struct ChartSystem {
    int dim = 0;
    double scale = 1.0;                   // original r; all internals unit scale
    std::shared_ptr<FiniteMetricSpace> space;  // unit-scale metric
    std::vector<Chart> charts;
    std::vector<std::vector<int>> adjacency;   // chart ids with d(q_i, q_j) < 1
    std::vector<std::vector<int>> neighbors;   // chart ids with d(q_i, q_j) < 1/2
    std::vector<int> component;                // adjacency component per chart
    int n_components = 1;
    double max_delta_a = 0.0;

    int size() const { return static_cast<int>(charts.size()); }
    bool adjacent(int i, int j) const {
        if (i == j) return true;
        for (int k : adjacency[i])
            if (k == j) return true;
        return false;
    }
    double center_distance(int i, int j) const {
        return space->d(charts[i].center, charts[j].center);
    }
};

// Affine isometry y -> rotation * y + translation of chart coordinates.
struct TransitionMap {
    int i = -1, j = -1;   // maps chart i coordinates to chart j coordinates
    Mat rotation;
    Vec translation;
    double residual = 0.0;

    Vec apply(const Vec& y) const { return rotation * y + translation; }
    TransitionMap inverse() const {
        TransitionMap inv;
        inv.i = j;
        inv.j = i;
        inv.rotation = rotation.transpose();
        inv.translation = -(rotation.transpose() * translation);
        inv.residual = residual;
        return inv;
    }
};

// Transitions stored once per adjacency edge (i < j); inverses on demand, so
// A_ji o A_ij is the identity exactly.
class TransitionSet {
public:
    void add(TransitionMap t);
    // Transition from chart i to chart j (identity when i == j).
    TransitionMap get(int i, int j) const;
    bool has(int i, int j) const;
    double max_residual() const;
    const std::vector<TransitionMap>& stored() const { return stored_; }

private:
    std::vector<TransitionMap> stored_;
    std::map<std::pair<int, int>, int> index_;
};

struct ChartBuildOptions {
    double net_separation = 0.18;  // unit scale
    double delta2_pitch = 0.02;
    bool warn_only = true;         // proceed past closeness failures
};

// Rescales to r = 1, picks a maximal separated net, runs the GH coordinate
// construction on each unit ball, and places chart bases at 4*i*e_1.
ChartSystem build_chart_system(const FiniteMetricSpace& x, double r, int n,
                               const ChartBuildOptions& opts = {});

TransitionSet build_transitions(const ChartSystem& cs);

struct CocycleReport {
    double max_residual = 0.0;
    std::array<int, 3> worst_triple{-1, -1, -1};
    int triples = 0;
};

CocycleReport check_cocycle(const TransitionSet& transitions, const ChartSystem& cs,
                            int probes_per_dim = 3);

}  // namespace recon
