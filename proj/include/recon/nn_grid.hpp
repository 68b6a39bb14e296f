#pragma once

#include <unordered_map>

#include "recon/common.hpp"

namespace recon {

// Uniform cell hash for nearest-neighbor queries over low-dimensional points.
// Falls back to a linear scan whenever the candidate box would exceed the
// number of occupied cells, so queries are never worse than brute force.
class NnGrid {
public:
    NnGrid(const std::vector<Vec>& pts, double cell) : pts_(pts), cell_(cell) {
        require(!pts.empty(), "NnGrid needs points");
        require(cell_ > 0.0, "NnGrid needs a positive cell size");
        dim_ = static_cast<int>(pts[0].size());
        for (int i = 0; i < static_cast<int>(pts.size()); ++i)
            cells_[key_of(pts[i])].push_back(i);
    }

    std::pair<int, double> nearest(const Vec& q) const {
        // Cheap upper bound from the query's own cell neighborhood, else the
        // first point.
        int best = 0;
        double bestd = (pts_[0] - q).norm();
        scan_box(q, 1, best, bestd);
        int radius = static_cast<int>(bestd / cell_) + 1;
        double volume = std::pow(2.0 * radius + 1.0, dim_);
        if (volume > 2.0 * static_cast<double>(cells_.size()) + 64.0) {
            for (int i = 0; i < static_cast<int>(pts_.size()); ++i) {
                double d = (pts_[i] - q).norm();
                if (d < bestd) {
                    bestd = d;
                    best = i;
                }
            }
            return {best, bestd};
        }
        scan_box(q, radius, best, bestd);
        return {best, bestd};
    }

    std::vector<int> within(const Vec& q, double radius) const {
        std::vector<int> out;
        int r = static_cast<int>(radius / cell_) + 1;
        double volume = std::pow(2.0 * r + 1.0, dim_);
        if (volume > 2.0 * static_cast<double>(cells_.size()) + 64.0) {
            for (int i = 0; i < static_cast<int>(pts_.size()); ++i)
                if ((pts_[i] - q).norm() <= radius) out.push_back(i);
            return out;
        }
        iterate_box(q, r, [&](int idx) {
            if ((pts_[idx] - q).norm() <= radius) out.push_back(idx);
        });
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    int64_t key_of(const Vec& p) const {
        int64_t h = 1469598103934665603LL;
        for (int k = 0; k < dim_; ++k) {
            auto c = static_cast<int64_t>(std::floor(p[k] / cell_));
            h = (h ^ c) * 1099511628211LL;
        }
        return h;
    }

    template <class Fn>
    void iterate_box(const Vec& q, int r, Fn fn) const {
        std::vector<int> lo(static_cast<size_t>(dim_));
        for (int k = 0; k < dim_; ++k)
            lo[static_cast<size_t>(k)] = static_cast<int>(std::floor(q[k] / cell_)) - r;
        const int span = 2 * r + 1;
        int64_t total = 1;
        for (int k = 0; k < dim_; ++k) total *= span;
        for (int64_t t = 0; t < total; ++t) {
            int64_t h = 1469598103934665603LL;
            int64_t rem = t;
            for (int k = 0; k < dim_; ++k) {
                int64_t c = lo[static_cast<size_t>(k)] + rem % span;
                rem /= span;
                h = (h ^ c) * 1099511628211LL;
            }
            auto it = cells_.find(h);
            if (it != cells_.end())
                for (int i : it->second) fn(i);
        }
    }

    void scan_box(const Vec& q, int r, int& best, double& bestd) const {
        iterate_box(q, r, [&](int idx) {
            double d = (pts_[idx] - q).norm();
            if (d < bestd) {
                bestd = d;
                best = idx;
            }
        });
    }

    const std::vector<Vec>& pts_;
    double cell_;
    int dim_;
    std::unordered_map<int64_t, std::vector<int>> cells_;
};

}  // namespace recon
