#pragma once

#include <string>

#include "recon/common.hpp"

namespace recon {

struct PointCloud {
    int ambient_dim = 0;
    std::vector<Vec> points;

    PointCloud() = default;
    explicit PointCloud(int dim) : ambient_dim(dim) {}

    int size() const { return static_cast<int>(points.size()); }
    void add(const Vec& p) {
        require(p.size() == ambient_dim, "point has wrong ambient dimension");
        points.push_back(p);
    }

    // Pairwise Euclidean distance matrix (for hand-off into metric ops).
    Mat distance_matrix() const;

    // CSV: first line "dim=N", then one comma-separated point per row.
    static PointCloud from_csv_file(const std::string& path);
    void to_csv_file(const std::string& path) const;
};

// Affine subspace through `base` spanned by orthonormal `frame` columns (N x n).
struct AffineSubspace {
    Vec base;
    Mat frame;

    int ambient_dim() const { return static_cast<int>(base.size()); }
    int dim() const { return static_cast<int>(frame.cols()); }

    Vec project(const Vec& x) const { return base + frame * (frame.transpose() * (x - base)); }
    double distance(const Vec& x) const { return (x - project(x)).norm(); }
    // Distance to the disc of radius r around base inside the subspace.
    double disc_distance(const Vec& x, double r) const;
    // Orthonormality defect ||F^T F - I||.
    double frame_defect() const {
        return (frame.transpose() * frame - Mat::Identity(dim(), dim())).norm();
    }
};

// Largest principal angle between the direction spaces of two subspaces of
// equal dimension, in radians.
double principal_angle(const Mat& frame_a, const Mat& frame_b);

}  // namespace recon
