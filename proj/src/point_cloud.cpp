#include "recon/point_cloud.hpp"

#include <fstream>
#include <sstream>

namespace recon {

Mat PointCloud::distance_matrix() const {
    const int n = size();
    Mat d(n, n);
    for (int i = 0; i < n; ++i) {
        d(i, i) = 0.0;
        for (int j = i + 1; j < n; ++j) d(i, j) = d(j, i) = (points[i] - points[j]).norm();
    }
    return d;
}

PointCloud PointCloud::from_csv_file(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "cannot open " + path);
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), "empty point cloud file");
    require(line.rfind("dim=", 0) == 0, "point cloud file must start with dim=N");
    PointCloud pc(std::stoi(line.substr(4)));
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        Vec p(pc.ambient_dim);
        std::string cell;
        for (int k = 0; k < pc.ambient_dim; ++k) {
            require(static_cast<bool>(std::getline(ss, cell, ',')), "short row in point cloud");
            p[k] = std::stod(cell);
        }
        pc.points.push_back(std::move(p));
    }
    return pc;
}

void PointCloud::to_csv_file(const std::string& path) const {
    std::ofstream out(path);
    require(out.good(), "cannot write " + path);
    out << "dim=" << ambient_dim << "\n";
    out.precision(17);
    for (const Vec& p : points) {
        for (int k = 0; k < ambient_dim; ++k) out << (k ? "," : "") << p[k];
        out << "\n";
    }
}

double AffineSubspace::disc_distance(const Vec& x, double r) const {
    Vec rel = x - base;
    Vec in_plane = frame.transpose() * rel;
    double normal2 = (rel - frame * in_plane).squaredNorm();
    double t = in_plane.norm();
    if (t <= r) return std::sqrt(normal2);
    return std::sqrt(normal2 + sqr(t - r));
}

double principal_angle(const Mat& frame_a, const Mat& frame_b) {
    require(frame_a.cols() == frame_b.cols(), "principal angle needs equal dimensions");
    Eigen::JacobiSVD<Mat> svd(frame_a.transpose() * frame_b);
    double c = svd.singularValues().minCoeff();
    c = std::clamp(c, -1.0, 1.0);
    return std::acos(c);
}

}  // namespace recon
