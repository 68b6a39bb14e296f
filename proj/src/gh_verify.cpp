#include "recon/gh_verify.hpp"

#include <algorithm>

#include "recon/json_util.hpp"
#include "recon/nn_grid.hpp"

namespace recon {

void GHCertificate::to_json_file(const std::string& path) const {
    nlohmann::json j;
    j["delta_a"] = delta_a;
    j["delta_1"] = delta_1;
    j["delta_2"] = delta_2;
    j["frame"] = frame;
    nlohmann::json c = nlohmann::json::array();
    for (const Vec& v : coords) c.push_back(vec_to_json(v));
    j["coords"] = c;
    j["degenerate_frame"] = degenerate_frame;
    save_json(path, j);
}

CenteredBall extract_ball(const FiniteMetricSpace& x, Index center, double radius) {
    require(radius >= 0.0, "ball radius must be nonnegative");
    CenteredBall b;
    b.center_global = center;
    b.global_indices = x.ball(center, radius);
    for (Index i : b.global_indices)
        for (Index j : b.global_indices)
            if (i < j && x.censored(i, j))
                throw Error("ball exceeds known-distance horizon");
    b.space = x.restricted(b.global_indices);
    return b;
}

namespace {

// Deterministic probe set covering the unit ball B_1^n: a grid of the given
// pitch for n <= 3, Halton low-discrepancy samples otherwise.
std::vector<Vec> unit_ball_probes(int n, double pitch) {
    std::vector<Vec> probes;
    if (n <= 3) {
        int m = static_cast<int>(std::floor(1.0 / pitch));
        std::vector<int> idx(n, -m);
        while (true) {
            Vec p(n);
            for (int k = 0; k < n; ++k) p[k] = idx[k] * pitch;
            if (p.norm() <= 1.0) probes.push_back(p);
            int k = 0;
            while (k < n && ++idx[k] > m) idx[k++] = -m;
            if (k == n) break;
        }
    } else {
        auto halton = [](int i, int base) {
            double f = 1.0, r = 0.0;
            while (i > 0) {
                f /= base;
                r += f * (i % base);
                i /= base;
            }
            return r;
        };
        const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19};
        int count = 0, i = 1;
        while (count < 100000) {
            Vec p(n);
            for (int k = 0; k < n; ++k) p[k] = 2.0 * halton(i, primes[k % 8]) - 1.0;
            ++i;
            if (p.norm() <= 1.0) {
                probes.push_back(p);
                ++count;
            }
        }
    }
    return probes;
}

}  // namespace

GHCertificate ghdist_to_ball(const CenteredBall& ball, int n, double delta2_pitch) {
    const FiniteMetricSpace& X0 = ball.space;
    const int m = X0.size();
    require(m >= n + 1, "underdetermined frame");
    GHCertificate cert;

    // Frame selection by successive minimization of
    //   K(x) = max(|1 - d(x0,x)|, |f_1(x)|, ..., |f_k(x)|),
    // ties broken toward the lowest index.
    std::vector<Vec> coords(m, Vec::Zero(n));
    for (int k = 0; k < n; ++k) {
        int best = -1;
        double bestval = kInf;
        for (int x = 0; x < m; ++x) {
            double val = std::abs(1.0 - X0.d(0, x));
            for (int l = 0; l < k; ++l) val = std::max(val, std::abs(coords[x][l]));
            if (val < bestval) {
                bestval = val;
                best = x;
            }
        }
        cert.frame.push_back(best);
        const double d0m = X0.d(0, best);
        for (int x = 0; x < m; ++x)
            coords[x][k] = 0.5 * (sqr(X0.d(x, 0)) - sqr(X0.d(x, best)) + sqr(d0m));
    }
    cert.coords = coords;

    // Gram determinant of the selected frame images flags near-degeneracy.
    Mat gram(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) gram(a, b) = coords[cert.frame[a]].dot(coords[cert.frame[b]]);
    cert.frame_gram_det = gram.determinant();
    cert.degenerate_frame = cert.frame_gram_det < 1e-6;

    // delta_1: exact maximum metric distortion over all pairs.
    double d1 = 0.0;
    for (int a = 0; a < m; ++a)
        for (int b = a + 1; b < m; ++b)
            d1 = std::max(d1, std::abs(X0.d(a, b) - (coords[a] - coords[b]).norm()));
    cert.delta_1 = d1;

    // delta_2: covering defect of coords(X0) in B_1^n, probed on a
    // deterministic set with the pitch added as a one-sided margin.
    auto probes = unit_ball_probes(n, delta2_pitch);
    double d2 = 0.0;
    NnGrid nn(coords, std::max(delta2_pitch, 0.05));
    for (const Vec& p : probes) d2 = std::max(d2, nn.nearest(p).second);
    cert.delta_2 = d2 + delta2_pitch;

    cert.delta_a = std::max(cert.delta_1, cert.delta_2);
    return cert;
}

OrthogonalAlignment align_coordinate_maps(const std::vector<Vec>& f1,
                                          const std::vector<Vec>& f2,
                                          const std::vector<Index>& common) {
    require(!common.empty(), "alignment needs common points");
    const int n = static_cast<int>(f1.at(common[0]).size());
    require(static_cast<int>(common.size()) >= n, "alignment underdetermined");
    Mat cross = Mat::Zero(n, n);
    for (Index i : common) cross += f1[i] * f2[i].transpose();
    Eigen::JacobiSVD<Mat> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (svd.singularValues().minCoeff() < 1e-12 * std::max(1.0, svd.singularValues().maxCoeff()))
        throw Error("alignment underdetermined");
    OrthogonalAlignment out;
    out.rotation = svd.matrixU() * svd.matrixV().transpose();
    double r = 0.0;
    for (Index i : common) r = std::max(r, (f1[i] - out.rotation * f2[i]).norm());
    out.residual = r;
    return out;
}

ClosenessScan closeness_to_Rn_scan(const FiniteMetricSpace& x, double r, int n) {
    require(r > 0.0, "scan radius must be positive");
    ClosenessScan scan;
    scan.delta_a.resize(x.size());
    for (Index c = 0; c < x.size(); ++c) {
        CenteredBall ball = extract_ball(x, c, r);
        ball.space = ball.space.rescaled(1.0 / r);
        GHCertificate cert = ghdist_to_ball(ball, n);
        scan.delta_a[c] = r * cert.delta_a;
        if (scan.delta_a[c] > scan.max_delta_a) {
            scan.max_delta_a = scan.delta_a[c];
            scan.argmax = c;
        }
    }
    return scan;
}

}  // namespace recon
