#include "recon/flat_fit.hpp"

#include <algorithm>

#include "recon/json_util.hpp"
#include "recon/nn_grid.hpp"

namespace recon {

void FlatnessCertificate::to_json_file(const std::string& path) const {
    nlohmann::json j;
    j["scale"] = scale;
    j["dim"] = dim;
    j["max_defect"] = max_defect;
    nlohmann::json es = nlohmann::json::array();
    for (const auto& e : entries) {
        nlohmann::json je;
        je["center"] = e.center;
        je["defect"] = e.defect;
        je["degenerate"] = e.degenerate;
        if (!e.degenerate) {
            je["base"] = vec_to_json(e.disc.base);
            je["frame"] = mat_to_json(e.disc.frame);
        }
        es.push_back(je);
    }
    j["entries"] = es;
    save_json(path, j);
}

FindDiscResult find_disc(const PointCloud& neighborhood, const Vec& center, int n) {
    const int m = neighborhood.size();
    const int N = neighborhood.ambient_dim;
    require(n >= 1 && n <= N, "disc dimension out of range");

    // Count points distinct from the center.
    int usable = 0;
    for (const Vec& p : neighborhood.points)
        if ((p - center).norm() > 0.0) ++usable;
    require(usable >= n, "degenerate neighborhood: not enough points");

    FindDiscResult res;
    std::vector<Vec> units;  // x_i/|x_i| with the center at the origin
    for (int k = 0; k < n; ++k) {
        int best = -1;
        double bestval = kInf;
        for (int i = 0; i < m; ++i) {
            Vec rel = neighborhood.points[i] - center;
            double t = rel.norm();
            if (t == 0.0) continue;
            double val = std::abs(1.0 - t);
            for (const Vec& u : units) val = std::max(val, std::abs(u.dot(rel)));
            if (val < bestval) {
                bestval = val;
                best = i;
            }
        }
        res.selected.push_back(best);
        Vec rel = neighborhood.points[best] - center;
        units.push_back(rel / rel.norm());
    }

    Mat sel(N, n);
    for (int k = 0; k < n; ++k) sel.col(k) = neighborhood.points[res.selected[k]] - center;
    res.raw_gram = sel.transpose() * sel;
    Eigen::JacobiSVD<Mat> svd(sel);
    res.min_singular = svd.singularValues().minCoeff();
    if (res.min_singular < 1e-4) throw Error("degenerate neighborhood");

    // Modified Gram-Schmidt; the span equals that of the raw selection.
    Mat frame(N, n);
    for (int k = 0; k < n; ++k) {
        Vec v = sel.col(k);
        for (int l = 0; l < k; ++l) v -= frame.col(l).dot(v) * frame.col(l);
        frame.col(k) = v / v.norm();
    }
    res.disc.base = center;
    res.disc.frame = frame;
    return res;
}

namespace {

// Deterministic samples of the disc A \cap B_r(base): grid for n <= 3,
// Halton points for larger n. Returns samples and the pitch used.
std::pair<std::vector<Vec>, double> disc_samples(const AffineSubspace& disc, double r,
                                                 double pitch_fraction) {
    const int n = disc.dim();
    std::vector<Vec> out;
    double pitch = r * pitch_fraction;
    if (n <= 3) {
        int m = static_cast<int>(std::floor(1.0 / pitch_fraction));
        std::vector<int> idx(n, -m);
        while (true) {
            Vec c(n);
            for (int k = 0; k < n; ++k) c[k] = idx[k] * pitch;
            if (c.norm() <= r) out.push_back(disc.base + disc.frame * c);
            int k = 0;
            while (k < n && ++idx[k] > m) idx[k++] = -m;
            if (k == n) break;
        }
    } else {
        auto halton = [](int i, int base) {
            double f = 1.0, v = 0.0;
            while (i > 0) {
                f /= base;
                v += f * (i % base);
                i /= base;
            }
            return v;
        };
        const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19};
        int count = 0, i = 1;
        while (count < 10000) {
            Vec c(n);
            for (int k = 0; k < n; ++k) c[k] = r * (2.0 * halton(i, primes[k % 8]) - 1.0);
            ++i;
            if (c.norm() <= r) {
                out.push_back(disc.base + disc.frame * c);
                ++count;
            }
        }
        pitch = r * std::pow(1.0 / 10000.0, 1.0 / n) * 2.0;
    }
    return {out, pitch};
}

}  // namespace

double disc_hausdorff_defect(const PointCloud& neighborhood, const AffineSubspace& disc,
                             double r, double pitch_fraction) {
    // Points -> disc: exact.
    double side_points = 0.0;
    for (const Vec& p : neighborhood.points)
        side_points = std::max(side_points, disc.disc_distance(p, r));

    // Disc -> points: discretized, pitch added as margin.
    auto [samples, pitch] = disc_samples(disc, r, pitch_fraction);
    double side_disc = 0.0;
    if (!neighborhood.points.empty()) {
        NnGrid nn(neighborhood.points, std::max(pitch, r / 8.0));
        for (const Vec& s : samples) side_disc = std::max(side_disc, nn.nearest(s).second);
    } else {
        side_disc = kInf;
    }
    return std::max(side_points, side_disc + pitch);
}

FlatnessCertificate flatness_scan(const PointCloud& x, double r, int n,
                                  const std::vector<Index>& centers) {
    require(r > 0.0, "scan radius must be positive");
    FlatnessCertificate cert;
    cert.scale = r;
    cert.dim = n;
    std::vector<Index> cs = centers;
    if (cs.empty())
        for (int i = 0; i < x.size(); ++i) cs.push_back(i);

    NnGrid nn(x.points, r);
    for (Index c : cs) {
        FlatnessEntry e;
        e.center = c;
        const Vec& p = x.points[c];
        // Rescale the neighborhood to unit radius around the center.
        PointCloud local(x.ambient_dim);
        for (int i : nn.within(p, r)) local.add((x.points[i] - p) / r);
        try {
            FindDiscResult fd = find_disc(local, Vec::Zero(x.ambient_dim), n);
            double defect = disc_hausdorff_defect(local, fd.disc, 1.0);
            e.defect = defect * r;
            e.disc.base = p;
            e.disc.frame = fd.disc.frame;
        } catch (const Error&) {
            e.degenerate = true;
            e.defect = kInf;
        }
        cert.entries.push_back(e);
    }
    cert.max_defect = 0.0;
    for (const auto& e : cert.entries) cert.max_defect = std::max(cert.max_defect, e.defect);
    return cert;
}

}  // namespace recon
