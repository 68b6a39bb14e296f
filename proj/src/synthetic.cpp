#include "recon/synthetic.hpp"

namespace recon {

SyntheticSpec SyntheticSpec::from_json(const nlohmann::json& j) {
    SyntheticSpec s;
    s.family = j.at("family").get<std::string>();
    s.radius = j.value("radius", j.value("side", 1.0));
    s.count = j.value("count", 1000);
    s.noise = j.value("noise", 0.0);
    s.metric_kind = j.value("metric_kind", "geodesic");
    if (j.contains("censor_cutoff") && !j["censor_cutoff"].is_null())
        s.censor_cutoff = j["censor_cutoff"].get<double>();
    s.censor_delta_hat = j.value("censor_delta_hat", 0.0);
    s.seed = j.value("seed", 0);
    return s;
}

nlohmann::json SyntheticSpec::to_json() const {
    nlohmann::json j;
    j["family"] = family;
    j["radius"] = radius;
    j["count"] = count;
    j["noise"] = noise;
    j["metric_kind"] = metric_kind;
    j["censor_cutoff"] = censor_cutoff ? nlohmann::json(*censor_cutoff) : nlohmann::json();
    j["censor_delta_hat"] = censor_delta_hat;
    j["seed"] = seed;
    return j;
}

namespace {

// Censoring model: sub-cutoff entries keep their (noisy) value, everything
// else is recorded as the cutoff sentinel, a lower bound only.
FiniteMetricSpace censor(Mat d, const SyntheticSpec& spec, Rng& rng) {
    if (!spec.censor_cutoff) return FiniteMetricSpace(std::move(d));
    const double cut = *spec.censor_cutoff;
    const double dh = spec.censor_delta_hat;
    std::uniform_real_distribution<double> uni(-dh, dh);
    for (Eigen::Index i = 0; i < d.rows(); ++i)
        for (Eigen::Index j = i + 1; j < d.cols(); ++j) {
            double v = d(i, j);
            if (v >= cut) {
                v = cut;
            } else if (dh > 0.0) {
                v = std::clamp(v + uni(rng), 0.0, cut * (1.0 - 1e-12));
            }
            d(i, j) = d(j, i) = v;
        }
    return FiniteMetricSpace(std::move(d), cut, cut);
}

}  // namespace

SyntheticOutput generate(const SyntheticSpec& spec) {
    SyntheticOutput out;
    Rng rng(spec.seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    nlohmann::json& gt = out.ground_truth;
    gt["spec"] = spec.to_json();

    if (spec.family == "flat-ball") {
        // Near-square grid filling the disc of the requested radius.
        const double spacing = spec.radius * std::sqrt(M_PI / spec.count);
        out.cloud = PointCloud(2);
        int m = static_cast<int>(spec.radius / spacing) + 1;
        for (int a = -m; a <= m; ++a)
            for (int b = -m; b <= m; ++b) {
                Vec p(2);
                p << a * spacing, b * spacing;
                if (p.norm() > spec.radius) continue;
                if (spec.noise > 0.0) {
                    p[0] += uni(rng) * spec.noise;
                    p[1] += uni(rng) * spec.noise;
                }
                out.cloud.points.push_back(p);
            }
        gt["curvature"] = 0.0;
        gt["dim"] = 2;
    } else if (spec.family == "circle") {
        out.cloud = PointCloud(2);
        for (int k = 0; k < spec.count; ++k) {
            double ang = 2.0 * M_PI * k / spec.count;
            double rad = spec.radius + (spec.noise > 0.0 ? uni(rng) * spec.noise : 0.0);
            Vec p(2);
            p << rad * std::cos(ang), rad * std::sin(ang);
            out.cloud.points.push_back(p);
        }
        gt["curvature"] = 1.0 / spec.radius;
        gt["dim"] = 1;
    } else if (spec.family == "sphere") {
        out.cloud = PointCloud(3);
        // Fibonacci lattice: deterministic, near-uniform.
        const double golden = M_PI * (3.0 - std::sqrt(5.0));
        std::vector<Vec> unit;
        for (int k = 0; k < spec.count; ++k) {
            double z = 1.0 - 2.0 * (k + 0.5) / spec.count;
            double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            double ang = golden * k;
            Vec u(3);
            u << r * std::cos(ang), r * std::sin(ang), z;
            unit.push_back(u);
        }
        for (const Vec& u : unit) {
            double rad = spec.radius + (spec.noise > 0.0 ? uni(rng) * spec.noise : 0.0);
            out.cloud.points.push_back(rad * u);
        }
        Mat d(spec.count, spec.count);
        for (int i = 0; i < spec.count; ++i) {
            d(i, i) = 0.0;
            for (int j = i + 1; j < spec.count; ++j) {
                double v;
                if (spec.metric_kind == "chordal") {
                    v = (out.cloud.points[i] - out.cloud.points[j]).norm();
                } else {
                    double c = std::clamp(unit[i].dot(unit[j]), -1.0, 1.0);
                    v = spec.radius * std::acos(c);
                }
                d(i, j) = d(j, i) = v;
            }
        }
        out.metric = censor(std::move(d), spec, rng);
        gt["curvature"] = 1.0 / sqr(spec.radius);
        gt["injectivity_radius"] = M_PI * spec.radius;
        gt["dim"] = 2;
    } else if (spec.family == "flat-torus") {
        const int side_pts = static_cast<int>(std::lround(std::sqrt(double(spec.count))));
        require(side_pts * side_pts == spec.count, "flat-torus count must be a square");
        const double L = spec.radius;
        auto wrap = [L](double t) {
            t = std::fmod(std::abs(t), L);
            return std::min(t, L - t);
        };
        const double h = L / side_pts;
        Mat d(spec.count, spec.count);
        std::vector<std::pair<double, double>> pts;
        for (int a = 0; a < side_pts; ++a)
            for (int b = 0; b < side_pts; ++b) pts.push_back({a * h, b * h});
        for (int i = 0; i < spec.count; ++i) {
            d(i, i) = 0.0;
            for (int j = i + 1; j < spec.count; ++j) {
                double v = std::hypot(wrap(pts[static_cast<size_t>(i)].first - pts[static_cast<size_t>(j)].first),
                                      wrap(pts[static_cast<size_t>(i)].second - pts[static_cast<size_t>(j)].second));
                if (spec.noise > 0.0) v = std::max(0.0, v + uni(rng) * spec.noise);
                d(i, j) = d(j, i) = v;
            }
        }
        out.metric = censor(std::move(d), spec, rng);
        gt["curvature"] = 0.0;
        gt["injectivity_radius"] = L / 2.0;
        gt["dim"] = 2;
    } else if (spec.family == "swiss-roll") {
        out.cloud = PointCloud(3);
        const int rows = static_cast<int>(std::sqrt(double(spec.count)));
        for (int k = 0; k < spec.count; ++k) {
            double t = 1.5 * M_PI + 3.0 * M_PI * ((k % rows) + 0.5) / rows;
            double y = spec.radius * ((k / rows) + 0.5) / rows;
            Vec p(3);
            p << 0.1 * t * std::cos(t), y, 0.1 * t * std::sin(t);
            if (spec.noise > 0.0)
                for (int c = 0; c < 3; ++c) p[c] += uni(rng) * spec.noise;
            out.cloud.points.push_back(p);
        }
        gt["dim"] = 2;
    } else {
        throw Error("unknown synthetic family: " + spec.family);
    }
    return out;
}

}  // namespace recon
