#include "recon/metric_field.hpp"

#include "recon/json_util.hpp"
#include "recon/parallel.hpp"

namespace recon {

std::vector<Mat> christoffel(const MetricSource& field, const Vec& x, double h) {
    const int n = field.dim();
    Mat g;
    require(field.eval(x, &g), "christoffel: point outside chart domain");
    Mat ginv = g.inverse();

    // dg[k](i,j) = d g_ij / d x_k by central differences.
    std::vector<Mat> dg(n);
    for (int k = 0; k < n; ++k) {
        Mat gp, gm;
        Vec xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        require(field.eval(xp, &gp) && field.eval(xm, &gm),
                "christoffel: stencil leaves chart domain");
        dg[k] = (gp - gm) / (2.0 * h);
    }

    std::vector<Mat> gamma(n, Mat::Zero(n, n));
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                double s = 0.0;
                for (int l = 0; l < n; ++l)
                    s += ginv(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
                gamma[k](i, j) = gamma[k](j, i) = 0.5 * s;
            }
    return gamma;
}

namespace {

double sectional_once(const MetricSource& field, const Vec& x, const Vec& u, const Vec& v,
                      double h) {
    const int n = field.dim();
    Mat g;
    require(field.eval(x, &g), "sectional: point outside chart domain");

    std::vector<Mat> gamma0 = christoffel(field, x, h);
    // dGamma[i][k](j,l) = d Gamma^k_{jl} / d x_i
    std::vector<std::vector<Mat>> dgamma(n);
    for (int i = 0; i < n; ++i) {
        Vec xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        auto gp = christoffel(field, xp, h);
        auto gm = christoffel(field, xm, h);
        dgamma[i].resize(n);
        for (int k = 0; k < n; ++k) dgamma[i][k] = (gp[k] - gm[k]) / (2.0 * h);
    }

    // R(u,v)w with w = v, then <R(u,v)v, u>_g.
    // R^l_{kij} = d_i Gamma^l_{jk} - d_j Gamma^l_{ik}
    //           + Gamma^l_{im} Gamma^m_{jk} - Gamma^l_{jm} Gamma^m_{ik}
    Vec Rw = Vec::Zero(n);
    for (int l = 0; l < n; ++l) {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    double term = dgamma[i][l](j, k) - dgamma[j][l](i, k);
                    for (int m = 0; m < n; ++m)
                        term += gamma0[l](i, m) * gamma0[m](j, k) -
                                gamma0[l](j, m) * gamma0[m](i, k);
                    s += term * u[i] * v[j] * v[k];
                }
        Rw[l] = s;
    }
    double num = u.dot(g * Rw);
    double uu = u.dot(g * u), vv = v.dot(g * v), uv = u.dot(g * v);
    double den = uu * vv - uv * uv;
    require(den > 1e-14, "sectional: degenerate plane");
    return num / den;
}

}  // namespace

SectionalResult sectional_curvature(const MetricSource& field, const Vec& x, const Vec& u,
                                    const Vec& v, double h) {
    SectionalResult out;
    double sh = sectional_once(field, x, u, v, h);
    double sh2;
    try {
        sh2 = sectional_once(field, x, u, v, 0.5 * h);
    } catch (const Error&) {
        out.value = sh;
        out.error_estimate = std::abs(sh) * 0.5;
        out.reliable = false;
        return out;
    }
    out.value = sh2;
    out.error_estimate = std::abs(sh - sh2) / 3.0;  // second-order differencing
    out.reliable = std::abs(sh - sh2) <= 0.2 * std::abs(sh2) + 1e-3;
    return out;
}

void CurvatureReport::to_json_file(const std::string& path) const {
    nlohmann::json j;
    j["max_abs_sec"] = max_abs_sec;
    j["unreliable"] = unreliable;
    nlohmann::json ps = nlohmann::json::array();
    for (const auto& p : probes)
        ps.push_back({{"chart", p.chart},
                      {"point", vec_to_json(p.point)},
                      {"sec", p.sec},
                      {"error_estimate", p.error_estimate},
                      {"reliable", p.reliable}});
    j["probes"] = ps;
    save_json(path, j);
}

CurvatureReport curvature_scan(const Atlas& atlas, int probes_per_chart) {
    CurvatureReport rep;
    const int n = atlas.dim;
    const int J = static_cast<int>(atlas.grids.size());
    std::vector<std::vector<CurvatureProbe>> parts(static_cast<size_t>(J));

    parallel_for(J, 0, [&](int j) {
        ChartMetric field(atlas, j);
        const double h = std::max(3.0 * field.grid_pitch(), 1e-3);
        Rng rng(1234 + static_cast<uint64_t>(j));
        std::uniform_real_distribution<double> uni(-1.0, 1.0);
        for (int p = 0; p < probes_per_chart; ++p) {
            CurvatureProbe probe;
            probe.chart = j;
            Vec x = Vec::Zero(n);
            if (p > 0) {
                for (int k = 0; k < n; ++k) x[k] = uni(rng) * atlas.radius_publish() * 0.5;
            }
            probe.point = x;
            Vec u = Vec::Unit(n, 0), v = Vec::Unit(n, n > 1 ? 1 : 0);
            if (n < 2) continue;
            try {
                auto res = sectional_curvature(field, x, u, v, h);
                probe.sec = res.value / sqr(atlas.scale);
                probe.error_estimate = res.error_estimate / sqr(atlas.scale);
                probe.reliable = res.reliable;
            } catch (const Error&) {
                probe.reliable = false;
            }
            parts[static_cast<size_t>(j)].push_back(probe);
        }
    });
    for (const auto& part : parts)
        for (const auto& p : part) {
            rep.probes.push_back(p);
            if (p.reliable)
                rep.max_abs_sec = std::max(rep.max_abs_sec, std::abs(p.sec));
            else
                ++rep.unreliable;
        }
    return rep;
}

}  // namespace recon
