#include "recon/geodesics.hpp"

#include <fstream>
#include <queue>

namespace recon {

namespace {

// Metric and its spatial gradient from the multilinear grid interpolant.
bool metric_and_grad(const Atlas& atlas, int j, const Vec& xc, Mat* g, std::vector<Mat>* dg) {
    const ChartGrid& gr = atlas.grids[j];
    const int n = atlas.dim;
    std::vector<int> lo(n);
    Vec frac(n);
    for (int k = 0; k < n; ++k) {
        double pos = xc[k] / gr.pitch;
        lo[k] = static_cast<int>(std::floor(pos));
        frac[k] = pos - lo[k];
        if (lo[k] < -gr.half || lo[k] + 1 > gr.half) return false;
    }
    *g = Mat::Zero(n, n);
    dg->assign(static_cast<size_t>(n), Mat::Zero(n, n));
    for (int corner = 0; corner < (1 << n); ++corner) {
        std::vector<int> idx(n);
        double w = 1.0;
        for (int k = 0; k < n; ++k) {
            int bit = (corner >> k) & 1;
            idx[k] = lo[k] + bit;
            w *= bit ? frac[k] : 1.0 - frac[k];
        }
        const MetricNode& node = gr.nodes[gr.node_index(idx)];
        if (!node.valid) return false;
        *g += w * node.g;
        for (int k = 0; k < n; ++k) {
            double wd = 1.0 / gr.pitch;
            for (int l = 0; l < n; ++l) {
                int bit = (corner >> l) & 1;
                if (l == k)
                    wd *= bit ? 1.0 : -1.0;
                else
                    wd *= bit ? frac[l] : 1.0 - frac[l];
            }
            (*dg)[static_cast<size_t>(k)] += wd * node.g;
        }
    }
    return true;
}

struct Deriv {
    Vec dx, dp;
};

bool hamilton_rhs(const Atlas& atlas, int j, const Vec& x, const Vec& p, Deriv* out) {
    Mat g;
    std::vector<Mat> dg;
    if (!metric_and_grad(atlas, j, x, &g, &dg)) return false;
    Mat ginv = g.inverse();
    out->dx = ginv * p;
    out->dp = Vec(x.size());
    for (int k = 0; k < x.size(); ++k)
        out->dp[k] = 0.5 * out->dx.dot(dg[static_cast<size_t>(k)] * out->dx);
    return true;
}

}  // namespace

GeodesicTrace geodesic_trace(const Atlas& atlas, const GeodesicState& start, double length,
                             const GeodesicOptions& opts) {
    GeodesicTrace trace;
    const int n = atlas.dim;
    const double pitch = atlas.grids.empty() ? 0.01 : atlas.grids[0].pitch;
    const double h = opts.step > 0.0 ? opts.step : pitch / 3.0;

    int j = start.chart;
    Vec x = start.position;
    Mat g;
    require(atlas.metric_at(j, x, &g), "geodesic start outside chart domain");
    Vec v = start.velocity;
    double vnorm = std::sqrt(v.dot(g * v));
    require(vnorm > 0.0, "zero start velocity");
    v /= vnorm;
    Vec p = g * v;
    const double energy0 = 0.5;  // (1/2)|v|_g^2 after normalization

    double s = 0.0;
    double last_record = -kInf;
    int step_count = 0;
    const double handoff_zone = atlas.radius_publish() - atlas.kappa / 60.0;

    auto record = [&]() {
        Mat gg;
        if (!atlas.metric_at(j, x, &gg)) return;
        Vec vel = gg.inverse() * p;
        trace.states.push_back({j, x, vel, s});
    };
    record();
    last_record = 0.0;

    while (s < length) {
        // Hand-off when near the publish boundary and a closer chart exists.
        if (step_count % opts.handoff_stride == 0 && x.norm() > handoff_zone) {
            const MetricNode* node = nullptr;
            std::vector<int> idx(static_cast<size_t>(n));
            for (int k = 0; k < n; ++k)
                idx[static_cast<size_t>(k)] =
                    static_cast<int>(std::lround(x[k] / atlas.grids[j].pitch));
            node = atlas.node_at(j, idx);
            if (node) {
                int best = -1;
                double best_t = x.norm() - 1e-3;
                Vec besty;
                Mat bestdy;
                for (size_t o = 0; o < node->over.size(); ++o) {
                    Vec y;
                    Mat dy;
                    if (!atlas.stored_transition(j, x, node->over[o], &y, &dy)) continue;
                    if (y.norm() < best_t) {
                        best_t = y.norm();
                        best = node->over[o];
                        besty = y;
                        bestdy = dy;
                    }
                }
                if (best >= 0) {
                    Mat gg;
                    if (atlas.metric_at(best, besty, &gg)) {
                        Vec vel = Mat(g.inverse()) * p;  // current chart velocity
                        Mat gcur;
                        if (atlas.metric_at(j, x, &gcur)) vel = gcur.inverse() * p;
                        Vec vnew = bestdy * vel;
                        j = best;
                        x = besty;
                        p = gg * vnew;
                    }
                }
            }
        }

        // RK4 step in Hamiltonian form.
        Deriv k1, k2, k3, k4;
        bool ok = hamilton_rhs(atlas, j, x, p, &k1) &&
                  hamilton_rhs(atlas, j, x + 0.5 * h * k1.dx, p + 0.5 * h * k1.dp, &k2) &&
                  hamilton_rhs(atlas, j, x + 0.5 * h * k2.dx, p + 0.5 * h * k2.dp, &k3) &&
                  hamilton_rhs(atlas, j, x + h * k3.dx, p + h * k3.dp, &k4);
        if (!ok) {
            trace.fell_off = true;
            break;
        }
        x += (h / 6.0) * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
        p += (h / 6.0) * (k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp);
        s += h;
        ++step_count;

        Mat gg;
        if (!atlas.metric_at(j, x, &gg)) {
            trace.fell_off = true;
            break;
        }
        Vec vel = gg.inverse() * p;
        double energy = 0.5 * vel.dot(gg * vel);
        if (s > 0.0)
            trace.energy_drift =
                std::max(trace.energy_drift, std::abs(energy - energy0) / energy0 / s);
        if (s - last_record >= opts.record_every) {
            record();
            last_record = s;
        }
    }
    Mat gg;
    Vec vel = Vec::Zero(n);
    if (atlas.metric_at(j, x, &gg)) vel = gg.inverse() * p;
    trace.final = {j, x, vel, s};
    if (trace.states.empty() || trace.states.back().length < s) trace.states.push_back(trace.final);
    return trace;
}

const NormalGrid::Node* NormalGrid::at(const std::vector<int>& idx) const {
    int s = 0;
    for (int k = static_cast<int>(idx.size()) - 1; k >= 0; --k) {
        if (idx[static_cast<size_t>(k)] < -half || idx[static_cast<size_t>(k)] > half)
            return nullptr;
        s = s * per_axis() + (idx[static_cast<size_t>(k)] + half);
    }
    return nodes[static_cast<size_t>(s)].valid ? &nodes[static_cast<size_t>(s)] : nullptr;
}

NormalGrid exp_and_normal_coordinates(const Atlas& atlas, int chart, const Vec& x0, double rho,
                                      double pitch, const GeodesicOptions& opts) {
    const int n = atlas.dim;
    NormalGrid grid;
    grid.pitch = pitch;
    grid.half = static_cast<int>(std::floor(rho / pitch));
    grid.dim = n;
    int total = 1;
    for (int k = 0; k < n; ++k) total *= grid.per_axis();
    grid.nodes.assign(static_cast<size_t>(total), {});

    Mat g0;
    require(atlas.metric_at(chart, x0, &g0), "base point outside chart domain");
    // g0-orthonormal basis: columns of B with B^T g0 B = I.
    Eigen::SelfAdjointEigenSolver<Mat> es(g0);
    Mat B = es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal();

    // Shoot one geodesic per node.
    std::vector<int> idx(static_cast<size_t>(n), -grid.half);
    while (true) {
        Vec y(n);
        for (int k = 0; k < n; ++k) y[k] = idx[static_cast<size_t>(k)] * pitch;
        int flat = 0;
        for (int k = n - 1; k >= 0; --k) flat = flat * grid.per_axis() + (idx[static_cast<size_t>(k)] + grid.half);
        if (y.norm() <= rho) {
            NormalGrid::Node node;
            if (y.norm() < 1e-12) {
                node.valid = true;
                node.chart = chart;
                node.position = x0;
            } else {
                GeodesicState st{chart, x0, B * (y / y.norm()), 0.0};
                GeodesicTrace tr = geodesic_trace(atlas, st, y.norm(), opts);
                if (!tr.fell_off) {
                    node.valid = true;
                    node.chart = tr.final.chart;
                    node.position = tr.final.position;
                }
            }
            grid.nodes[static_cast<size_t>(flat)] = std::move(node);
        }
        int k = 0;
        while (k < n && ++idx[static_cast<size_t>(k)] > grid.half) idx[static_cast<size_t>(k)] = -grid.half;
        if (k == n) break;
    }

    // Metric in normal coordinates by differencing neighbor positions into a
    // common chart: columns J_a = d exp / d y_a, then g_N = J^T g J.
    std::vector<int> it(static_cast<size_t>(n), -grid.half);
    while (true) {
        int flat = 0;
        for (int k = n - 1; k >= 0; --k) flat = flat * grid.per_axis() + (it[static_cast<size_t>(k)] + grid.half);
        NormalGrid::Node& node = grid.nodes[static_cast<size_t>(flat)];
        if (node.valid) {
            Mat J(n, n);
            bool ok = true;
            for (int a = 0; a < n && ok; ++a) {
                std::vector<int> ip = it, im = it;
                ip[static_cast<size_t>(a)] += 1;
                im[static_cast<size_t>(a)] -= 1;
                const NormalGrid::Node* np = grid.at(ip);
                const NormalGrid::Node* nm = grid.at(im);
                double den = 2.0 * pitch;
                // One-sided at the rim.
                if (!np) {
                    np = &node;
                    den = pitch;
                }
                if (!nm) {
                    nm = &node;
                    den = pitch;
                }
                if (np == nm) {
                    ok = false;
                    break;
                }
                // Bring both into node.chart coordinates.
                Vec pp = np->position, pm = nm->position;
                Mat dummy;
                if (np->chart != node.chart &&
                    !atlas.stored_transition(np->chart, np->position, node.chart, &pp, &dummy))
                    ok = false;
                if (ok && nm->chart != node.chart &&
                    !atlas.stored_transition(nm->chart, nm->position, node.chart, &pm, &dummy))
                    ok = false;
                if (ok) J.col(a) = (pp - pm) / den;
            }
            Mat g;
            if (ok && atlas.metric_at(node.chart, node.position, &g))
                node.g = J.transpose() * g * J;
            else
                node.valid = false;
        }
        int k = 0;
        while (k < n && ++it[static_cast<size_t>(k)] > grid.half) it[static_cast<size_t>(k)] = -grid.half;
        if (k == n) break;
    }
    return grid;
}

void SliceGrid::to_csv_file(const std::string& path) const {
    std::ofstream out(path);
    require(out.good(), "cannot write " + path);
    out << "s1,s2,detg,mask\n";
    out.precision(17);
    const int pa = 2 * half + 1;
    for (int b = -half; b <= half; ++b)
        for (int a = -half; a <= half; ++a) {
            double v = detg[static_cast<size_t>((b + half) * pa + (a + half))];
            out << a * pitch << "," << b * pitch << "," << (v < 0 ? 0.0 : v) << ","
                << (v < 0 ? 1 : 0) << "\n";
        }
}

SliceGrid slice_map(const Atlas& atlas, int chart, const Vec& x0, const Vec& xi1, const Vec& xi2,
                    double rho, int resolution, const GeodesicOptions& opts) {
    require(atlas.dim == 2, "slice_map is implemented for 2-dimensional atlases");
    Mat g0;
    require(atlas.metric_at(chart, x0, &g0), "base point outside chart domain");
    // Check g-independence of the slice directions.
    Mat pair(2, 2);
    pair << xi1.dot(g0 * xi1), xi1.dot(g0 * xi2), xi2.dot(g0 * xi1), xi2.dot(g0 * xi2);
    require(pair.determinant() > 1e-12, "slice directions are g-dependent");

    SliceGrid out;
    out.half = resolution / 2;
    out.pitch = rho / out.half;
    NormalGrid ng = exp_and_normal_coordinates(atlas, chart, x0, rho * 1.05, out.pitch, opts);
    const int pa = 2 * out.half + 1;
    out.detg.assign(static_cast<size_t>(pa) * pa, -1.0);
    for (int b = -out.half; b <= out.half; ++b)
        for (int a = -out.half; a <= out.half; ++a) {
            std::vector<int> idx{a, b};
            const NormalGrid::Node* node = ng.at(idx);
            size_t flat = static_cast<size_t>((b + out.half) * pa + (a + out.half));
            if (node && node->valid && node->g.size() > 0)
                out.detg[flat] = node->g.determinant();
            else
                ++out.masked;
        }
    return out;
}

InjectivityEstimate injectivity_radius_probe(const Atlas& atlas, int chart, const Vec& x0,
                                             double rho_max, int fan,
                                             const GeodesicOptions& opts) {
    require(atlas.dim == 2, "injectivity probe is implemented for 2-dimensional atlases");
    InjectivityEstimate est;
    const double pitch = atlas.grids[chart].pitch;
    const double h = opts.step > 0.0 ? opts.step : pitch / 3.0;
    const double tube = 3.0 * h;

    Mat g0;
    require(atlas.metric_at(chart, x0, &g0), "probe base outside chart domain");
    Eigen::SelfAdjointEigenSolver<Mat> es(g0);
    Mat B = es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal();

    const double shell_step = 2.0 * tube;
    const int nshell = static_cast<int>(rho_max / shell_step);
    // states[r][shell]
    std::vector<std::vector<GeodesicState>> shells(static_cast<size_t>(fan));
    GeodesicOptions shot = opts;
    shot.record_every = shell_step;
    shot.step = h;

    double fell_at = kInf;
    for (int r = 0; r < fan; ++r) {
        double ang = 2.0 * M_PI * r / fan;
        Vec dir = B * Vec(Eigen::Vector2d(std::cos(ang), std::sin(ang)));
        GeodesicTrace tr = geodesic_trace(atlas, {chart, x0, dir, 0.0}, rho_max, shot);
        shells[static_cast<size_t>(r)] = tr.states;
        if (tr.fell_off) fell_at = std::min(fell_at, tr.final.length);

        // Loop detection: the trace re-enters the start tube away from 0.
        for (const GeodesicState& st : tr.states) {
            if (st.length < 4.0 * tube) continue;
            double d = kInf;
            if (st.chart == chart) {
                d = (st.position - x0).norm();
            } else {
                Vec y;
                Mat dy;
                if (atlas.stored_transition(st.chart, st.position, chart, &y, &dy))
                    d = (y - x0).norm();
            }
            if (d < tube) {
                est.loop_length = std::min(est.loop_length, st.length + 0.0);
                break;
            }
        }
    }

    // Exponential-map injectivity on radius shells: distinct directions whose
    // images nearly collide.
    double first_violation = kInf;
    for (int sidx = 2; sidx <= nshell; ++sidx) {
        double s = sidx * shell_step;
        if (s >= first_violation) break;
        std::vector<const GeodesicState*> pts;
        std::vector<int> rays;
        for (int r = 0; r < fan; ++r) {
            for (const GeodesicState& st : shells[static_cast<size_t>(r)])
                if (std::abs(st.length - s) <= 0.5 * shell_step + 1e-12) {
                    pts.push_back(&st);
                    rays.push_back(r);
                    break;
                }
        }
        for (size_t a = 0; a < pts.size() && s < first_violation; ++a)
            for (size_t b = a + 1; b < pts.size(); ++b) {
                int dr = std::abs(rays[a] - rays[b]);
                dr = std::min(dr, fan - dr);
                if (dr * 2.0 * M_PI / fan < 0.3) continue;  // neighbor rays
                double d = kInf;
                if (pts[a]->chart == pts[b]->chart) {
                    d = (pts[a]->position - pts[b]->position).norm();
                } else {
                    Vec y;
                    Mat dy;
                    if (atlas.stored_transition(pts[b]->chart, pts[b]->position, pts[a]->chart,
                                                &y, &dy))
                        d = (y - pts[a]->position).norm();
                }
                if (d < tube) {
                    first_violation = s;
                    break;
                }
            }
    }

    double lower = std::min({rho_max, est.loop_length / 2.0, first_violation, fell_at});
    est.hit_probe_limit = lower >= rho_max;
    est.lower = lower * atlas.scale;
    est.loop_length *= atlas.scale;
    return est;
}

BallComparison ball_comparison_check(const Atlas& atlas, int chart, const Vec& x0, double r,
                                     double k_claim, int fan, const GeodesicOptions& opts) {
    require(atlas.dim == 2, "ball comparison is implemented for 2-dimensional atlases");
    BallComparison out;
    const double rhat = r / atlas.scale;  // unit-scale ball radius
    const int rings = 10;
    const double ring_step = rhat / rings;
    out.pitch = ring_step * atlas.scale;

    Mat g0;
    require(atlas.metric_at(chart, x0, &g0), "ball center outside chart domain");
    Eigen::SelfAdjointEigenSolver<Mat> es(g0);
    Mat B = es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal();

    // Polar samples: center + fan x rings, with exact radial distances.
    struct Sample {
        int chart;
        Vec pos;
        int ray;
        int ring;  // 1-based
    };
    std::vector<Sample> samples;
    samples.push_back({chart, x0, -1, 0});
    GeodesicOptions shot = opts;
    shot.record_every = ring_step;
    for (int rr = 0; rr < fan; ++rr) {
        double ang = 2.0 * M_PI * rr / fan;
        Vec dir = B * Vec(Eigen::Vector2d(std::cos(ang), std::sin(ang)));
        GeodesicTrace tr = geodesic_trace(atlas, {chart, x0, dir, 0.0}, rhat, shot);
        for (int ring = 1; ring <= rings; ++ring) {
            double target = ring * ring_step;
            const GeodesicState* bestst = nullptr;
            double besterr = kInf;
            for (const GeodesicState& st : tr.states) {
                double e = std::abs(st.length - target);
                if (e < besterr) {
                    besterr = e;
                    bestst = &st;
                }
            }
            if (bestst && besterr <= 0.51 * ring_step)
                samples.push_back({bestst->chart, bestst->position, rr, ring});
        }
    }

    // Pairwise distances: Dijkstra over a neighbor graph with metric edge
    // lengths; radial distances from the center are exact by construction.
    const int m = static_cast<int>(samples.size());
    std::vector<std::vector<std::pair<int, double>>> adj(static_cast<size_t>(m));
    auto chart_dist = [&](const Sample& a, const Sample& b, double* d) {
        Vec pb = b.pos;
        Mat dum;
        if (a.chart != b.chart &&
            !atlas.stored_transition(b.chart, b.pos, a.chart, &pb, &dum))
            return false;
        // Metric quadrature along the straight chart segment.
        double len = 0.0;
        const double w[3] = {1.0, 4.0, 1.0};
        Vec dirv = pb - a.pos;
        for (int q = 0; q < 3; ++q) {
            Mat g;
            if (!atlas.metric_at(a.chart, a.pos + dirv * (0.5 * q), &g)) return false;
            len += w[q] * std::sqrt(std::max(dirv.dot(g * dirv), 0.0));
        }
        *d = len / 6.0;
        return true;
    };
    for (int a = 0; a < m; ++a)
        for (int b = a + 1; b < m; ++b) {
            const Sample &sa = samples[static_cast<size_t>(a)], &sb = samples[static_cast<size_t>(b)];
            if (sa.ring == 0 || sb.ring == 0) continue;  // radial handled exactly
            if (std::abs(sa.ring - sb.ring) > 1) continue;
            int dr = std::abs(sa.ray - sb.ray);
            dr = std::min(dr, fan - dr);
            if (dr > 2) continue;
            double d;
            if (chart_dist(sa, sb, &d) || chart_dist(sb, sa, &d)) {
                adj[static_cast<size_t>(a)].push_back({b, d});
                adj[static_cast<size_t>(b)].push_back({a, d});
            }
        }
    // Radial edges from the center along each ray.
    for (int b = 1; b < m; ++b) {
        const Sample& sb = samples[static_cast<size_t>(b)];
        if (sb.ring == 1) {
            adj[0].push_back({b, ring_step});
            adj[static_cast<size_t>(b)].push_back({0, ring_step});
        }
    }

    Mat dist = Mat::Constant(m, m, kInf);
    using QE = std::pair<double, int>;
    for (int src = 0; src < m; ++src) {
        std::vector<double> d(static_cast<size_t>(m), kInf);
        d[static_cast<size_t>(src)] = 0.0;
        std::priority_queue<QE, std::vector<QE>, std::greater<>> pq;
        pq.push({0.0, src});
        while (!pq.empty()) {
            auto [dv, v] = pq.top();
            pq.pop();
            if (dv > d[static_cast<size_t>(v)]) continue;
            for (auto& [w, ew] : adj[static_cast<size_t>(v)])
                if (dv + ew < d[static_cast<size_t>(w)]) {
                    d[static_cast<size_t>(w)] = dv + ew;
                    pq.push({d[static_cast<size_t>(w)], w});
                }
        }
        for (int t = 0; t < m; ++t) dist(src, t) = d[static_cast<size_t>(t)];
    }
    // Exact radial distances override the graph approximation.
    for (int b = 1; b < m; ++b) {
        double radial = samples[static_cast<size_t>(b)].ring * ring_step;
        dist(0, b) = dist(b, 0) = std::min(dist(0, b), radial);
    }
    for (int a = 0; a < m; ++a) dist(a, a) = 0.0;
    for (int a = 0; a < m; ++a)
        for (int b = a + 1; b < m; ++b) {
            double v = std::min(dist(a, b), dist(b, a));
            if (v == kInf) v = 2.0 * rhat;  // disconnected fallback: diameter cap
            dist(a, b) = dist(b, a) = v;
        }

    FiniteMetricSpace ball_metric(dist);
    CenteredBall ball;
    ball.space = ball_metric.rescaled(1.0 / rhat);
    ball.center_global = 0;
    for (int i = 0; i < m; ++i) ball.global_indices.push_back(i);
    out.certificate = ghdist_to_ball(ball, atlas.dim);
    out.proxy = out.certificate.delta_a * rhat * atlas.scale;
    out.bound = 2.0 * k_claim * r * r * r + out.pitch;
    out.pass = out.proxy <= out.bound;
    return out;
}

}  // namespace recon
