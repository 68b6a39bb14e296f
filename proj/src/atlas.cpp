#include "recon/atlas.hpp"

#include <algorithm>
#include <mutex>
#include <queue>
#include <set>

#include "recon/json_util.hpp"
#include "recon/parallel.hpp"

namespace recon {

namespace {

// Axis-indexed walk over the cube {-half..half}^n.
class GridWalk {
public:
    GridWalk(int n, int half) : idx_(n, -half), half_(half), done_(false) {}
    bool done() const { return done_; }
    const std::vector<int>& idx() const { return idx_; }
    void next() {
        int k = 0;
        while (k < static_cast<int>(idx_.size()) && ++idx_[k] > half_) idx_[k++] = -half_;
        if (k == static_cast<int>(idx_.size())) done_ = true;
    }

private:
    std::vector<int> idx_;
    int half_;
    bool done_;
};

Vec idx_to_coords(const std::vector<int>& idx, double pitch) {
    Vec x(static_cast<Eigen::Index>(idx.size()));
    for (size_t k = 0; k < idx.size(); ++k) x[static_cast<Eigen::Index>(k)] = idx[k] * pitch;
    return x;
}

}  // namespace

double Atlas::u_profile(double t) const {
    PlateauBump h(kappa / 30.0, kappa / 15.0);
    return h.value(t);
}

double Atlas::u_build_profile(double t) const {
    const double ext = grids.empty() ? kappa / 15.0 : grids[0].extent;
    PlateauBump h(kappa / 30.0, ext + (grids.empty() ? 0.05 : 2.0 * grids[0].pitch));
    return h.value(t);
}

namespace {
thread_local BlendedComposition::Workspace t_ws;
}

BVec Atlas::psi(int j, const Vec& x) const {
    require(has_maps(), "atlas has no live maps");
    auto fe = whitney->evaluate(j, x);
    fe.value.scale(1.0 / r0);
    auto res = sigma.evaluate_local(fe.value, {}, sigma_candidates[static_cast<size_t>(j)], t_ws,
                                    cs->size());
    res.value.scale(r0);
    return res.value;
}

std::pair<BVec, std::vector<BVec>> Atlas::psi_jacobian(int j, const Vec& x) const {
    require(has_maps(), "atlas has no live maps");
    std::vector<Vec> tangents;
    for (int k = 0; k < dim; ++k) tangents.emplace_back(Vec::Unit(dim, k));
    auto fe = whitney->evaluate(j, x, tangents);
    fe.value.scale(1.0 / r0);
    auto res = sigma.evaluate_local(fe.value, fe.jac, sigma_candidates[static_cast<size_t>(j)],
                                    t_ws, cs->size());
    res.value.scale(r0);
    return {res.value, res.jac};
}

Vec Atlas::chart_inverse(int i, const BVec& m, const Vec& seed, double tol) const {
    // Chord iteration: the Jacobian is frozen between occasional refreshes,
    // so most iterations cost one value evaluation.
    Vec y = seed;
    std::vector<BVec> jac;
    Eigen::LDLT<Mat> G;
    for (int it = 0; it < 50; ++it) {
        if (it % 4 == 0) {
            auto [val0, jac0] = psi_jacobian(i, y);
            jac = std::move(jac0);
            Mat Gm(dim, dim);
            for (int a = 0; a < dim; ++a)
                for (int c = a; c < dim; ++c) Gm(a, c) = Gm(c, a) = bv_dot(jac[a], jac[c]);
            G.compute(Gm);
            BVec resid = bv_sub(m, val0);
            Vec b(dim);
            for (int a = 0; a < dim; ++a) b[a] = bv_dot(jac[a], resid);
            Vec dy = G.solve(b);
            y += dy;
            if ((y - cs->charts[i].base).norm() > kappa / 10.0 + 0.2)
                throw Error("chart inversion left chart " + std::to_string(i));
            if (resid.norm() <= tol && dy.norm() <= tol) return y;
            continue;
        }
        BVec val = psi(i, y);
        BVec resid = bv_sub(m, val);
        double rn = resid.norm();
        Vec b(dim);
        for (int a = 0; a < dim; ++a) b[a] = bv_dot(jac[a], resid);
        Vec dy = G.solve(b);
        y += dy;
        if ((y - cs->charts[i].base).norm() > kappa / 10.0 + 0.2)
            throw Error("chart inversion left chart " + std::to_string(i));
        if (rn <= tol && dy.norm() <= tol) return y;
    }
    throw Error("chart inversion did not converge in chart " + std::to_string(i));
}

std::vector<std::pair<int, double>> Atlas::partition_at(int j, const Vec& x) const {
    require(has_maps(), "atlas has no live maps");
    BVec m = psi(j, x);
    std::vector<int> cand = cs->adjacency[j];
    cand.push_back(j);
    std::sort(cand.begin(), cand.end());
    std::vector<std::pair<int, double>> raw;
    for (int i : cand) {
        Vec seed = (i == j) ? x : transitions->get(j, i).apply(x);
        if ((seed - cs->charts[i].base).norm() > kappa / 15.0 + 0.15) continue;
        Vec y;
        try {
            y = chart_inverse(i, m, seed);
        } catch (const Error&) {
            continue;
        }
        double t = (y - cs->charts[i].base).norm();
        double u = u_profile(t);
        if (u > 0.0) raw.push_back({i, u});
    }
    double total = 0.0;
    for (auto& [i, u] : raw) total += u;
    require(total > 0.0, "partition of unity undefined at this point");
    for (auto& [i, u] : raw) u /= total;
    return raw;
}

BVec Atlas::psi_image(Index idx) const {
    const PsiAssignment& pa = psi_assignment.at(static_cast<size_t>(idx));
    return psi(pa.chart, pa.coords);
}

bool Atlas::metric_at(int j, const Vec& xc, Mat* g) const {
    const ChartGrid& gr = grids[j];
    const int n = dim;
    std::vector<int> lo(n);
    Vec frac(n);
    for (int k = 0; k < n; ++k) {
        double pos = xc[k] / gr.pitch;
        lo[k] = static_cast<int>(std::floor(pos));
        frac[k] = pos - lo[k];
        if (lo[k] < -gr.half || lo[k] + 1 > gr.half) return false;
    }
    Mat acc = Mat::Zero(n, n);
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
        acc += w * node.g;
    }
    *g = acc;
    return true;
}

const MetricNode* Atlas::node_at(int j, const std::vector<int>& idx) const {
    for (int v : idx)
        if (v < -grids[j].half || v > grids[j].half) return nullptr;
    const MetricNode& n = grids[j].nodes[grids[j].node_index(idx)];
    return n.valid ? &n : nullptr;
}

bool Atlas::stored_transition(int j, const Vec& xc, int i, Vec* y, Mat* dy) const {
    const ChartGrid& gr = grids[j];
    const int n = dim;
    // Nearest node first, then the other corners of the containing cell.
    std::vector<std::vector<int>> tries;
    std::vector<int> nearest(n);
    for (int k = 0; k < n; ++k)
        nearest[k] = static_cast<int>(std::lround(xc[k] / gr.pitch));
    tries.push_back(nearest);
    std::vector<int> lo(n);
    for (int k = 0; k < n; ++k) lo[k] = static_cast<int>(std::floor(xc[k] / gr.pitch));
    for (int corner = 0; corner < (1 << n); ++corner) {
        std::vector<int> idx(n);
        for (int k = 0; k < n; ++k) idx[k] = lo[k] + ((corner >> k) & 1);
        tries.push_back(idx);
    }
    for (const auto& idx : tries) {
        const MetricNode* node = node_at(j, idx);
        if (!node) continue;
        for (size_t s = 0; s < node->over.size(); ++s) {
            if (node->over[s] != i) continue;
            Vec node_xc = idx_to_coords(idx, gr.pitch);
            *y = node->eta[s] + node->deta[s] * (xc - node_xc);
            *dy = node->deta[s];
            return true;
        }
    }
    return false;
}

std::vector<int> Atlas::grid_overlaps(int j) const {
    std::vector<int> out;
    for (const MetricNode& n : grids[j].nodes)
        for (int i : n.over)
            if (std::find(out.begin(), out.end(), i) == out.end()) out.push_back(i);
    std::sort(out.begin(), out.end());
    return out;
}

Atlas construct_manifold(const FiniteMetricSpace& x, double r, int n,
                         const AtlasOptions& opts) {
    Atlas atlas;
    atlas.dim = n;
    atlas.scale = r;
    atlas.kappa = opts.kappa;
    atlas.r0 = opts.r0;

    ChartBuildOptions cbo;
    cbo.net_separation = opts.chart_net_separation;
    cbo.delta2_pitch = opts.delta2_pitch;
    auto cs = std::make_shared<ChartSystem>(build_chart_system(x, r, n, cbo));
    atlas.cs = cs;
    auto trans = std::make_shared<TransitionSet>(build_transitions(*cs));
    atlas.transitions = trans;
    atlas.max_transition_residual = trans->max_residual();
    atlas.cocycle = check_cocycle(*trans, *cs);
    atlas.whitney = std::make_shared<WhitneyMap>(cs, trans, opts.kappa);

    const int J = cs->size();
    const double build_rad = atlas.radius_build();

    // ----- Sigma: per-chart grids on D_i^{kappa/10}, mapped through F, with
    // tangent flats from the analytic Jacobian of F.
    std::vector<Vec> tangents;
    for (int k = 0; k < n; ++k) tangents.emplace_back(Vec::Unit(n, k));
    std::vector<int> step_home;
    for (int j = 0; j < J; ++j) {
        GridWalk walk(n, static_cast<int>(std::floor(build_rad / opts.sigma_sep)));
        for (; !walk.done(); walk.next()) {
            Vec xc = idx_to_coords(walk.idx(), opts.sigma_sep);
            if (xc.norm() > build_rad) continue;
            auto fe = atlas.whitney->evaluate(j, cs->charts[j].base + xc, tangents);
            // Orthonormalize the Jacobian columns into the step frame.
            ProjectionStep step;
            step.center = fe.value;
            step.center.scale(1.0 / opts.r0);
            step.center_norm2 = step.center.squaredNorm();
            bool ok = true;
            std::vector<BVec> frame;
            for (int k = 0; k < n; ++k) {
                BVec v = fe.jac[k];
                for (const BVec& f : frame) bv_axpy(v, -bv_dot(f, v), f);
                double nv = v.norm();
                if (nv < 1e-8) {
                    ok = false;
                    break;
                }
                v.scale(1.0 / nv);
                frame.push_back(std::move(v));
            }
            if (!ok) continue;
            step.frame = std::move(frame);
            atlas.sigma.steps.push_back(std::move(step));
            step_home.push_back(j);
        }
    }
    atlas.sigma.build_locality(step_home, J);

    atlas.sigma_candidates.assign(static_cast<size_t>(J), {});
    for (int j = 0; j < J; ++j) {
        std::vector<int> targets = cs->adjacency[j];
        targets.push_back(j);
        std::sort(targets.begin(), targets.end());
        atlas.sigma_candidates[static_cast<size_t>(j)] = targets;
    }

    // Flatness probe of Sigma against the step flats (diagnostic).
    {
        double defect = 0.0;
        const int stride = std::max(1, static_cast<int>(atlas.sigma.steps.size()) / 200);
        for (size_t s = 0; s < atlas.sigma.steps.size(); s += static_cast<size_t>(stride)) {
            const ProjectionStep& st = atlas.sigma.steps[s];
            for (int cchart : atlas.sigma_candidates[static_cast<size_t>(step_home[s])]) {
                auto [b, e] = atlas.sigma.chart_ranges[static_cast<size_t>(cchart)];
                for (int c = b; c < e; ++c) {
                    const ProjectionStep& other = atlas.sigma.steps[static_cast<size_t>(c)];
                    double d2 = bv_dist2(st.center, other.center);
                    if (d2 > 1.0) continue;  // r0-unit scale: within the unit ball
                    BVec rel = bv_sub(other.center, st.center);
                    double vert2 = rel.squaredNorm();
                    for (const BVec& f : st.frame) vert2 -= sqr(bv_dot(f, rel));
                    defect = std::max(defect, std::sqrt(std::max(vert2, 0.0)));
                }
            }
        }
        atlas.sigma_flat_defect = defect * opts.r0;
    }

    // ----- Psi assignment: nearest net center per data point.
    const FiniteMetricSpace& xu = *cs->space;
    atlas.psi_assignment.resize(static_cast<size_t>(xu.size()));
    for (Index p = 0; p < xu.size(); ++p) {
        int best = -1;
        double bd = kInf;
        for (int j = 0; j < J; ++j) {
            double d = xu.d(p, cs->charts[j].center);
            if (d < bd) {
                bd = d;
                best = j;
            }
        }
        const Vec* c = cs->charts[best].coord_of(p);
        require(c != nullptr, "data point escaped its nearest chart ball");
        atlas.psi_assignment[static_cast<size_t>(p)] = {best, *c};
    }

    if (!opts.build_grids) return atlas;

    // ----- Metric grids with transition fields.
    const double pitch = opts.grid_pitch > 0.0 ? opts.grid_pitch : opts.kappa / 100.0;
    const double extent = atlas.radius_overlap() + 2.0 * pitch;
    const int half = static_cast<int>(std::ceil(extent / pitch));
    PlateauBump h_build(atlas.radius_publish(), extent + 2.0 * pitch);

    atlas.grids.assign(J, {});
    std::mutex overlap_mu;
    std::set<std::pair<int, int>> overlap_pairs;

    parallel_for(J, opts.threads, [&](int j) {
        ChartGrid& gr = atlas.grids[j];
        gr.pitch = pitch;
        gr.half = half;
        gr.extent = extent;
        int total = 1;
        for (int k = 0; k < n; ++k) total *= gr.per_axis();
        gr.nodes.assign(static_cast<size_t>(total), MetricNode{});

        // Prefetch transitions into adjacent charts.
        std::vector<std::pair<int, TransitionMap>> arms;
        for (int i : cs->adjacency[j]) arms.push_back({i, trans->get(j, i)});

        for (GridWalk walk(n, half); !walk.done(); walk.next()) {
            Vec xc = idx_to_coords(walk.idx(), pitch);
            if (xc.norm() > extent) continue;
            MetricNode& node = gr.nodes[gr.node_index(walk.idx())];
            Vec xabs = cs->charts[j].base + xc;
            auto [m, Jj] = atlas.psi_jacobian(j, xabs);

            double u_total_build = h_build.value(xc.norm());
            double u_total_api = atlas.u_profile(xc.norm());
            node.u_self = u_total_api;
            Mat g_acc = u_total_build * Mat::Identity(n, n);

            for (auto& [i, A] : arms) {
                Vec seed = A.apply(xabs);
                double seed_t = (seed - cs->charts[i].base).norm();
                if (seed_t > extent + 0.12) continue;
                Vec y;
                try {
                    y = atlas.chart_inverse(i, m, seed);
                } catch (const Error&) {
                    continue;
                }
                double t = (y - cs->charts[i].base).norm();
                if (t > extent) continue;
                auto [mi, Ji] = atlas.psi_jacobian(i, y);
                Mat G(n, n), JiJj(n, n);
                for (int a = 0; a < n; ++a)
                    for (int c = 0; c < n; ++c) {
                        JiJj(a, c) = bv_dot(Ji[a], Jj[c]);
                        if (c >= a) G(a, c) = G(c, a) = bv_dot(Ji[a], Ji[c]);
                    }
                Mat deta = G.ldlt().solve(JiJj);
                node.over.push_back(i);
                node.eta.push_back(y - cs->charts[i].base);
                node.deta.push_back(deta);
                double uapi = atlas.u_profile(t);
                node.u.push_back(uapi);
                u_total_api += uapi;
                double ub = h_build.value(t);
                u_total_build += ub;
                g_acc += ub * (deta.transpose() * deta);
                if (ub > 0.0 || uapi > 0.0) {
                    std::lock_guard<std::mutex> lock(overlap_mu);
                    overlap_pairs.insert({std::min(i, j), std::max(i, j)});
                }
            }
            if (u_total_build <= 0.0) continue;  // node outside every support
            node.g = g_acc / u_total_build;
            // Normalized partition weights for the published profile.
            if (u_total_api > 0.0) {
                node.u_self /= u_total_api;
                for (double& u : node.u) u /= u_total_api;
            }
            node.valid = true;
        }
    });
    atlas.overlap_set.assign(overlap_pairs.begin(), overlap_pairs.end());
    return atlas;
}

Mat atlas_graph_distances(const Atlas& atlas, const std::vector<Index>& sources) {
    const ChartSystem& cs = *atlas.cs;
    const FiniteMetricSpace& xu = *cs.space;
    const int P = xu.size();
    const double reach = atlas.grids.empty()
                             ? atlas.radius_overlap()
                             : atlas.grids[0].extent - atlas.grids[0].pitch;

    // Short in-chart edges weighted by metric quadrature.
    std::vector<std::vector<std::pair<int, double>>> adj(static_cast<size_t>(P));
    auto add_edge = [&](int a, int b, double w) {
        for (auto& [t, wt] : adj[static_cast<size_t>(a)])
            if (t == b) {
                wt = std::min(wt, w);
                return;
            }
        adj[static_cast<size_t>(a)].push_back({b, w});
        adj[static_cast<size_t>(b)].push_back({a, w});
    };

    for (int j = 0; j < cs.size(); ++j) {
        const Chart& ch = cs.charts[j];
        std::vector<std::pair<Index, Vec>> inside;
        for (size_t k = 0; k < ch.members.size(); ++k) {
            Vec xc = ch.coords[k] - ch.base;
            if (xc.norm() <= reach) inside.push_back({ch.members[k], xc});
        }
        for (size_t a = 0; a < inside.size(); ++a)
            for (size_t b = a + 1; b < inside.size(); ++b) {
                Vec va = inside[a].second, vb = inside[b].second;
                if ((va - vb).norm() > 0.4) continue;
                // Composite Simpson with 5 metric samples along the segment.
                double len = 0.0;
                bool ok = true;
                Vec dir = vb - va;
                double weights[5] = {1.0, 4.0, 2.0, 4.0, 1.0};
                for (int s = 0; s < 5 && ok; ++s) {
                    Mat g;
                    if (!atlas.metric_at(j, va + dir * (0.25 * s), &g)) {
                        ok = false;
                        break;
                    }
                    len += weights[s] * std::sqrt(std::max(dir.dot(g * dir), 0.0));
                }
                if (!ok) continue;
                len *= 0.25 / 3.0;
                add_edge(inside[a].first, inside[b].first, len);
            }
    }

    Mat out(static_cast<Eigen::Index>(sources.size()), P);
    using QE = std::pair<double, int>;
    for (size_t si = 0; si < sources.size(); ++si) {
        std::vector<double> dist(static_cast<size_t>(P), kInf);
        dist[static_cast<size_t>(sources[si])] = 0.0;
        std::priority_queue<QE, std::vector<QE>, std::greater<>> pq;
        pq.push({0.0, sources[si]});
        while (!pq.empty()) {
            auto [dv, v] = pq.top();
            pq.pop();
            if (dv > dist[static_cast<size_t>(v)]) continue;
            for (auto& [w, ew] : adj[static_cast<size_t>(v)])
                if (dv + ew < dist[static_cast<size_t>(w)]) {
                    dist[static_cast<size_t>(w)] = dv + ew;
                    pq.push({dist[static_cast<size_t>(w)], w});
                }
        }
        for (int p = 0; p < P; ++p) out(static_cast<Eigen::Index>(si), p) = dist[static_cast<size_t>(p)];
    }
    return out;
}

PsiReport measure_psi_quasi_isometry(const Atlas& atlas, int max_sources) {
    const FiniteMetricSpace& xu = *atlas.cs->space;
    const int P = xu.size();
    std::vector<Index> sources;
    if (P <= max_sources) {
        for (int i = 0; i < P; ++i) sources.push_back(i);
    } else {
        // Deterministic spread: greedy net until the budget is filled.
        for (double sep = 2.0; static_cast<int>(sources.size()) < max_sources / 2; sep *= 0.7)
            sources = maximal_separated_net(xu, sep).indices;
        if (static_cast<int>(sources.size()) > max_sources) sources.resize(max_sources);
    }

    Mat dg = atlas_graph_distances(atlas, sources);
    PsiReport rep;
    rep.measured_points = static_cast<int>(sources.size());

    double lambda = 1.0;
    for (size_t a = 0; a < sources.size(); ++a)
        for (int b = 0; b < P; ++b) {
            if (b == sources[a] || xu.censored(sources[a], b)) continue;
            double dx = xu.d(sources[a], b), dy = dg(static_cast<Eigen::Index>(a), b);
            if (dy == kInf) continue;
            if (dx > 0.0 && dy > 0.0) lambda = std::max({lambda, dy / dx, dx / dy});
        }
    double eps = 0.0;
    std::pair<Index, Index> worst{-1, -1};
    for (size_t a = 0; a < sources.size(); ++a)
        for (int b = 0; b < P; ++b) {
            if (b == sources[a] || xu.censored(sources[a], b)) continue;
            double dx = xu.d(sources[a], b), dy = dg(static_cast<Eigen::Index>(a), b);
            if (dy == kInf) continue;
            double v = std::max(dy - lambda * dx, dx / lambda - dy);
            if (v > eps) {
                eps = v;
                worst = {sources[a], b};
            }
        }
    rep.qi.lambda = lambda;
    rep.qi.epsilon = std::max(eps, 0.0);
    rep.qi.worst_pair = worst;

    double eps1 = 0.0;
    for (size_t a = 0; a < sources.size(); ++a)
        for (int b = 0; b < P; ++b) {
            if (b == sources[a] || xu.censored(sources[a], b)) continue;
            double dy = dg(static_cast<Eigen::Index>(a), b);
            if (dy == kInf) continue;
            eps1 = std::max(eps1, std::abs(dy - xu.d(sources[a], b)));
        }
    rep.qi.epsilon_additive = eps1;

    // Covering proxy: chart-coordinate covering of the publish discs by data.
    double cover = 0.0;
    for (int j = 0; j < atlas.cs->size(); ++j) {
        const Chart& ch = atlas.cs->charts[j];
        std::vector<Vec> inside;
        for (size_t k = 0; k < ch.members.size(); ++k)
            if ((ch.coords[k] - ch.base).norm() <= atlas.radius_overlap())
                inside.push_back(ch.coords[k] - ch.base);
        GridWalk walk(atlas.dim, 4);
        for (; !walk.done(); walk.next()) {
            Vec probe = idx_to_coords(walk.idx(), atlas.radius_publish() / 4.0);
            if (probe.norm() > atlas.radius_publish()) continue;
            double best = kInf;
            for (const Vec& q : inside) best = std::min(best, (q - probe).norm());
            cover = std::max(cover, best);
        }
    }
    rep.qi.net_radius = cover;
    return rep;
}

void Atlas::save(const std::string& path) const {
    nlohmann::json j;
    j["dim"] = dim;
    j["scale"] = scale;
    j["kappa"] = kappa;
    j["r0"] = r0;
    j["sigma_flat_defect"] = sigma_flat_defect;
    j["partition_bump_params"] = {{"inner", kappa / 30.0}, {"outer", kappa / 15.0}};
    if (whitney) {
        j["whitney"] = {{"sphere_profile_knots",
                         {{"cap_small", SphereMap::kCapSmall},
                          {"cap_one", SphereMap::kCapOne},
                          {"support", SphereMap::kSupport}}},
                        {"steps", static_cast<int>(sigma.steps.size())},
                        {"step_order", "chart-major grid order"}};
    }
    nlohmann::json charts = nlohmann::json::array();
    for (const Chart& ch : cs->charts) {
        nlohmann::json c;
        c["center_index"] = ch.center;
        c["p_i"] = vec_to_json(ch.base);
        c["delta_a"] = ch.delta_a;
        c["members"] = ch.members;
        nlohmann::json co = nlohmann::json::array();
        for (const Vec& v : ch.coords) co.push_back(vec_to_json(v));
        c["coords"] = co;
        charts.push_back(c);
    }
    j["charts"] = charts;
    j["adjacency"] = cs->adjacency;
    nlohmann::json ts = nlohmann::json::array();
    for (const TransitionMap& t : transitions->stored())
        ts.push_back({{"i", t.i},
                      {"j", t.j},
                      {"rotation", mat_to_json(t.rotation)},
                      {"translation", vec_to_json(t.translation)},
                      {"residual", t.residual}});
    j["transitions"] = ts;
    j["overlaps"] = overlap_set;
    j["cocycle"] = {{"max_residual", cocycle.max_residual}, {"triples", cocycle.triples}};
    nlohmann::json pa = nlohmann::json::array();
    for (const PsiAssignment& p : psi_assignment)
        pa.push_back({{"chart", p.chart}, {"coords", vec_to_json(p.coords)}});
    j["psi_assignment"] = pa;

    nlohmann::json grids_j = nlohmann::json::array();
    for (const ChartGrid& gr : grids) {
        nlohmann::json g;
        g["pitch"] = gr.pitch;
        g["half"] = gr.half;
        g["extent"] = gr.extent;
        nlohmann::json nodes = nlohmann::json::array();
        for (const MetricNode& node : gr.nodes) {
            if (!node.valid) {
                nodes.push_back(nullptr);
                continue;
            }
            nlohmann::json nj;
            nj["g"] = mat_to_json(node.g);
            nj["u_self"] = node.u_self;
            nj["over"] = node.over;
            nlohmann::json etas = nlohmann::json::array(), detas = nlohmann::json::array();
            for (size_t s = 0; s < node.over.size(); ++s) {
                etas.push_back(vec_to_json(node.eta[s]));
                detas.push_back(mat_to_json(node.deta[s]));
            }
            nj["eta"] = etas;
            nj["deta"] = detas;
            nj["u"] = node.u;
            nodes.push_back(nj);
        }
        g["nodes"] = nodes;
        grids_j.push_back(g);
    }
    j["grids"] = grids_j;
    save_json(path, j);
}

Atlas Atlas::load(const std::string& path) {
    auto j = load_json(path);
    Atlas atlas;
    atlas.dim = j.at("dim").get<int>();
    atlas.scale = j.at("scale").get<double>();
    atlas.kappa = j.at("kappa").get<double>();
    atlas.r0 = j.at("r0").get<double>();
    atlas.sigma_flat_defect = j.value("sigma_flat_defect", 0.0);

    auto cs = std::make_shared<ChartSystem>();
    cs->dim = atlas.dim;
    cs->scale = atlas.scale;
    cs->space = std::make_shared<FiniteMetricSpace>();
    for (const auto& c : j.at("charts")) {
        Chart ch;
        ch.center = c.at("center_index").get<Index>();
        ch.base = vec_from_json(c.at("p_i"));
        ch.delta_a = c.at("delta_a").get<double>();
        ch.members = c.at("members").get<std::vector<Index>>();
        for (const auto& v : c.at("coords")) ch.coords.push_back(vec_from_json(v));
        ch.net_index = static_cast<Index>(cs->charts.size());
        cs->charts.push_back(std::move(ch));
    }
    cs->adjacency = j.at("adjacency").get<std::vector<std::vector<int>>>();
    cs->neighbors.assign(cs->charts.size(), {});
    atlas.cs = cs;

    auto trans = std::make_shared<TransitionSet>();
    for (const auto& t : j.at("transitions")) {
        TransitionMap tm;
        tm.i = t.at("i").get<int>();
        tm.j = t.at("j").get<int>();
        tm.rotation = mat_from_json(t.at("rotation"));
        tm.translation = vec_from_json(t.at("translation"));
        tm.residual = t.at("residual").get<double>();
        trans->add(std::move(tm));
    }
    atlas.transitions = trans;
    atlas.max_transition_residual = trans->max_residual();
    atlas.cocycle.max_residual = j.at("cocycle").at("max_residual").get<double>();
    atlas.cocycle.triples = j.at("cocycle").at("triples").get<int>();
    for (const auto& p : j.at("psi_assignment"))
        atlas.psi_assignment.push_back({p.at("chart").get<int>(), vec_from_json(p.at("coords"))});
    for (const auto& o : j.at("overlaps"))
        atlas.overlap_set.push_back({o[0].get<int>(), o[1].get<int>()});

    for (const auto& g : j.at("grids")) {
        ChartGrid gr;
        gr.pitch = g.at("pitch").get<double>();
        gr.half = g.at("half").get<int>();
        gr.extent = g.at("extent").get<double>();
        for (const auto& nj : g.at("nodes")) {
            MetricNode node;
            if (!nj.is_null()) {
                node.valid = true;
                node.g = mat_from_json(nj.at("g"));
                node.u_self = nj.at("u_self").get<double>();
                node.over = nj.at("over").get<std::vector<int>>();
                for (const auto& e : nj.at("eta")) node.eta.push_back(vec_from_json(e));
                for (const auto& d : nj.at("deta")) node.deta.push_back(mat_from_json(d));
                node.u = nj.at("u").get<std::vector<double>>();
            }
            gr.nodes.push_back(std::move(node));
        }
        atlas.grids.push_back(std::move(gr));
    }
    return atlas;
}

}  // namespace recon
