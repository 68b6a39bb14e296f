#include "recon/metric_space.hpp"

#include <algorithm>
#include <fstream>
#include <queue>

#include "recon/json_util.hpp"

namespace recon {

FiniteMetricSpace::FiniteMetricSpace(Mat dist, std::optional<double> cutoff,
                                     std::optional<double> censored_value)
    : dist_(std::move(dist)), cutoff_(cutoff), censored_value_(censored_value) {
    const auto n = dist_.rows();
    require(dist_.cols() == n, "distance matrix must be square");
    require(n <= 20000, "distance matrix limited to 20000 points");
    for (Eigen::Index i = 0; i < n; ++i) {
        require(dist_(i, i) == 0.0, "nonzero diagonal in distance matrix");
        for (Eigen::Index j = i + 1; j < n; ++j) {
            require(dist_(i, j) == dist_(j, i), "asymmetric distance matrix");
            require(dist_(i, j) >= 0.0, "negative distance");
        }
    }
    if (cutoff_ && !censored_value_) censored_value_ = *cutoff_;
    require(!censored_value_ || cutoff_, "censored_value requires a cutoff");
}

double FiniteMetricSpace::triangle_slack() const {
    const int n = size();
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (j == i || censored(i, j)) continue;
            for (int k = i + 1; k < n; ++k) {
                if (k == j || censored(j, k) || censored(i, k)) continue;
                worst = std::max(worst, dist_(i, k) - dist_(i, j) - dist_(j, k));
            }
        }
    return worst;
}

std::vector<Index> FiniteMetricSpace::ball(Index center, double radius) const {
    std::vector<Index> out{center};
    for (int j = 0; j < size(); ++j)
        if (j != center && dist_(center, j) <= radius) out.push_back(j);
    return out;
}

FiniteMetricSpace FiniteMetricSpace::restricted(const std::vector<Index>& subset) const {
    const int m = static_cast<int>(subset.size());
    Mat d(m, m);
    for (int a = 0; a < m; ++a) {
        d(a, a) = 0.0;
        for (int b = a + 1; b < m; ++b) d(a, b) = d(b, a) = dist_(subset[a], subset[b]);
    }
    return FiniteMetricSpace(std::move(d), cutoff_, censored_value_);
}

FiniteMetricSpace FiniteMetricSpace::rescaled(double factor) const {
    std::optional<double> c = cutoff_, cv = censored_value_;
    if (c) *c *= factor;
    if (cv) *cv *= factor;
    return FiniteMetricSpace(dist_ * factor, c, cv);
}

FiniteMetricSpace FiniteMetricSpace::from_json_file(const std::string& path) {
    auto j = load_json(path);
    const int n = j.at("n").get<int>();
    const auto tri = j.at("metric").get<std::vector<double>>();
    require(static_cast<int>(tri.size()) == n * (n - 1) / 2,
            "metric array length does not match n");
    Mat d = Mat::Zero(n, n);
    int k = 0;
    for (int i = 0; i < n; ++i)
        for (int jj = i + 1; jj < n; ++jj) d(i, jj) = d(jj, i) = tri[k++];
    std::optional<double> cutoff, cv;
    if (j.contains("cutoff") && !j["cutoff"].is_null()) cutoff = j["cutoff"].get<double>();
    if (j.contains("censored_value") && !j["censored_value"].is_null())
        cv = j["censored_value"].get<double>();
    return FiniteMetricSpace(std::move(d), cutoff, cv);
}

void FiniteMetricSpace::to_json_file(const std::string& path) const {
    nlohmann::json j;
    const int n = size();
    j["n"] = n;
    std::vector<double> tri;
    tri.reserve(static_cast<size_t>(n) * (n - 1) / 2);
    for (int i = 0; i < n; ++i)
        for (int jj = i + 1; jj < n; ++jj) tri.push_back(dist_(i, jj));
    j["metric"] = tri;
    j["cutoff"] = cutoff_ ? nlohmann::json(*cutoff_) : nlohmann::json();
    j["censored_value"] = censored_value_ ? nlohmann::json(*censored_value_) : nlohmann::json();
    save_json(path, j);
}

std::vector<Index> IntrinsifyResult::members(int comp) const {
    std::vector<Index> out;
    for (int i = 0; i < static_cast<int>(component.size()); ++i)
        if (component[i] == comp) out.push_back(i);
    return out;
}

const FiniteMetricSpace& IntrinsifyResult::single() const {
    require(n_components == 1, "link graph is disconnected");
    return space;
}

double hausdorff_distance(const std::vector<Index>& a, const std::vector<Index>& b,
                          const FiniteMetricSpace& ambient) {
    require(!a.empty() && !b.empty(), "undefined Hausdorff distance");
    double h = 0.0;
    for (Index i : a) {
        double best = kInf;
        for (Index j : b) best = std::min(best, ambient.d(i, j));
        h = std::max(h, best);
    }
    for (Index j : b) {
        double best = kInf;
        for (Index i : a) best = std::min(best, ambient.d(i, j));
        h = std::max(h, best);
    }
    return h;
}

double hausdorff_distance(const std::vector<Vec>& a, const std::vector<Vec>& b) {
    require(!a.empty() && !b.empty(), "undefined Hausdorff distance");
    double h = 0.0;
    for (const Vec& p : a) {
        double best = kInf;
        for (const Vec& q : b) best = std::min(best, (p - q).norm());
        h = std::max(h, best);
    }
    for (const Vec& q : b) {
        double best = kInf;
        for (const Vec& p : a) best = std::min(best, (p - q).norm());
        h = std::max(h, best);
    }
    return h;
}

namespace {

template <class DistFn>
Net greedy_net(int n, double s, DistFn dist) {
    require(s > 0.0, "net separation must be positive");
    Net net;
    net.separation = s;
    for (int i = 0; i < n; ++i) {
        bool ok = true;
        for (Index j : net.indices)
            if (dist(i, j) < s) {
                ok = false;
                break;
            }
        if (ok) net.indices.push_back(i);
    }
    double cover = 0.0;
    for (int i = 0; i < n; ++i) {
        double best = kInf;
        for (Index j : net.indices) best = std::min(best, dist(i, j));
        cover = std::max(cover, best);
    }
    net.covering_radius = cover;
    return net;
}

}  // namespace

Net maximal_separated_net(const FiniteMetricSpace& x, double s) {
    return greedy_net(x.size(), s, [&](int i, int j) { return x.d(i, j); });
}

Net maximal_separated_net(const std::vector<Vec>& pts, double s) {
    return greedy_net(static_cast<int>(pts.size()), s,
                      [&](int i, int j) { return (pts[i] - pts[j]).norm(); });
}

IntrinsifyResult intrinsify(const FiniteMetricSpace& x, double r) {
    const int n = x.size();
    // Link graph: (i,j) linked iff some z has max(d(z,i), d(z,j)) < r.
    // z = i covers the plain d(i,j) < r case. Censored entries are unusable.
    std::vector<std::vector<std::pair<int, double>>> adj(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            if (x.censored(i, j)) continue;
            bool linked = x.d(i, j) < r;
            for (int z = 0; z < n && !linked; ++z) {
                if (z == i || z == j || x.censored(z, i) || x.censored(z, j)) continue;
                linked = std::max(x.d(z, i), x.d(z, j)) < r;
            }
            if (linked) {
                adj[i].push_back({j, x.d(i, j)});
                adj[j].push_back({i, x.d(i, j)});
            }
        }

    IntrinsifyResult res;
    res.component.assign(n, -1);
    int ncomp = 0;
    for (int i = 0; i < n; ++i) {
        if (res.component[i] >= 0) continue;
        std::vector<int> stack{i};
        res.component[i] = ncomp;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (auto& [w, _] : adj[v])
                if (res.component[w] < 0) {
                    res.component[w] = ncomp;
                    stack.push_back(w);
                }
        }
        ++ncomp;
    }
    res.n_components = ncomp;

    Mat d = Mat::Constant(n, n, kInf);
    using QE = std::pair<double, int>;
    for (int src = 0; src < n; ++src) {
        std::vector<double> dist(n, kInf);
        dist[src] = 0.0;
        std::priority_queue<QE, std::vector<QE>, std::greater<>> pq;
        pq.push({0.0, src});
        while (!pq.empty()) {
            auto [dv, v] = pq.top();
            pq.pop();
            if (dv > dist[v]) continue;
            for (auto& [w, ew] : adj[v]) {
                double nd = dv + ew;
                if (nd < dist[w]) {
                    dist[w] = nd;
                    pq.push({nd, w});
                }
            }
        }
        for (int j = 0; j < n; ++j) d(src, j) = dist[j];
    }
    // Symmetrize exactly (Dijkstra is symmetric up to float noise).
    for (int i = 0; i < n; ++i) {
        d(i, i) = 0.0;
        for (int j = i + 1; j < n; ++j) d(i, j) = d(j, i) = std::min(d(i, j), d(j, i));
    }
    res.space = FiniteMetricSpace(std::move(d));
    return res;
}

StraightnessCheck check_delta_straight(const ChainCertificate& chain,
                                       const FiniteMetricSpace& x) {
    require(chain.points.size() >= 2, "chain needs at least 2 points");
    StraightnessCheck out;
    out.ok = true;
    const auto& p = chain.points;
    const int m = static_cast<int>(p.size());
    if (chain.link_bound > 0.0)
        for (int i = 0; i + 1 < m; ++i)
            if (!(x.d(p[i], p[i + 1]) < chain.link_bound)) out.ok = false;
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j)
            for (int k = j + 1; k < m; ++k) {
                double excess = x.d(p[i], p[j]) + x.d(p[j], p[k]) - x.d(p[i], p[k]);
                if (excess > out.worst_excess) {
                    out.worst_excess = excess;
                    out.worst_triple = {p[i], p[j], p[k]};
                }
            }
    if (m > 2 && out.worst_excess >= chain.straightness_slack) out.ok = false;
    return out;
}

namespace {

// Dijkstra path on the delta-link graph between s and t; empty if unreachable.
std::vector<Index> link_path(const FiniteMetricSpace& x, double delta, Index s, Index t) {
    const int n = x.size();
    std::vector<double> dist(n, kInf);
    std::vector<int> prev(n, -1);
    dist[s] = 0.0;
    using QE = std::pair<double, int>;
    std::priority_queue<QE, std::vector<QE>, std::greater<>> pq;
    pq.push({0.0, s});
    while (!pq.empty()) {
        auto [dv, v] = pq.top();
        pq.pop();
        if (dv > dist[v]) continue;
        if (v == t) break;
        for (int w = 0; w < n; ++w) {
            if (w == v || x.censored(v, w)) continue;
            double ew = x.d(v, w);
            if (ew >= delta) continue;
            if (dv + ew < dist[w]) {
                dist[w] = dv + ew;
                prev[w] = v;
                pq.push({dist[w], w});
            }
        }
    }
    if (dist[t] == kInf) return {};
    std::vector<Index> path;
    for (int v = t; v != -1; v = prev[v]) path.push_back(v);
    std::reverse(path.begin(), path.end());
    return path;
}

}  // namespace

WitnessResult delta_intrinsic_witness(const FiniteMetricSpace& x, double delta,
                                      int refine_depth) {
    require(delta > 0.0, "delta must be positive");
    WitnessResult res;
    const int n = x.size();
    for (Index a = 0; a < n; ++a)
        for (Index b = a + 1; b < n; ++b) {
            ChainCertificate cert;
            cert.straightness_slack = delta;
            cert.link_bound = delta;
            if (x.d(a, b) < delta) {
                cert.points = {a, b};
                res.witnesses[{a, b}] = cert;
                continue;
            }
            cert.points = link_path(x, delta, a, b);
            bool ok = !cert.points.empty() && check_delta_straight(cert, x).ok;
            // On straightness failure, retry with tighter links: shorter hops
            // track the underlying geometry more closely.
            double bound = delta;
            for (int depth = 0; !ok && depth < refine_depth; ++depth) {
                bound *= 0.5;
                auto path = link_path(x, bound, a, b);
                if (path.empty()) break;
                cert.points = std::move(path);
                ok = check_delta_straight(cert, x).ok;
            }
            if (ok)
                res.witnesses[{a, b}] = cert;
            else
                res.failures.push_back({a, b});
        }
    return res;
}

QuasiIsometryReport measure_quasi_isometry(const std::vector<Index>& f,
                                           const FiniteMetricSpace& x,
                                           const FiniteMetricSpace& y) {
    require(static_cast<int>(f.size()) == x.size(), "map must be total on X");
    QuasiIsometryReport rep;
    const int n = x.size();
    // lambda = largest two-sided distance ratio, clipped below at 1.
    double lambda = 1.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double dx = x.d(i, j), dy = y.d(f[i], f[j]);
            if (dx > 0.0 && dy > 0.0) lambda = std::max({lambda, dy / dx, dx / dy});
        }
    rep.lambda = lambda;
    double eps = 0.0, eps1 = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double dx = x.d(i, j), dy = y.d(f[i], f[j]);
            double v = std::max(dy - lambda * dx, dx / lambda - dy);
            if (v > eps) {
                eps = v;
                rep.worst_pair = {i, j};
            }
            eps1 = std::max(eps1, std::abs(dy - dx));
        }
    rep.epsilon = std::max(eps, 0.0);
    rep.epsilon_additive = eps1;
    double cover = 0.0;
    for (int j = 0; j < y.size(); ++j) {
        double best = kInf;
        for (int i = 0; i < n; ++i) best = std::min(best, y.d(f[i], j));
        cover = std::max(cover, best);
    }
    rep.net_radius = cover;
    return rep;
}

}  // namespace recon
