#include "recon/chart_system.hpp"

#include <algorithm>

namespace recon {

void TransitionSet::add(TransitionMap t) {
    require(t.i < t.j, "transitions are stored with i < j");
    index_[{t.i, t.j}] = static_cast<int>(stored_.size());
    stored_.push_back(std::move(t));
}

bool TransitionSet::has(int i, int j) const {
    if (i == j) return true;
    return index_.count({std::min(i, j), std::max(i, j)}) > 0;
}

TransitionMap TransitionSet::get(int i, int j) const {
    if (i == j) {
        TransitionMap id;
        id.i = id.j = i;
        const auto& any = stored_.empty() ? TransitionMap{} : stored_.front();
        int n = any.rotation.rows() > 0 ? static_cast<int>(any.rotation.rows()) : 0;
        id.rotation = Mat::Identity(n, n);
        id.translation = Vec::Zero(n);
        return id;
    }
    auto it = index_.find({std::min(i, j), std::max(i, j)});
    require(it != index_.end(), "no transition between charts " + std::to_string(i) + " and " +
                                    std::to_string(j));
    const TransitionMap& t = stored_[it->second];
    return (t.i == i) ? t : t.inverse();
}

double TransitionSet::max_residual() const {
    double m = 0.0;
    for (const auto& t : stored_) m = std::max(m, t.residual);
    return m;
}

ChartSystem build_chart_system(const FiniteMetricSpace& x, double r, int n,
                               const ChartBuildOptions& opts) {
    ChartSystem cs;
    cs.dim = n;
    cs.scale = r;
    cs.space = std::make_shared<FiniteMetricSpace>(x.rescaled(1.0 / r));
    const FiniteMetricSpace& xu = *cs.space;

    Net net = maximal_separated_net(xu, opts.net_separation);
    const int J = static_cast<int>(net.indices.size());
    cs.charts.resize(J);

    for (int i = 0; i < J; ++i) {
        Chart& ch = cs.charts[i];
        ch.net_index = i;
        ch.center = net.indices[i];
        ch.base = Vec::Zero(n);
        ch.base[0] = 4.0 * (i + 1);

        CenteredBall ball = extract_ball(xu, ch.center, 1.0);
        GHCertificate cert = ghdist_to_ball(ball, n, opts.delta2_pitch);
        ch.members = ball.global_indices;
        ch.delta_a = cert.delta_a;
        ch.coords.reserve(ch.members.size());
        for (size_t k = 0; k < ch.members.size(); ++k) ch.coords.push_back(cert.coords[k] + ch.base);
        ch.member_slot.assign(xu.size(), -1);
        for (size_t k = 0; k < ch.members.size(); ++k) ch.member_slot[ch.members[k]] = static_cast<int>(k);
        cs.max_delta_a = std::max(cs.max_delta_a, ch.delta_a);
    }

    cs.adjacency.assign(J, {});
    cs.neighbors.assign(J, {});
    for (int i = 0; i < J; ++i)
        for (int j = i + 1; j < J; ++j) {
            double d = xu.d(cs.charts[i].center, cs.charts[j].center);
            if (d < 1.0) {
                cs.adjacency[i].push_back(j);
                cs.adjacency[j].push_back(i);
            }
            if (d < 0.5) {
                cs.neighbors[i].push_back(j);
                cs.neighbors[j].push_back(i);
            }
        }

    cs.component.assign(J, -1);
    int ncomp = 0;
    for (int i = 0; i < J; ++i) {
        if (cs.component[i] >= 0) continue;
        std::vector<int> stack{i};
        cs.component[i] = ncomp;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int w : cs.adjacency[v])
                if (cs.component[w] < 0) {
                    cs.component[w] = ncomp;
                    stack.push_back(w);
                }
        }
        ++ncomp;
    }
    cs.n_components = ncomp;
    return cs;
}

TransitionSet build_transitions(const ChartSystem& cs) {
    TransitionSet out;
    const int n = cs.dim;
    for (int i = 0; i < cs.size(); ++i)
        for (int j : cs.adjacency[i]) {
            if (j <= i) continue;
            const Chart& ci = cs.charts[i];
            const Chart& cj = cs.charts[j];
            // Shared samples of both unit balls.
            std::vector<std::pair<const Vec*, const Vec*>> shared;
            Index x0 = -1;
            double best = kInf;
            std::vector<Index> shared_idx;
            for (Index g : ci.members) {
                const Vec* a = ci.coord_of(g);
                const Vec* b = cj.coord_of(g);
                if (!a || !b) continue;
                shared.push_back({a, b});
                shared_idx.push_back(g);
                double v = std::max(cs.space->d(g, ci.center), cs.space->d(g, cj.center));
                if (v < best) {
                    best = v;
                    x0 = g;
                }
            }
            if (static_cast<int>(shared.size()) < n + 1)
                throw Error("transition underdetermined between charts " + std::to_string(i) +
                            " and " + std::to_string(j));
            const Vec fi0 = *ci.coord_of(x0);
            const Vec fj0 = *cj.coord_of(x0);
            Mat cross = Mat::Zero(n, n);
            for (auto& [a, b] : shared) cross += (*b - fj0) * (*a - fi0).transpose();
            Eigen::JacobiSVD<Mat> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
            TransitionMap t;
            t.i = i;
            t.j = j;
            t.rotation = svd.matrixU() * svd.matrixV().transpose();
            t.translation = fj0 - t.rotation * fi0;
            double res = 0.0;
            for (auto& [a, b] : shared) res = std::max(res, (t.apply(*a) - *b).norm());
            t.residual = res;
            out.add(std::move(t));
        }
    return out;
}

CocycleReport check_cocycle(const TransitionSet& transitions, const ChartSystem& cs,
                            int probes_per_dim) {
    CocycleReport rep;
    const int n = cs.dim;
    // Deterministic probe grid in D_i (radius 1/2 box).
    std::vector<Vec> probes;
    std::vector<int> idx(n, 0);
    while (true) {
        Vec p(n);
        for (int k = 0; k < n; ++k)
            p[k] = probes_per_dim == 1 ? 0.0 : -0.5 + idx[k] * (1.0 / (probes_per_dim - 1));
        probes.push_back(p);
        int k = 0;
        while (k < n && ++idx[k] >= probes_per_dim) idx[k++] = 0;
        if (k == n) break;
    }

    for (int i = 0; i < cs.size(); ++i)
        for (int j : cs.adjacency[i]) {
            if (j <= i) continue;
            for (int k : cs.adjacency[j]) {
                if (k <= j || !cs.adjacent(i, k)) continue;
                TransitionMap aij = transitions.get(i, j);
                TransitionMap ajk = transitions.get(j, k);
                TransitionMap aik = transitions.get(i, k);
                ++rep.triples;
                for (const Vec& p : probes) {
                    Vec x = cs.charts[i].base + p;
                    double r = (ajk.apply(aij.apply(x)) - aik.apply(x)).norm();
                    if (r > rep.max_residual) {
                        rep.max_residual = r;
                        rep.worst_triple = {i, j, k};
                    }
                }
            }
        }
    return rep;
}

}  // namespace recon
