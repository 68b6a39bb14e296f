#include "recon/interpolant.hpp"

#include <algorithm>

#include "recon/json_util.hpp"
#include "recon/nn_grid.hpp"

namespace recon {

BlendedComposition::EvalResult BlendedComposition::evaluate(
    const BVec& x, const std::vector<BVec>& tangents,
    const std::vector<std::pair<int, int>>& hessian_pairs,
    const std::vector<int>* candidates) const {
    EvalResult r;
    r.value = x;
    r.jac = tangents;
    r.hess.assign(hessian_pairs.size(), BVec{});
    for (auto& h : r.hess) {
        h.bdim = x.bdim;
    }
    const double y0n2 = x.squaredNorm();

    const size_t count = candidates ? candidates->size() : steps.size();
    for (size_t si = 0; si < count; ++si) {
        const ProjectionStep& st = steps[candidates ? (*candidates)[si] : static_cast<int>(si)];
        // Cheap reject on |y - q| >= 1/2.
        const double d2 = r.value.squaredNorm() + st.center_norm2 - 2.0 * bv_dot(r.value, st.center);
        if (d2 >= 0.25) continue;
        const double t = std::sqrt(std::max(d2, 0.0));
        const double mu = bump_.value(t);
        if (mu == 0.0) continue;

        BVec rel = bv_sub(r.value, st.center);   // y - q
        // w = P(y) - y = sum_k f_k <f_k, rel> - rel
        BVec w = rel;
        w.scale(-1.0);
        std::vector<double> fcoef(st.frame.size());
        for (size_t k = 0; k < st.frame.size(); ++k) {
            fcoef[k] = bv_dot(st.frame[k], rel);
            bv_axpy(w, fcoef[k], st.frame[k]);
        }

        const bool deriv = !tangents.empty();
        const double mu1 = deriv ? bump_.d1(t) : 0.0;
        const double mu2 = hessian_pairs.empty() ? 0.0 : bump_.d2(t);
        BVec e;  // unit radial direction, only meaningful when t > 0
        if (deriv && t > 0.0) {
            e = rel;
            e.scale(1.0 / t);
        }

        // First derivatives of the step applied to current tangent images:
        // dphi[u] = u + mu ((P-I)u) + (mu' <e,u>) w
        std::vector<double> edotu(r.jac.size(), 0.0), pcoef;
        std::vector<BVec> pmiu(r.jac.size());  // (P - I) u per tangent
        if (deriv) {
            for (size_t a = 0; a < r.jac.size(); ++a) {
                const BVec& u = r.jac[a];
                BVec pu = u;
                pu.scale(-1.0);
                for (const BVec& fk : st.frame) bv_axpy(pu, bv_dot(fk, u), fk);
                pmiu[a] = std::move(pu);
                edotu[a] = (t > 0.0) ? bv_dot(e, u) : 0.0;
            }
        }

        // Second derivatives first (they consume pre-step jac values):
        // d2phi[u,v] = mu'<e,v>(P-I)u + mu'<e,u>(P-I)v
        //            + (mu'' <e,u><e,v> + mu' (<u,v> - <e,u><e,v>)/t) w
        //            + dphi[H_prev(u,v)]
        for (size_t hidx = 0; hidx < hessian_pairs.size(); ++hidx) {
            auto [a, b] = hessian_pairs[hidx];
            BVec& H = r.hess[hidx];
            // Transport the accumulated second derivative: dphi[H]
            BVec ph = H;
            if (!H.empty()) {
                ph.scale(-1.0);
                for (const BVec& fk : st.frame) bv_axpy(ph, bv_dot(fk, H), fk);
                // ph = (P - I) H ; dphi[H] = H + mu*ph + mu' <e,H> w
                double edh = (t > 0.0) ? bv_dot(e, H) : 0.0;
                bv_axpy(H, mu, ph);
                if (mu1 != 0.0 && edh != 0.0) bv_axpy(H, mu1 * edh, w);
            }
            if (t > 0.0) {
                const double eu = edotu[a], ev = edotu[b];
                const double uv = bv_dot(r.jac[a], r.jac[b]);
                BVec term = pmiu[a];
                term.scale(mu1 * ev);
                bv_axpy(term, mu1 * eu, pmiu[b]);
                bv_axpy(term, mu2 * eu * ev + mu1 * (uv - eu * ev) / t, w);
                H = H.empty() ? term : bv_add(H, term);
            }
        }

        // Now the first derivatives:
        if (deriv) {
            for (size_t a = 0; a < r.jac.size(); ++a) {
                bv_axpy(r.jac[a], mu, pmiu[a]);
                if (mu1 != 0.0 && edotu[a] != 0.0) bv_axpy(r.jac[a], mu1 * edotu[a], w);
            }
        }

        // Value update: y <- y + mu w
        bv_axpy(r.value, mu, w);
        const double drift2 = r.value.squaredNorm() + y0n2 - 2.0 * bv_dot(r.value, x);
        r.max_drift = std::max(r.max_drift, std::sqrt(std::max(drift2, 0.0)));
    }
    return r;
}

void BlendedComposition::build_locality(const std::vector<int>& step_home, int n_charts) {
    chart_ranges.assign(static_cast<size_t>(n_charts), {0, 0});
    chart_reps.assign(static_cast<size_t>(n_charts), BVec{});
    chart_radius.assign(static_cast<size_t>(n_charts), 0.0);
    for (size_t k = 0; k < steps.size(); ++k) {
        int home = step_home[k];
        steps[k].reject_block = home;
        steps[k].reject_col = Vec::Zero(steps[k].center.bdim);
        for (size_t b = 0; b < steps[k].center.blocks.size(); ++b)
            if (steps[k].center.blocks[b] == home)
                steps[k].reject_col = steps[k].center.data.col(static_cast<Eigen::Index>(b));
    }
    int i = 0;
    while (i < static_cast<int>(steps.size())) {
        int home = step_home[static_cast<size_t>(i)];
        int begin = i;
        while (i < static_cast<int>(steps.size()) && step_home[static_cast<size_t>(i)] == home) ++i;
        chart_ranges[static_cast<size_t>(home)] = {begin, i};
        int rep = (begin + i) / 2;
        chart_reps[static_cast<size_t>(home)] = steps[static_cast<size_t>(rep)].center;
        double rad = 0.0;
        for (int s = begin; s < i; ++s)
            rad = std::max(rad, std::sqrt(std::max(
                                    bv_dist2(steps[static_cast<size_t>(s)].center,
                                             chart_reps[static_cast<size_t>(home)]),
                                    0.0)));
        chart_radius[static_cast<size_t>(home)] = rad;
    }
}

namespace {

// Dot of a block vector against the slot-dense workspace column set.
double slot_dot(const BVec& a, const BlendedComposition::Workspace& ws, const Mat& dense) {
    double s = 0.0;
    for (size_t k = 0; k < a.blocks.size(); ++k) {
        int sl = ws.slot[static_cast<size_t>(a.blocks[k])];
        if (sl >= 0) s += a.data.col(static_cast<Eigen::Index>(k)).dot(dense.col(sl));
    }
    return s;
}

}  // namespace

BlendedComposition::EvalResult BlendedComposition::evaluate_local(
    const BVec& x, const std::vector<BVec>& tangents, const std::vector<int>& candidate_charts,
    Workspace& ws, int total_blocks) const {
    const int bdim = x.bdim;
    const int nt = static_cast<int>(tangents.size());

    // Reset the workspace.
    ws.slot.assign(static_cast<size_t>(total_blocks), -1);
    ws.blocks.clear();
    const int cap0 = 96;
    auto ensure_cap = [&](Mat& m, int need) {
        if (m.cols() < need || m.rows() != bdim) {
            Mat bigger = Mat::Zero(bdim, std::max(need, cap0) * 2);
            if (m.size() > 0 && m.rows() == bdim)
                bigger.leftCols(m.cols()) = m;
            m = std::move(bigger);
        }
    };
    ensure_cap(ws.y, cap0);
    ws.y.setZero();
    ws.tan.resize(static_cast<size_t>(nt));
    for (auto& t : ws.tan) {
        ensure_cap(t, cap0);
        t.setZero();
    }
    ensure_cap(ws.w, cap0);
    ensure_cap(ws.rel, cap0);
    ws.pmiu.resize(static_cast<size_t>(nt));
    for (auto& t : ws.pmiu) ensure_cap(t, cap0);
    ws.fcoef.clear();
    ws.edotu.assign(static_cast<size_t>(nt), 0.0);

    auto add_block = [&](int blk) {
        int sl = static_cast<int>(ws.blocks.size());
        ws.blocks.push_back(blk);
        ws.slot[static_cast<size_t>(blk)] = sl;
        int need = sl + 1;
        ensure_cap(ws.y, need);
        for (auto& t : ws.tan) ensure_cap(t, need);
        ensure_cap(ws.w, need);
        ensure_cap(ws.rel, need);
        for (auto& t : ws.pmiu) ensure_cap(t, need);
        ws.y.col(sl).setZero();
        for (auto& t : ws.tan) t.col(sl).setZero();
        return sl;
    };

    // Scatter the inputs.
    for (size_t k = 0; k < x.blocks.size(); ++k) {
        int sl = add_block(x.blocks[k]);
        ws.y.col(sl) = x.data.col(static_cast<Eigen::Index>(k));
    }
    for (int t = 0; t < nt; ++t)
        for (size_t k = 0; k < tangents[static_cast<size_t>(t)].blocks.size(); ++k) {
            int blk = tangents[static_cast<size_t>(t)].blocks[k];
            int sl = ws.slot[static_cast<size_t>(blk)];
            if (sl < 0) sl = add_block(blk);
            ws.tan[static_cast<size_t>(t)].col(sl) =
                tangents[static_cast<size_t>(t)].data.col(static_cast<Eigen::Index>(k));
        }

    auto active = [&](const Mat& m) { return m.leftCols(static_cast<int>(ws.blocks.size())); };
    double y0n2 = active(ws.y).squaredNorm();

    // Chart-level rejection, then the surviving ranges in global step order.
    std::vector<std::pair<int, int>> ranges;
    for (int c : candidate_charts) {
        const BVec& rep = chart_reps[static_cast<size_t>(c)];
        double d2 = active(ws.y).squaredNorm() + rep.squaredNorm() -
                    2.0 * slot_dot(rep, ws, ws.y);
        double cut = chart_radius[static_cast<size_t>(c)] + 0.5 + 0.35;  // patch + support + drift
        if (d2 <= cut * cut) ranges.push_back(chart_ranges[static_cast<size_t>(c)]);
    }
    std::sort(ranges.begin(), ranges.end());

    EvalResult out;
    double grow_cb_dummy = 0.0;
    (void)grow_cb_dummy;
    for (auto [begin, end] : ranges) {
        for (int si = begin; si < end; ++si) {
            const ProjectionStep& st = steps[static_cast<size_t>(si)];
            // Home-block distance alone already rejects most steps.
            if (st.reject_block >= 0) {
                int sl = ws.slot[static_cast<size_t>(st.reject_block)];
                double b2 = sl >= 0 ? (ws.y.col(sl) - st.reject_col).squaredNorm()
                                    : st.reject_col.squaredNorm();
                if (b2 >= 0.25) continue;
            }
            const int S = static_cast<int>(ws.blocks.size());
            double yn2 = ws.y.leftCols(S).squaredNorm();
            double d2 = yn2 + st.center_norm2 - 2.0 * slot_dot(st.center, ws, ws.y);
            if (d2 >= 0.25) continue;
            const double t = std::sqrt(std::max(d2, 0.0));
            const double mu = bump_.value(t);
            if (mu == 0.0) continue;

            // Make sure every block of this step has a slot.
            for (int blk : st.center.blocks)
                if (ws.slot[static_cast<size_t>(blk)] < 0) add_block(blk);
            for (const BVec& f : st.frame)
                for (int blk : f.blocks)
                    if (ws.slot[static_cast<size_t>(blk)] < 0) add_block(blk);
            const int S2 = static_cast<int>(ws.blocks.size());

            // rel = y - q ; w = P(y) - y = sum f <f, rel> - rel
            ws.rel.leftCols(S2) = ws.y.leftCols(S2);
            for (size_t k = 0; k < st.center.blocks.size(); ++k)
                ws.rel.col(ws.slot[static_cast<size_t>(st.center.blocks[k])]) -=
                    st.center.data.col(static_cast<Eigen::Index>(k));
            ws.w.leftCols(S2) = -ws.rel.leftCols(S2);
            ws.fcoef.assign(st.frame.size(), 0.0);
            for (size_t k = 0; k < st.frame.size(); ++k) {
                ws.fcoef[k] = slot_dot(st.frame[k], ws, ws.rel);
                for (size_t b = 0; b < st.frame[k].blocks.size(); ++b)
                    ws.w.col(ws.slot[static_cast<size_t>(st.frame[k].blocks[b])]) +=
                        ws.fcoef[k] * st.frame[k].data.col(static_cast<Eigen::Index>(b));
            }

            const double mu1 = nt > 0 ? bump_.d1(t) : 0.0;
            if (nt > 0) {
                for (int a = 0; a < nt; ++a) {
                    Mat& u = ws.tan[static_cast<size_t>(a)];
                    // pmiu = (P - I) u
                    ws.pmiu[static_cast<size_t>(a)].leftCols(S2) = -u.leftCols(S2);
                    for (size_t k = 0; k < st.frame.size(); ++k) {
                        double fu = slot_dot(st.frame[k], ws, u);
                        for (size_t b = 0; b < st.frame[k].blocks.size(); ++b)
                            ws.pmiu[static_cast<size_t>(a)].col(
                                ws.slot[static_cast<size_t>(st.frame[k].blocks[b])]) +=
                                fu * st.frame[k].data.col(static_cast<Eigen::Index>(b));
                    }
                    ws.edotu[static_cast<size_t>(a)] =
                        t > 0.0
                            ? ws.rel.leftCols(S2).cwiseProduct(u.leftCols(S2)).sum() / t
                            : 0.0;
                }
                for (int a = 0; a < nt; ++a) {
                    Mat& u = ws.tan[static_cast<size_t>(a)];
                    u.leftCols(S2) += mu * ws.pmiu[static_cast<size_t>(a)].leftCols(S2);
                    if (mu1 != 0.0 && ws.edotu[static_cast<size_t>(a)] != 0.0)
                        u.leftCols(S2) +=
                            (mu1 * ws.edotu[static_cast<size_t>(a)]) * ws.w.leftCols(S2);
                }
            }

            ws.y.leftCols(S2) += mu * ws.w.leftCols(S2);
            double drift2 = ws.y.leftCols(S2).squaredNorm() + y0n2 -
                            2.0 * slot_dot(x, ws, ws.y);
            out.max_drift = std::max(out.max_drift, std::sqrt(std::max(drift2, 0.0)));
        }
    }

    // Gather the results back into block vectors.
    const int S = static_cast<int>(ws.blocks.size());
    std::vector<int> order(static_cast<size_t>(S));
    for (int k = 0; k < S; ++k) order[static_cast<size_t>(k)] = k;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return ws.blocks[static_cast<size_t>(a)] < ws.blocks[static_cast<size_t>(b)]; });
    auto gather = [&](const Mat& dense) {
        BVec v;
        v.bdim = bdim;
        v.blocks.reserve(static_cast<size_t>(S));
        v.data = Mat::Zero(bdim, S);
        int col = 0;
        for (int k : order) {
            v.blocks.push_back(ws.blocks[static_cast<size_t>(k)]);
            v.data.col(col++) = dense.col(k);
        }
        return v;
    };
    out.value = gather(ws.y);
    out.jac.reserve(static_cast<size_t>(nt));
    for (int t = 0; t < nt; ++t) out.jac.push_back(gather(ws.tan[static_cast<size_t>(t)]));
    return out;
}

double InterpolantMap::domain_distance(const Vec& x) const {
    double best = kInf;
    const Vec xu = x / scale;
    for (const Vec& q : net_points) best = std::min(best, (xu - q).norm());
    return (best - 0.25) * scale;
}

Vec InterpolantMap::evaluate(const Vec& x) const {
    double dd = domain_distance(x);
    if (dd > 0.0)
        throw Error("outside interpolation domain by " + std::to_string(dd));
    auto res = engine.evaluate(BVec(Vec(x / scale)), {});
    return res.value.to_dense(1) * scale;
}

std::pair<Vec, Mat> InterpolantMap::value_and_jacobian(const Vec& x) const {
    const int N = ambient_dim;
    std::vector<BVec> tangents;
    tangents.reserve(N);
    for (int a = 0; a < N; ++a) tangents.emplace_back(Vec(Vec::Unit(N, a)));
    auto res = engine.evaluate(BVec(Vec(x / scale)), tangents);
    Mat J(N, N);
    for (int a = 0; a < N; ++a) J.col(a) = res.jac[a].to_dense(1);
    return {res.value.to_dense(1) * scale, J};
}

Mat InterpolantMap::jacobian(const Vec& x) const { return value_and_jacobian(x).second; }

std::vector<Mat> InterpolantMap::hessian(const Vec& x) const {
    const int N = ambient_dim;
    std::vector<BVec> tangents;
    for (int a = 0; a < N; ++a) tangents.emplace_back(Vec(Vec::Unit(N, a)));
    std::vector<std::pair<int, int>> pairs;
    for (int a = 0; a < N; ++a)
        for (int b = a; b < N; ++b) pairs.push_back({a, b});
    auto res = engine.evaluate(BVec(Vec(x / scale)), tangents, pairs);
    // Hessian of the original-scale map: d^2 (s f(x/s)) = (1/s) d^2f. Entry
    // [c](a,b) = second derivative of component c along a, b.
    std::vector<Mat> H(N, Mat::Zero(N, N));
    int k = 0;
    for (int a = 0; a < N; ++a)
        for (int b = a; b < N; ++b) {
            Vec h = res.hess[k++].empty() ? Vec::Zero(N) : res.hess[k - 1].to_dense(1);
            for (int c = 0; c < N; ++c) {
                H[c](a, b) = h[c] / scale;
                H[c](b, a) = h[c] / scale;
            }
        }
    return H;
}

double InterpolantMap::drift(const Vec& x) const {
    auto res = engine.evaluate(BVec(Vec(x / scale)), {});
    return res.max_drift * scale;
}

void InterpolantMap::to_json(nlohmann::json& j) const {
    j["scale"] = scale;
    j["ambient_dim"] = ambient_dim;
    j["net"] = net;
    j["flat_defect"] = diagnostics.flat_defect;
    j["hypothesis_met"] = diagnostics.hypothesis_met;
    nlohmann::json js = nlohmann::json::array();
    for (const auto& st : engine.steps) {
        nlohmann::json s;
        s["center"] = vec_to_json(st.center.to_dense(1));
        Mat fr(ambient_dim, static_cast<Eigen::Index>(st.frame.size()));
        for (size_t k = 0; k < st.frame.size(); ++k) fr.col(k) = st.frame[k].to_dense(1);
        s["frame"] = mat_to_json(fr);
        js.push_back(s);
    }
    j["steps"] = js;
    j["bump"] = {{"one_until", BumpProfile::kOne}, {"zero_from", BumpProfile::kZero}};
}

InterpolantMap build_interpolant(const PointCloud& x, double r, int n,
                                 const FlatnessCertificate* flats, const BuildOptions& opts) {
    require(x.size() > 0, "empty point cloud");
    InterpolantMap map;
    map.scale = r;
    map.ambient_dim = x.ambient_dim;

    // Unit-scale copy of the data.
    std::vector<Vec> xu(x.points.size());
    for (size_t i = 0; i < x.points.size(); ++i) xu[i] = x.points[i] / r;

    if (opts.net_override) {
        map.net = *opts.net_override;
    } else {
        Net net = maximal_separated_net(xu, opts.net_separation);
        map.net = net.indices;
    }

    NnGrid nn(xu, 1.0);
    double max_defect = 0.0;
    for (Index qi : map.net) {
        const Vec& q = xu[qi];
        ProjectionStep step;
        step.center = BVec(q);
        step.center_norm2 = q.squaredNorm();

        Mat frame;
        const FlatnessEntry* entry = flats ? flats->find(qi) : nullptr;
        if (entry && !entry->degenerate) {
            frame = entry->disc.frame;
            max_defect = std::max(max_defect, entry->defect);
        } else {
            PointCloud local(x.ambient_dim);
            for (int i : nn.within(q, 1.0)) local.add(xu[i] - q);
            FindDiscResult fd;
            try {
                fd = find_disc(local, Vec::Zero(x.ambient_dim), n);
            } catch (const Error& e) {
                throw Error(std::string(e.what()) + " at net center " + std::to_string(qi));
            }
            frame = fd.disc.frame;
            double defect = disc_hausdorff_defect(local, fd.disc, 1.0);
            max_defect = std::max(max_defect, defect * r);
        }
        for (int k = 0; k < frame.cols(); ++k) step.frame.emplace_back(Vec(frame.col(k)));
        map.engine.steps.push_back(std::move(step));
        map.net_points.push_back(q);
    }
    map.diagnostics.flat_defect = max_defect;
    map.diagnostics.hypothesis_met = max_defect / r < opts.sigma0;
    return map;
}

EmbeddedSurface sample_surface(std::shared_ptr<const InterpolantMap> map,
                               const PointCloud& x, double density, uint64_t seed) {
    EmbeddedSurface surf;
    surf.interpolant = map;
    surf.samples = PointCloud(x.ambient_dim);
    surf.sample_pitch = density;
    surf.dim = map->engine.steps.empty() ? 0
                                         : static_cast<int>(map->engine.steps[0].frame.size());

    const double delta = std::max(map->diagnostics.flat_defect, 1e-12);
    // Seeds: the data itself plus jittered copies filling U_delta(X) when the
    // tube is thicker than the sampling pitch.
    std::vector<Vec> seeds = x.points;
    if (delta > 0.5 * density) {
        Rng rng(seed);
        std::normal_distribution<double> g(0.0, 1.0);
        const int jitters = 3;
        for (const Vec& p : x.points)
            for (int k = 0; k < jitters; ++k) {
                Vec dir(x.ambient_dim);
                for (int c = 0; c < x.ambient_dim; ++c) dir[c] = g(rng);
                double nr = dir.norm();
                if (nr == 0.0) continue;
                double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
                seeds.push_back(p + dir / nr * delta * std::pow(u, 1.0 / x.ambient_dim));
            }
    }

    // Images, deduplicated at half pitch. Deterministic: seed order decides.
    std::vector<Vec> kept;
    std::vector<Vec> kept_pre;
    for (const Vec& s : seeds) {
        if (map->domain_distance(s) > 0.0) continue;
        Vec img = map->evaluate(s);
        bool dup = false;
        for (const Vec& k : kept)  // replaced by grid below once nonempty
            if ((k - img).norm() < 0.5 * density) {
                dup = true;
                break;
            }
        if (!dup) {
            kept.push_back(img);
            kept_pre.push_back(s);
        }
    }
    surf.samples.points = kept;
    surf.preimages = kept_pre;

    // Tangent frames from the Jacobian column space.
    for (const Vec& s : kept_pre) {
        Mat J = map->jacobian(s);
        Eigen::JacobiSVD<Mat> svd(J, Eigen::ComputeFullU);
        surf.tangent_frames.push_back(svd.matrixU().leftCols(surf.dim));
    }

    surf.diagnostics.hausdorff_to_data = hausdorff_distance(x.points, surf.samples.points);
    return surf;
}

SffResult second_fundamental_form_bound(const EmbeddedSurface& surface) {
    SffResult out;
    const int n = surface.dim;
    const int N = surface.samples.ambient_dim;
    const double radius = surface.interpolant->scale / 4.0;
    const int need = (n + 2) * (n + 1) / 2;
    NnGrid nn(surface.samples.points, radius);

    for (int i = 0; i < surface.samples.size(); ++i) {
        const Vec& y = surface.samples.points[i];
        const Mat& T = surface.tangent_frames[i];
        auto nbrs = nn.within(y, radius);
        if (static_cast<int>(nbrs.size()) < need) {
            ++out.skipped;
            continue;
        }
        // Normal frame: complement of T.
        Eigen::HouseholderQR<Mat> qr(T);
        Mat Q = qr.householderQ();
        Mat Nor = Q.rightCols(N - n);
        // Fit eta_k = a + b.xi + 1/2 xi^T Q_k xi per normal direction.
        const int terms = 1 + n + n * (n + 1) / 2;
        Mat A(static_cast<int>(nbrs.size()), terms);
        Mat rhs(static_cast<int>(nbrs.size()), N - n);
        for (size_t r = 0; r < nbrs.size(); ++r) {
            Vec rel = surface.samples.points[nbrs[r]] - y;
            Vec xi = T.transpose() * rel;
            Vec eta = Nor.transpose() * rel;
            int c = 0;
            A(static_cast<int>(r), c++) = 1.0;
            for (int a = 0; a < n; ++a) A(static_cast<int>(r), c++) = xi[a];
            for (int a = 0; a < n; ++a)
                for (int b = a; b < n; ++b)
                    A(static_cast<int>(r), c++) = (a == b ? 0.5 : 1.0) * xi[a] * xi[b];
            rhs.row(static_cast<int>(r)) = eta.transpose();
        }
        Mat sol = A.colPivHouseholderQr().solve(rhs);
        out.fit_residual = std::max(out.fit_residual, (A * sol - rhs).cwiseAbs().maxCoeff());
        for (int k = 0; k < N - n; ++k) {
            Mat Qk(n, n);
            int c = 1 + n;
            for (int a = 0; a < n; ++a)
                for (int b = a; b < n; ++b) {
                    Qk(a, b) = Qk(b, a) = sol(c, k);
                    ++c;
                }
            Eigen::SelfAdjointEigenSolver<Mat> es(Qk);
            out.bound = std::max(out.bound, es.eigenvalues().cwiseAbs().maxCoeff());
        }
    }
    return out;
}

double normal_injectivity_lower(const EmbeddedSurface& surface, double probe_radius) {
    const int N = surface.samples.ambient_dim;
    const int n = surface.dim;
    const double pitch = surface.sample_pitch;
    NnGrid nn(surface.samples.points, std::max(pitch, probe_radius / 4.0));

    const int stride = std::max(1, surface.samples.size() / 200);
    double verified = 0.0;
    const int nsteps = 8;
    for (int s = 1; s <= nsteps; ++s) {
        double t = probe_radius * s / nsteps;
        bool ok = true;
        for (int i = 0; i < surface.samples.size() && ok; i += stride) {
            const Vec& y = surface.samples.points[i];
            Eigen::HouseholderQR<Mat> qr(surface.tangent_frames[i]);
            Mat Nor = Mat(qr.householderQ()).rightCols(N - n);
            for (int k = 0; k < N - n && ok; ++k)
                for (int sign = -1; sign <= 1 && ok; sign += 2) {
                    Vec probe = y + sign * t * Nor.col(k);
                    auto [j, d] = nn.nearest(probe);
                    // Another sheet strictly closer than the foot point.
                    if (d < t - 2.0 * pitch) ok = false;
                    // Nearest sample should sit near the foot point.
                    double allow = std::sqrt(2.0 * t * pitch) + 2.0 * pitch;
                    if (ok && (surface.samples.points[j] - y).norm() > allow + 1e-12) ok = false;
                }
        }
        if (!ok) break;
        verified = t;
    }
    return verified;
}

Vec approx_normal_projection(const EmbeddedSurface& surface, const Vec& x, bool refine) {
    NnGrid nn(surface.samples.points, std::max(surface.sample_pitch, 1e-6));
    auto [j, d] = nn.nearest(x);
    const double r = surface.interpolant->scale;
    if (d > r / 3.0)
        throw Error("point too far from surface: " + std::to_string(d));
    Vec p;
    if (surface.interpolant->domain_distance(x) <= 0.0)
        p = surface.interpolant->evaluate(x);
    else
        p = x;
    if (!refine) return p;
    auto [k, dk] = nn.nearest(p);
    const Vec& s = surface.samples.points[k];
    const Mat& T = surface.tangent_frames[k];
    return s + T * (T.transpose() * (p - s));
}

double tangent_angle_check(const EmbeddedSurface& surface, const FlatnessCertificate& flats) {
    NnGrid nn(surface.samples.points, std::max(surface.sample_pitch, 1e-6));
    double worst = 0.0;
    for (const auto& e : flats.entries) {
        if (e.degenerate) continue;
        Vec y = approx_normal_projection(surface, e.disc.base);
        auto [k, d] = nn.nearest(y);
        worst = std::max(worst, principal_angle(e.disc.frame, surface.tangent_frames[k]));
    }
    return worst;
}

}  // namespace recon
