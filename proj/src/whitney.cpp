#include "recon/whitney.hpp"

#include <algorithm>

namespace recon {

WhitneyMap::WhitneyMap(std::shared_ptr<const ChartSystem> cs,
                       std::shared_ptr<const TransitionSet> transitions, double kappa)
    : cs_(std::move(cs)), trans_(std::move(transitions)), sphere_(cs_->dim), kappa_(kappa) {
    require(kappa_ > 0.0 && kappa_ <= 5.0, "kappa must lie in (0, 5]");
    const int J = cs_->size();
    arms_.resize(J);
    for (int j = 0; j < J; ++j) {
        std::vector<int> targets = cs_->adjacency[j];
        targets.push_back(j);
        std::sort(targets.begin(), targets.end());
        for (int i : targets) {
            Arm a;
            a.chart = i;
            if (i == j) {
                a.rot = Mat::Identity(cs_->dim, cs_->dim);
                a.tr = Vec::Zero(cs_->dim);
            } else {
                TransitionMap t = trans_->get(j, i);
                a.rot = t.rotation;
                a.tr = t.translation;
            }
            arms_[j].push_back(std::move(a));
        }
    }
}

WhitneyMap::Eval WhitneyMap::evaluate(int j, const Vec& x,
                                      const std::vector<Vec>& tangents) const {
    Eval out;
    const int b = block_dim();
    const int n = cs_->dim;
    std::vector<int> blocks;
    std::vector<Vec> vals;
    std::vector<std::vector<Vec>> jvals(tangents.size());

    for (const Arm& a : arms_[j]) {
        Vec arg = (a.rot * x + a.tr - cs_->charts[a.chart].base) / kappa_;
        double t = arg.norm();
        if (t >= SphereMap::kSupport) continue;
        blocks.push_back(a.chart);
        vals.push_back(sphere_.value(arg));
        if (!tangents.empty()) {
            Mat dphi = sphere_.jacobian(arg) / kappa_;
            for (size_t k = 0; k < tangents.size(); ++k)
                jvals[k].push_back(dphi * (a.rot * tangents[k]));
        }
    }

    out.value.bdim = b;
    out.value.blocks = blocks;
    out.value.data = Mat::Zero(b, static_cast<Eigen::Index>(blocks.size()));
    for (size_t k = 0; k < blocks.size(); ++k) out.value.data.col(k) = vals[k];
    out.jac.resize(tangents.size());
    for (size_t tk = 0; tk < tangents.size(); ++tk) {
        out.jac[tk].bdim = b;
        out.jac[tk].blocks = blocks;
        out.jac[tk].data = Mat::Zero(b, static_cast<Eigen::Index>(blocks.size()));
        for (size_t k = 0; k < blocks.size(); ++k) out.jac[tk].data.col(k) = jvals[tk][k];
    }
    (void)n;
    return out;
}

WhitneyMap::BiLipschitz WhitneyMap::measure_bilipschitz(int i, int probes, uint64_t seed) const {
    BiLipschitz bl;
    Rng rng(seed + static_cast<uint64_t>(i));
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    const int n = cs_->dim;
    const double rad = kappa_ / 10.0;
    std::vector<Vec> pts;
    while (static_cast<int>(pts.size()) < probes) {
        Vec p(n);
        for (int k = 0; k < n; ++k) p[k] = uni(rng) * rad;
        if (p.norm() <= rad) pts.push_back(cs_->charts[i].base + p);
    }
    for (size_t a = 0; a < pts.size(); ++a) {
        BVec fa = evaluate(i, pts[a]).value;
        for (size_t c = a + 1; c < pts.size(); ++c) {
            BVec fc = evaluate(i, pts[c]).value;
            double num = std::sqrt(std::max(bv_dist2(fa, fc), 0.0));
            double den = (pts[a] - pts[c]).norm();
            if (den < 1e-12) continue;
            bl.lower = std::min(bl.lower, num / den);
            bl.upper = std::max(bl.upper, num / den);
        }
    }
    return bl;
}

}  // namespace recon
