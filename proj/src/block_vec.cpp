#include "recon/block_vec.hpp"

namespace recon {

double bv_dot(const BVec& a, const BVec& b) {
    double s = 0.0;
    size_t i = 0, j = 0;
    while (i < a.blocks.size() && j < b.blocks.size()) {
        if (a.blocks[i] < b.blocks[j])
            ++i;
        else if (a.blocks[i] > b.blocks[j])
            ++j;
        else {
            s += a.data.col(i).dot(b.data.col(j));
            ++i;
            ++j;
        }
    }
    return s;
}

BVec bv_lincomb(double ca, const BVec& a, double cb, const BVec& b) {
    BVec out;
    out.bdim = a.empty() ? b.bdim : a.bdim;
    out.blocks.reserve(a.blocks.size() + b.blocks.size());
    std::vector<std::pair<int, int>> src;  // (col in a)+1 or -(col in b)-1 markers unused; do two passes
    size_t i = 0, j = 0;
    std::vector<Eigen::Index> ai, bi;
    while (i < a.blocks.size() || j < b.blocks.size()) {
        int ab = i < a.blocks.size() ? a.blocks[i] : INT32_MAX;
        int bb = j < b.blocks.size() ? b.blocks[j] : INT32_MAX;
        if (ab < bb) {
            out.blocks.push_back(ab);
            ai.push_back(static_cast<Eigen::Index>(i));
            bi.push_back(-1);
            ++i;
        } else if (bb < ab) {
            out.blocks.push_back(bb);
            ai.push_back(-1);
            bi.push_back(static_cast<Eigen::Index>(j));
            ++j;
        } else {
            out.blocks.push_back(ab);
            ai.push_back(static_cast<Eigen::Index>(i));
            bi.push_back(static_cast<Eigen::Index>(j));
            ++i;
            ++j;
        }
    }
    out.data = Mat::Zero(out.bdim, static_cast<Eigen::Index>(out.blocks.size()));
    for (size_t k = 0; k < out.blocks.size(); ++k) {
        if (ai[k] >= 0) out.data.col(k) += ca * a.data.col(ai[k]);
        if (bi[k] >= 0) out.data.col(k) += cb * b.data.col(bi[k]);
    }
    return out;
}

void bv_axpy(BVec& a, double c, const BVec& b) {
    // Fast path: b's support contained in a's.
    size_t i = 0;
    bool contained = true;
    for (size_t j = 0; j < b.blocks.size(); ++j) {
        while (i < a.blocks.size() && a.blocks[i] < b.blocks[j]) ++i;
        if (i == a.blocks.size() || a.blocks[i] != b.blocks[j]) {
            contained = false;
            break;
        }
    }
    if (contained) {
        i = 0;
        for (size_t j = 0; j < b.blocks.size(); ++j) {
            while (a.blocks[i] < b.blocks[j]) ++i;
            a.data.col(static_cast<Eigen::Index>(i)) += c * b.data.col(static_cast<Eigen::Index>(j));
        }
        return;
    }
    a = bv_lincomb(1.0, a, c, b);
}

}  // namespace recon
