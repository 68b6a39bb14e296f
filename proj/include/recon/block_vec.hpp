#pragma once

#include "recon/common.hpp"

namespace recon {

// Vector in a block-structured ambient space: B blocks of size bdim, only the
// listed blocks stored (all others zero). A plain dense vector is the special
// case of one block. Block ids are kept sorted.
struct BVec {
    int bdim = 0;
    std::vector<int> blocks;
    Mat data;  // bdim x blocks.size()

    BVec() = default;
    explicit BVec(const Vec& dense) : bdim(static_cast<int>(dense.size())), blocks{0} {
        data = dense;
    }
    BVec(int bdim_, std::vector<int> blocks_, Mat data_)
        : bdim(bdim_), blocks(std::move(blocks_)), data(std::move(data_)) {}

    bool empty() const { return blocks.empty(); }

    Vec to_dense(int total_blocks) const {
        Vec out = Vec::Zero(static_cast<Eigen::Index>(bdim) * total_blocks);
        for (size_t k = 0; k < blocks.size(); ++k)
            out.segment(static_cast<Eigen::Index>(bdim) * blocks[k], bdim) = data.col(k);
        return out;
    }

    double squaredNorm() const { return data.squaredNorm(); }
    double norm() const { return data.norm(); }

    void scale(double a) { data *= a; }
};

double bv_dot(const BVec& a, const BVec& b);
BVec bv_lincomb(double ca, const BVec& a, double cb, const BVec& b);
inline BVec bv_sub(const BVec& a, const BVec& b) { return bv_lincomb(1.0, a, -1.0, b); }
inline BVec bv_add(const BVec& a, const BVec& b) { return bv_lincomb(1.0, a, 1.0, b); }
// a += c*b
void bv_axpy(BVec& a, double c, const BVec& b);
inline double bv_dist2(const BVec& a, const BVec& b) {
    return a.squaredNorm() + b.squaredNorm() - 2.0 * bv_dot(a, b);
}

}  // namespace recon
