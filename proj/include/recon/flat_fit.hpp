#pragma once

#include "recon/point_cloud.hpp"

namespace recon {

struct FlatnessEntry {
    Index center = -1;
    AffineSubspace disc;       // empty frame when degenerate
    double defect = kInf;      // Hausdorff defect at the certificate's scale
    bool degenerate = false;   // neighborhood too small or near-dependent
};

struct FlatnessCertificate {
    std::vector<FlatnessEntry> entries;
    double max_defect = 0.0;
    double scale = 0.0;  // r
    int dim = 0;

    const FlatnessEntry* find(Index center) const {
        for (const auto& e : entries)
            if (e.center == center) return &e;
        return nullptr;
    }
    void to_json_file(const std::string& path) const;
};

struct FindDiscResult {
    AffineSubspace disc;
    std::vector<int> selected;   // indices into the neighborhood
    double min_singular = 0.0;   // of the selected (x_i - center) matrix
    Mat raw_gram;                // Gram of the raw selected vectors
};

// FindDisc on a neighborhood rescaled so the ball radius is 1. `center` is a
// point of R^N, not necessarily in `neighborhood`. Throws on fewer than n
// points besides the center or a near-dependent selection.
FindDiscResult find_disc(const PointCloud& neighborhood, const Vec& center, int n);

// Two-sided Hausdorff defect between the points and the disc of radius r.
// The disc side is discretized (grid for n <= 3, low-discrepancy otherwise)
// and the discretization pitch is added to that side, keeping the certificate
// one-sided sound.
double disc_hausdorff_defect(const PointCloud& neighborhood, const AffineSubspace& disc,
                             double r, double pitch_fraction = 1.0 / 50.0);

// Per-center certification of closeness to n-flats at scale r. Centers default
// to every point; pass net indices to restrict. Degenerate neighborhoods are
// flagged with infinite defect rather than aborting the scan.
FlatnessCertificate flatness_scan(const PointCloud& x, double r, int n,
                                  const std::vector<Index>& centers = {});

}  // namespace recon
