#pragma once

#include <functional>

#include "recon/atlas.hpp"

namespace recon {

// Positive-definite metric tensor field over an open chart domain. Grid-backed
// fields interpolate multilinearly; analytic fields wrap a callable (used by
// tests and by the synthetic ground truths).
class MetricSource {
public:
    virtual ~MetricSource() = default;
    virtual int dim() const = 0;
    // False outside the domain.
    virtual bool eval(const Vec& x, Mat* g) const = 0;
};

class AnalyticMetric : public MetricSource {
public:
    AnalyticMetric(int n, std::function<Mat(const Vec&)> fn) : n_(n), fn_(std::move(fn)) {}
    int dim() const override { return n_; }
    bool eval(const Vec& x, Mat* g) const override {
        *g = fn_(x);
        return true;
    }

private:
    int n_;
    std::function<Mat(const Vec&)> fn_;
};

// View of one chart's stored metric grid (centered chart coordinates).
class ChartMetric : public MetricSource {
public:
    ChartMetric(const Atlas& atlas, int chart) : atlas_(atlas), chart_(chart) {}
    int dim() const override { return atlas_.dim; }
    bool eval(const Vec& x, Mat* g) const override { return atlas_.metric_at(chart_, x, g); }
    double grid_pitch() const { return atlas_.grids[chart_].pitch; }

private:
    const Atlas& atlas_;
    int chart_;
};

// Christoffel symbols from central differences of g at step h; result[k](i,j)
// is the symbol with upper index k, symmetric in (i,j). Throws within h of the
// domain boundary.
std::vector<Mat> christoffel(const MetricSource& field, const Vec& x, double h);

struct SectionalResult {
    double value = 0.0;
    double error_estimate = 0.0;  // from step halving
    bool reliable = true;         // halving agreement within 20 percent
};

// Sectional curvature of the plane spanned by (u, v) at x, by differencing the
// Christoffel symbols. u, v need not be orthonormal.
SectionalResult sectional_curvature(const MetricSource& field, const Vec& x, const Vec& u,
                                    const Vec& v, double h);

struct CurvatureProbe {
    int chart = -1;
    Vec point;        // centered chart coordinates
    double sec = 0.0; // original distance units
    double error_estimate = 0.0;
    bool reliable = true;
};

struct CurvatureReport {
    std::vector<CurvatureProbe> probes;
    double max_abs_sec = 0.0;    // over reliable probes, original units
    int unreliable = 0;
    void to_json_file(const std::string& path) const;
};

// Probes every chart near its center. Sectional values are rescaled to the
// original distance units (1/scale^2 factor).
CurvatureReport curvature_scan(const Atlas& atlas, int probes_per_chart = 1);

}  // namespace recon
