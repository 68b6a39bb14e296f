#pragma once

#include "recon/config.hpp"
#include "recon/geodesics.hpp"
#include "recon/synthetic.hpp"

namespace recon {

struct CheckRecord {
    std::string name;
    std::string anchor;   // the inequality being checked, as a formula string
    double measured = 0.0;
    double bound = 0.0;
    std::string status;   // pass | warn | fail | skip
};

struct PipelineResult {
    std::string run_dir;
    std::vector<CheckRecord> checks;
    bool any_fail = false;
    nlohmann::json summary;
    std::shared_ptr<Atlas> atlas;  // kept for in-process consumers
    double max_delta_a = 0.0;      // unit scale
};

struct PipelineOptions {
    bool warn_and_proceed = true;
    bool write_atlas = false;   // atlas files are large; off by default
    bool run_diagnostics = true;
    int closeness_stride = 1;   // scan every k-th point
};

// Full metric-space pipeline: verify, charts, transitions, whitney, surface,
// atlas, diagnose. Writes the run directory and returns the records.
PipelineResult pipeline_reconstruct(const FiniteMetricSpace& input, int dim, double r,
                                    const ConstantsConfig& config, const std::string& out_dir,
                                    const PipelineOptions& opts = {},
                                    const nlohmann::json& ground_truth = {});

// Plot-ready CSV/JSON bundles extracted from a finished run directory.
void emit_plots(const std::string& run_dir, const std::string& out_dir);

}  // namespace recon
