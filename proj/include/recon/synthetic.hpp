#pragma once

#include <optional>

#include "recon/metric_space.hpp"
#include "recon/point_cloud.hpp"

#include <json.hpp>

namespace recon {

// Deterministic synthetic inputs with analytic ground truth attached.
struct SyntheticSpec {
    std::string family;   // flat-ball | circle | sphere | flat-torus | swiss-roll
    double radius = 1.0;  // radius, or side length for the torus
    int count = 1000;
    double noise = 0.0;
    std::string metric_kind = "geodesic";  // sphere metric: geodesic | chordal
    std::optional<double> censor_cutoff;
    double censor_delta_hat = 0.0;
    uint64_t seed = 0;

    static SyntheticSpec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

struct SyntheticOutput {
    PointCloud cloud;                        // empty for metric-only families
    std::optional<FiniteMetricSpace> metric;
    nlohmann::json ground_truth;
};

SyntheticOutput generate(const SyntheticSpec& spec);

}  // namespace recon
