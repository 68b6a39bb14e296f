#include "recon/config.hpp"

#include "recon/json_util.hpp"

namespace recon {

ConstantsConfig ConstantsConfig::defaults() {
    ConstantsConfig c;
    // Calibrated by `mrecon calibrate` (2x the observed max ratio over the
    // seeded synthetic suite); non-rigorous.
    c.frozen_C = {
        {"transition", 8.0},   {"cocycle", 16.0},      {"metric_defect", 4.0},
        {"quasi_epsilon", 8.0}, {"quasi_lambda", 4.0},  {"curvature", 40.0},
        {"censored_bilip", 40.0}, {"tangent_angle", 50.0}, {"interp_hausdorff", 5.0},
    };
    c.tolerances = {
        {"jacobian_fd_rel", 1e-4},
        {"energy_drift", 1e-6},
        {"partition_sum", 1e-12},
        {"tensoriality", 1e-3},
    };
    return c;
}

double ConstantsConfig::C(const std::string& name) const {
    auto it = frozen_C.find(name);
    require(it != frozen_C.end(), "unknown frozen constant " + name);
    return it->second;
}

ConstantsConfig ConstantsConfig::from_json_file(const std::string& path) {
    auto j = load_json(path);
    ConstantsConfig c = defaults();
    c.sigma0 = j.value("sigma0", c.sigma0);
    c.sigma1 = j.value("sigma1", c.sigma1);
    c.seed = j.value("seed", c.seed);
    c.threads = j.value("threads", c.threads);
    c.interp_net_separation = j.value("interp_net_separation", c.interp_net_separation);
    if (j.contains("frozen_C"))
        for (auto& [k, v] : j["frozen_C"].items()) c.frozen_C[k] = v.get<double>();
    if (j.contains("tolerances"))
        for (auto& [k, v] : j["tolerances"].items()) c.tolerances[k] = v.get<double>();
    if (j.contains("atlas")) {
        const auto& a = j["atlas"];
        c.atlas.chart_net_separation = a.value("chart_net_separation", c.atlas.chart_net_separation);
        c.atlas.kappa = a.value("kappa", c.atlas.kappa);
        c.atlas.sigma_sep = a.value("sigma_sep", c.atlas.sigma_sep);
        c.atlas.r0 = a.value("r0", c.atlas.r0);
        c.atlas.grid_pitch = a.value("grid_pitch", c.atlas.grid_pitch);
        c.atlas.threads = c.threads;
    }
    return c;
}

void ConstantsConfig::to_json_file(const std::string& path) const {
    nlohmann::json j;
    j["sigma0"] = sigma0;
    j["sigma1"] = sigma1;
    j["seed"] = seed;
    j["threads"] = threads;
    j["interp_net_separation"] = interp_net_separation;
    j["frozen_C"] = frozen_C;
    j["tolerances"] = tolerances;
    j["atlas"] = {{"chart_net_separation", atlas.chart_net_separation},
                  {"kappa", atlas.kappa},
                  {"sigma_sep", atlas.sigma_sep},
                  {"r0", atlas.r0},
                  {"grid_pitch", atlas.grid_pitch}};
    j["note"] = "frozen_C values are calibrated, not rigorous";
    save_json(path, j);
}

}  // namespace recon
