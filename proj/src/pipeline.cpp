#include "recon/pipeline.hpp"

#include <filesystem>
#include <fstream>

#include "recon/json_util.hpp"
#include "recon/parallel.hpp"

namespace fs = std::filesystem;

namespace recon {

namespace {

CheckRecord make_check(const std::string& name, const std::string& anchor, double measured,
                       double bound, bool warn_only = false) {
    CheckRecord c{name, anchor, measured, bound, "pass"};
    if (!(measured <= bound)) c.status = warn_only ? "warn" : "fail";
    return c;
}

}  // namespace

PipelineResult pipeline_reconstruct(const FiniteMetricSpace& input, int dim, double r,
                                    const ConstantsConfig& config, const std::string& out_dir,
                                    const PipelineOptions& opts,
                                    const nlohmann::json& ground_truth) {
    PipelineResult res;
    res.run_dir = out_dir;
    fs::create_directories(out_dir);
    fs::create_directories(out_dir + "/inputs");
    fs::create_directories(out_dir + "/certificates");
    fs::create_directories(out_dir + "/atlas");
    fs::create_directories(out_dir + "/diagnostics");

    config.to_json_file(out_dir + "/config.lock");
    input.to_json_file(out_dir + "/inputs/metric.json");
    if (!ground_truth.is_null() && !ground_truth.empty())
        save_json(out_dir + "/inputs/ground_truth.json", ground_truth);

    // ---- Stage 1: closeness verification.
    double max_da = 0.0;
    {
        nlohmann::json table = nlohmann::json::array();
        std::vector<double> per_point(static_cast<size_t>(input.size()), -1.0);
        std::vector<Index> centers;
        for (Index c = 0; c < input.size(); c += opts.closeness_stride) centers.push_back(c);
        parallel_for(static_cast<int>(centers.size()), config.threads, [&](int k) {
            Index c = centers[static_cast<size_t>(k)];
            CenteredBall ball = extract_ball(input, c, r);
            if (ball.space.size() < dim + 1) return;
            ball.space = ball.space.rescaled(1.0 / r);
            GHCertificate cert = ghdist_to_ball(ball, dim);
            per_point[static_cast<size_t>(c)] = cert.delta_a;
        });
        for (Index c = 0; c < input.size(); ++c) {
            if (per_point[static_cast<size_t>(c)] < 0.0) continue;
            max_da = std::max(max_da, per_point[static_cast<size_t>(c)]);
            table.push_back({{"point", c}, {"delta_a", per_point[static_cast<size_t>(c)]}});
        }
        save_json(out_dir + "/certificates/closeness.json",
                  {{"per_point", table}, {"max_delta_a", max_da}, {"scale", r}});
        res.max_delta_a = max_da;
        res.checks.push_back(make_check("closeness", "d_GH(B_r(x), B_r^n) < sigma1 * r", max_da,
                                        config.sigma1, opts.warn_and_proceed));
        if (res.checks.back().status == "fail") {
            res.any_fail = true;
            nlohmann::json summary;
            summary["checks"] = nlohmann::json::array();
            for (const auto& c : res.checks)
                summary["checks"].push_back({{"name", c.name},
                                             {"anchor", c.anchor},
                                             {"measured", c.measured},
                                             {"bound", c.bound},
                                             {"status", c.status}});
            summary["stopped_at"] = "closeness";
            res.summary = summary;
            save_json(out_dir + "/summary.json", summary);
            return res;
        }
    }

    // ---- Stages 2-6: charts through atlas.
    AtlasOptions aopts = config.atlas;
    aopts.threads = config.threads;
    auto atlas = std::make_shared<Atlas>(construct_manifold(input, r, dim, aopts));
    res.atlas = atlas;

    const double da = std::max(max_da, 1e-12);
    res.checks.push_back(make_check("transition_residual", "|A_ij(f_i(x)) - f_j(x)| < C*delta",
                                    atlas->max_transition_residual,
                                    config.C("transition") * da));
    res.checks.push_back(make_check("cocycle_residual", "|A_jk(A_ij(x)) - A_ik(x)| < C*delta",
                                    atlas->cocycle.max_residual, config.C("cocycle") * da));

    // Metric defect over all stored grid nodes.
    double gdef = 0.0;
    for (const ChartGrid& gr : atlas->grids)
        for (const MetricNode& node : gr.nodes)
            if (node.valid)
                gdef = std::max(gdef,
                                (node.g - Mat::Identity(dim, dim)).cwiseAbs().maxCoeff());
    res.checks.push_back(make_check("metric_defect", "|psi_j^* g - g_E| < C_m * delta", gdef,
                                    config.C("metric_defect") * da));

    // Partition of unity at random probes.
    {
        Rng rng(config.seed + 17);
        std::uniform_real_distribution<double> uni(-1.0, 1.0);
        double worst = 0.0;
        const int probes = 1000;
        for (int p = 0; p < probes; ++p) {
            int j = static_cast<int>(rng() % static_cast<uint64_t>(atlas->cs->size()));
            Vec x(dim);
            for (int k = 0; k < dim; ++k) x[k] = uni(rng) * atlas->radius_publish();
            if (x.norm() > atlas->radius_publish()) {
                --p;
                continue;
            }
            auto parts = atlas->partition_at(j, atlas->cs->charts[j].base + x);
            double sum = 0.0;
            for (auto& [i, u] : parts) sum += u;
            worst = std::max(worst, std::abs(sum - 1.0));
        }
        res.checks.push_back(make_check("partition_sum", "sum_i u_i = 1", worst,
                                        config.tolerances.at("partition_sum")));
    }

    // Quasi-isometry report.
    PsiReport psi = measure_psi_quasi_isometry(*atlas);
    res.checks.push_back(make_check("quasi_isometry_epsilon",
                                    "lambda^-1 d_X - eps < d_g(Psi x, Psi y) < lambda d_X + eps",
                                    psi.qi.epsilon, config.C("quasi_epsilon") * da));
    res.checks.push_back(make_check("quasi_isometry_lambda", "lambda <= 1 + C*delta/r",
                                    psi.qi.lambda - 1.0, config.C("quasi_lambda") * da));
    save_json(out_dir + "/diagnostics/psi_report.json",
              {{"lambda", psi.qi.lambda},
               {"epsilon", psi.qi.epsilon},
               {"epsilon_additive", psi.qi.epsilon_additive},
               {"net_radius", psi.qi.net_radius},
               {"measured_points", psi.measured_points}});

    // Censored-input shape check.
    if (input.has_censoring() && !ground_truth.is_null() && ground_truth.contains("curvature")) {
        double K = ground_truth["curvature"].get<double>();
        double dh = ground_truth["spec"].value("censor_delta_hat", 0.0);
        if (K > 0.0 && dh > 0.0) {
            double bound = config.C("censored_bilip") * std::cbrt(K) * std::pow(dh, 2.0 / 3.0);
            res.checks.push_back(make_check("censored_bilipschitz",
                                            "L = 1 + C K^(1/3) deltahat^(2/3)",
                                            psi.qi.lambda - 1.0, bound));
        }
    }

    // ---- Stage 7: diagnostics.
    if (opts.run_diagnostics) {
        CurvatureReport curv = curvature_scan(*atlas);
        curv.to_json_file(out_dir + "/diagnostics/curvature.json");
        res.checks.push_back(make_check("curvature_bound", "|Sec| <= C*delta*r^-3",
                                        curv.max_abs_sec,
                                        config.C("curvature") * da / sqr(r)));
    }

    if (opts.write_atlas) atlas->save(out_dir + "/atlas/atlas.json");

    nlohmann::json summary;
    summary["checks"] = nlohmann::json::array();
    for (const auto& c : res.checks) {
        summary["checks"].push_back({{"name", c.name},
                                     {"anchor", c.anchor},
                                     {"measured", c.measured},
                                     {"bound", c.bound},
                                     {"status", c.status}});
        if (c.status == "fail") res.any_fail = true;
    }
    summary["max_delta_a"] = max_da;
    summary["charts"] = atlas->cs->size();
    summary["scale"] = r;
    res.summary = summary;
    save_json(out_dir + "/summary.json", summary);
    return res;
}

void emit_plots(const std::string& run_dir, const std::string& out_dir) {
    fs::create_directories(out_dir);
    // Flatness / closeness histogram data.
    if (fs::exists(run_dir + "/certificates/closeness.json")) {
        auto j = load_json(run_dir + "/certificates/closeness.json");
        std::ofstream out(out_dir + "/closeness_hist.csv");
        out << "point,delta_a\n";
        out.precision(17);
        for (const auto& e : j["per_point"])
            out << e["point"].get<int>() << "," << e["delta_a"].get<double>() << "\n";
    }
    // Curvature table.
    if (fs::exists(run_dir + "/diagnostics/curvature.json")) {
        auto j = load_json(run_dir + "/diagnostics/curvature.json");
        std::ofstream out(out_dir + "/curvature.csv");
        out << "chart,sec,error_estimate,reliable\n";
        out.precision(17);
        for (const auto& p : j["probes"])
            out << p["chart"].get<int>() << "," << p["sec"].get<double>() << ","
                << p["error_estimate"].get<double>() << "," << (p["reliable"].get<bool>() ? 1 : 0)
                << "\n";
    }
    // Transition residual table.
    if (fs::exists(run_dir + "/summary.json")) {
        auto j = load_json(run_dir + "/summary.json");
        std::ofstream out(out_dir + "/checks.csv");
        out << "name,measured,bound,status\n";
        out.precision(17);
        for (const auto& c : j["checks"])
            out << c["name"].get<std::string>() << "," << c["measured"].get<double>() << ","
                << c["bound"].get<double>() << "," << c["status"].get<std::string>() << "\n";
    }
}

}  // namespace recon
