#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <queue>

#include "recon/metric_space.hpp"

using namespace recon;

namespace {

FiniteMetricSpace line_points(const std::vector<double>& xs) {
    const int n = static_cast<int>(xs.size());
    Mat d(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) d(i, j) = std::abs(xs[i] - xs[j]);
    return FiniteMetricSpace(d);
}

std::vector<Vec> circle_samples(int n, double radius, double phase = 0.0) {
    std::vector<Vec> pts;
    for (int k = 0; k < n; ++k) {
        double a = 2.0 * M_PI * k / n + phase;
        Vec p(2);
        p << radius * std::cos(a), radius * std::sin(a);
        pts.push_back(p);
    }
    return pts;
}

// Independent oracle: brute-force directed max-min over explicit pairs.
double hausdorff_oracle(const std::vector<Vec>& a, const std::vector<Vec>& b) {
    double h = 0.0;
    for (const Vec& p : a) {
        double best = kInf;
        for (const Vec& q : b) best = std::min(best, (p - q).norm());
        h = std::max(h, best);
    }
    for (const Vec& q : b) {
        double best = kInf;
        for (const Vec& p : a) best = std::min(best, (p - q).norm());
        h = std::max(h, best);
    }
    return h;
}

// Independent Dijkstra oracle over an explicit edge filter.
Mat dijkstra_oracle(const Mat& d, double r) {
    const int n = static_cast<int>(d.rows());
    Mat out = Mat::Constant(n, n, kInf);
    for (int s = 0; s < n; ++s) {
        std::vector<double> dist(n, kInf);
        dist[s] = 0.0;
        std::priority_queue<std::pair<double, int>, std::vector<std::pair<double, int>>,
                            std::greater<>>
            pq;
        pq.push({0.0, s});
        while (!pq.empty()) {
            auto [dv, v] = pq.top();
            pq.pop();
            if (dv > dist[v]) continue;
            for (int w = 0; w < n; ++w) {
                if (w == v) continue;
                bool linked = d(v, w) < r;
                for (int z = 0; z < n && !linked; ++z)
                    linked = z != v && z != w && std::max(d(z, v), d(z, w)) < r;
                if (!linked) continue;
                if (dv + d(v, w) < dist[w]) {
                    dist[w] = dv + d(v, w);
                    pq.push({dist[w], w});
                }
            }
        }
        for (int t = 0; t < n; ++t) out(s, t) = dist[t];
    }
    return out;
}

}  // namespace

TEST_CASE("hausdorff distance basics") {
    auto x = line_points({0.0, 1.0});
    CHECK(hausdorff_distance({0}, {0}, x) == 0.0);
    CHECK(hausdorff_distance({0}, {0, 1}, x) == doctest::Approx(1.0));
    CHECK_THROWS_AS(hausdorff_distance({}, {0}, x), Error);
}

TEST_CASE("hausdorff of concentric circle samples") {
    auto a = circle_samples(64, 1.0);
    auto b = circle_samples(64, 1.1);
    double expected = hausdorff_oracle(a, b);
    CHECK(hausdorff_distance(a, b) == doctest::Approx(expected).epsilon(1e-14));
    // Aligned angles: the nearest point is the radially aligned one.
    CHECK(std::abs(expected - 0.1) < 1e-12);
}

TEST_CASE("hausdorff triangle inequality over random subsets") {
    Rng rng(3);
    std::vector<Vec> pts;
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int i = 0; i < 40; ++i) {
        Vec p(2);
        p << uni(rng), uni(rng);
        pts.push_back(p);
    }
    Mat d(40, 40);
    for (int i = 0; i < 40; ++i)
        for (int j = 0; j < 40; ++j) d(i, j) = (pts[i] - pts[j]).norm();
    FiniteMetricSpace x(d);
    for (int trial = 0; trial < 30; ++trial) {
        auto pick = [&]() {
            std::vector<Index> s;
            for (int i = 0; i < 40; ++i)
                if (rng() % 3 == 0) s.push_back(i);
            if (s.empty()) s.push_back(static_cast<Index>(rng() % 40));
            return s;
        };
        auto A = pick(), B = pick(), C = pick();
        double ab = hausdorff_distance(A, B, x);
        double bc = hausdorff_distance(B, C, x);
        double ac = hausdorff_distance(A, C, x);
        CHECK(ac <= ab + bc + 1e-12);
    }
}

TEST_CASE("maximal separated net on the line") {
    auto x = line_points({0.0, 0.5, 1.0});
    Net net = maximal_separated_net(x, 0.6);
    CHECK(net.indices == std::vector<Index>{0, 2});
    CHECK(net.covering_radius == doctest::Approx(0.5));
}

TEST_CASE("net keeps everything when s is below the minimum gap") {
    auto x = line_points({0.0, 0.3, 0.9, 1.5});
    Net net = maximal_separated_net(x, 0.1);
    CHECK(static_cast<int>(net.indices.size()) == 4);
}

TEST_CASE("net on a 10x10 grid matches the greedy oracle") {
    std::vector<Vec> pts;
    for (int a = 0; a < 10; ++a)
        for (int b = 0; b < 10; ++b) {
            Vec p(2);
            p << a / 9.0, b / 9.0;
            pts.push_back(p);
        }
    Net net = maximal_separated_net(pts, 0.35);
    // Independent greedy re-run.
    std::vector<int> oracle;
    for (int i = 0; i < 100; ++i) {
        bool ok = true;
        for (int j : oracle)
            if ((pts[i] - pts[j]).norm() < 0.35) ok = false;
        if (ok) oracle.push_back(i);
    }
    CHECK(net.indices.size() == oracle.size());
    CHECK(static_cast<int>(net.indices.size()) == 12);
    for (size_t k = 0; k < oracle.size(); ++k) CHECK(net.indices[k] == oracle[k]);
    // Maximality: every excluded point violates separation.
    for (int i = 0; i < 100; ++i) {
        if (std::find(net.indices.begin(), net.indices.end(), i) != net.indices.end()) continue;
        double nearest = kInf;
        for (int j : net.indices) nearest = std::min(nearest, (pts[i] - pts[j]).norm());
        CHECK(nearest < 0.35);
    }
    CHECK(net.covering_radius < 0.35);
}

TEST_CASE("intrinsify keeps small spaces unchanged") {
    auto x = line_points({0.0, 0.1, 0.2});
    auto res = intrinsify(x, 1.0);
    CHECK(res.n_components == 1);
    CHECK((res.single().matrix() - x.matrix()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("intrinsify of the chordal circle matches the Dijkstra oracle") {
    auto pts = circle_samples(360, 1.0);
    Mat d(360, 360);
    for (int i = 0; i < 360; ++i)
        for (int j = 0; j < 360; ++j) d(i, j) = (pts[i] - pts[j]).norm();
    FiniteMetricSpace x(d);
    auto res = intrinsify(x, 0.2);
    CHECK(res.n_components == 1);
    Mat oracle = dijkstra_oracle(d, 0.2);
    CHECK((res.single().matrix() - oracle).cwiseAbs().maxCoeff() < 1e-12);
    // Antipodal pair: the chord-chain length approaches the arc length pi from
    // below; the hop quantization leaves a deficit of about 4.7e-3 here.
    double anti = res.single().d(0, 180);
    CHECK(anti == doctest::Approx(oracle(0, 180)));
    // Witness-based links allow hops of arc ~2r, so the chord-vs-arc deficit
    // at the antipode is ~1.9e-2 here.
    CHECK(std::abs(anti - M_PI) < 2.5e-2);
    CHECK(anti <= M_PI);
    // Monotonicity and idempotence.
    CHECK(((res.single().matrix() - x.matrix()).minCoeff()) >= -1e-15);
    auto res2 = intrinsify(res.single(), 0.2);
    CHECK((res2.single().matrix() - res.single().matrix()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("intrinsify separates far clusters") {
    auto x = line_points({0.0, 0.1, 10.0, 10.1});
    auto res = intrinsify(x, 1.0);
    CHECK(res.n_components == 2);
    CHECK(res.members(0) == std::vector<Index>{0, 1});
    CHECK(res.members(1) == std::vector<Index>{2, 3});
}

TEST_CASE("delta straightness checks") {
    auto x = line_points({0.0, 1.0, 2.0});
    ChainCertificate chain{{0, 1, 2}, 1e-9, 1.5};
    auto res = check_delta_straight(chain, x);
    CHECK(res.ok);
    CHECK(res.worst_excess == doctest::Approx(0.0));

    Mat tri(3, 3);
    tri << 0, 1, 1, 1, 0, 1, 1, 1, 0;
    FiniteMetricSpace t(tri);
    ChainCertificate c2{{0, 1, 2}, 0.5, 1.5};
    auto r2 = check_delta_straight(c2, t);
    CHECK_FALSE(r2.ok);
    CHECK(r2.worst_excess == doctest::Approx(1.0));

    ChainCertificate c3{{0, 2}, 0.5, 3.0};
    CHECK(check_delta_straight(c3, x).ok);
}

TEST_CASE("delta intrinsic witness search") {
    // Dense sample of a segment: all pairs witnessed at delta = 4 eps.
    std::vector<double> xs;
    const double eps = 0.02;
    for (int i = 0; i <= 50; ++i) xs.push_back(i * eps);
    auto x = line_points(xs);
    auto res = delta_intrinsic_witness(x, 4.0 * eps);
    CHECK(res.all_witnessed());
    for (auto& [pair, cert] : res.witnesses) CHECK(check_delta_straight(cert, x).ok);

    auto two = line_points({0.0, 1.0});
    auto r2 = delta_intrinsic_witness(two, 2.0);
    CHECK(r2.all_witnessed());
    CHECK(r2.witnesses.at({0, 1}).points.size() == 2);

    auto r3 = delta_intrinsic_witness(two, 0.1);
    CHECK_FALSE(r3.all_witnessed());
    CHECK(r3.failures == std::vector<std::pair<Index, Index>>{{0, 1}});
}

TEST_CASE("witness after intrinsify on a length-space sample") {
    auto pts = circle_samples(200, 1.0);
    Mat d(200, 200);
    for (int i = 0; i < 200; ++i)
        for (int j = 0; j < 200; ++j) d(i, j) = (pts[i] - pts[j]).norm();
    const double eps = 2.0 * std::sin(M_PI / 200.0);  // sample spacing
    auto res = intrinsify(FiniteMetricSpace(d), 4.0 * eps);
    auto wit = delta_intrinsic_witness(res.single(), 10.0 * eps);
    CHECK(wit.all_witnessed());
}

TEST_CASE("quasi-isometry measurement") {
    auto x = line_points({0.0, 1.0, 3.0});
    std::vector<Index> id{0, 1, 2};
    auto rep = measure_quasi_isometry(id, x, x);
    CHECK(rep.lambda == doctest::Approx(1.0));
    CHECK(rep.epsilon == doctest::Approx(0.0));
    CHECK(rep.net_radius == doctest::Approx(0.0));

    FiniteMetricSpace y(Mat(x.matrix() * 2.0));
    auto rep2 = measure_quasi_isometry(id, x, y);
    CHECK(rep2.lambda == doctest::Approx(2.0));
    CHECK(rep2.epsilon == doctest::Approx(0.0));
    // Log-regression oracle for the exact-scaling case: the ratio of every
    // pair is exactly 2, so the multiplicative fit must be 2.
    double worst_ratio = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            worst_ratio = std::max(worst_ratio, y.d(i, j) / x.d(i, j));
    CHECK(rep2.lambda == doctest::Approx(worst_ratio));

    // Constant map: epsilon at least the diameter under the additive fit.
    std::vector<Index> cst{0, 0, 0};
    auto rep3 = measure_quasi_isometry(cst, x, x);
    CHECK(rep3.epsilon_additive >= 3.0 - 1e-12);
    CHECK(rep3.epsilon >= 3.0 - 1e-12);
}

TEST_CASE("censored entries are flagged and excluded from links") {
    Mat d(3, 3);
    d << 0, 0.5, 2.0, 0.5, 0, 2.0, 2.0, 2.0, 0;
    FiniteMetricSpace x(d, 2.0, 2.0);
    CHECK(x.censored(0, 2));
    CHECK_FALSE(x.censored(0, 1));
    // The censored pair never becomes a link, so intrinsify splits.
    auto res = intrinsify(x, 3.0);
    CHECK(res.n_components == 2);
}

TEST_CASE("metric json round trip") {
    Mat d(3, 3);
    d << 0, 1, 2, 1, 0, 1.5, 2, 1.5, 0;
    FiniteMetricSpace x(d, 1.8, 1.8);
    x.to_json_file("/tmp/recon_metric_test.json");
    auto y = FiniteMetricSpace::from_json_file("/tmp/recon_metric_test.json");
    CHECK((x.matrix() - y.matrix()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(y.cutoff() == x.cutoff());
    CHECK(y.censored(0, 2));
}
