#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "recon/gh_verify.hpp"

using namespace recon;

namespace {

FiniteMetricSpace from_points(const std::vector<Vec>& pts) {
    const int n = static_cast<int>(pts.size());
    Mat d(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) d(i, j) = (pts[i] - pts[j]).norm();
    return FiniteMetricSpace(d);
}

// Grid sample of the unit n-ball at the given spacing; index 0 is the point
// nearest the origin.
std::vector<Vec> ball_grid(int n, double h) {
    std::vector<Vec> pts;
    int m = static_cast<int>(1.0 / h) + 1;
    std::vector<int> idx(n, -m);
    while (true) {
        Vec p(n);
        for (int k = 0; k < n; ++k) p[k] = idx[k] * h;
        if (p.norm() <= 1.0) pts.push_back(p);
        int k = 0;
        while (k < n && ++idx[k] > m) idx[k++] = -m;
        if (k == n) break;
    }
    size_t best = 0;
    for (size_t i = 1; i < pts.size(); ++i)
        if (pts[i].norm() < pts[best].norm()) best = i;
    std::swap(pts[0], pts[best]);
    return pts;
}

// Independent covering oracle on a finer grid than the implementation's.
double covering_oracle(const std::vector<Vec>& image, double probe_pitch) {
    int n = static_cast<int>(image[0].size());
    double worst = 0.0;
    int m = static_cast<int>(1.0 / probe_pitch);
    std::vector<int> idx(n, -m);
    while (true) {
        Vec p(n);
        for (int k = 0; k < n; ++k) p[k] = idx[k] * probe_pitch;
        if (p.norm() <= 1.0) {
            double best = kInf;
            for (const Vec& q : image) best = std::min(best, (p - q).norm());
            worst = std::max(worst, best);
        }
        int k = 0;
        while (k < n && ++idx[k] > m) idx[k++] = -m;
        if (k == n) break;
    }
    return worst;
}

}  // namespace

TEST_CASE("extract_ball filters by radius and keeps the center first") {
    std::vector<Vec> pts;
    for (double x : {0.0, 1.0, 2.0}) {
        Vec p(1);
        p << x;
        pts.push_back(p);
    }
    auto x = from_points(pts);
    auto whole = extract_ball(x, 1, 5.0);
    CHECK(whole.space.size() == 3);
    CHECK(whole.global_indices[0] == 1);
    auto just_center = extract_ball(x, 1, 0.0);
    CHECK(just_center.space.size() == 1);
    auto all = extract_ball(x, 1, 1.0);
    CHECK(all.space.size() == 3);
}

TEST_CASE("extract_ball refuses censored interiors") {
    Mat d(3, 3);
    d << 0, 0.5, 0.9, 0.5, 0, 0.9, 0.9, 0.9, 0;
    FiniteMetricSpace x(d, 0.9, 0.9);
    CHECK_THROWS_WITH_AS(extract_ball(x, 0, 1.0), "ball exceeds known-distance horizon", Error);
    CHECK_NOTHROW(extract_ball(x, 0, 0.6));
}

TEST_CASE("ghdist certifies exact grid samples of the unit disc") {
    for (double h : {0.05, 0.1}) {
        auto pts = ball_grid(2, h);
        CenteredBall ball;
        ball.space = from_points(pts);
        ball.center_global = 0;
        for (int i = 0; i < static_cast<int>(pts.size()); ++i) ball.global_indices.push_back(i);
        GHCertificate cert = ghdist_to_ball(ball, 2);
        CHECK(cert.coords[0].norm() == 0.0);  // f(x0) = 0 always
        CHECK_FALSE(cert.degenerate_frame);
        CHECK(cert.delta_a <= 0.08 + 2.0 * h);
        CHECK(cert.delta_a == std::max(cert.delta_1, cert.delta_2));
        // delta_1 must be the exact pairwise distortion (independent recheck).
        double d1 = 0.0;
        for (size_t a = 0; a < pts.size(); ++a)
            for (size_t b = a + 1; b < pts.size(); ++b)
                d1 = std::max(d1, std::abs(ball.space.d(static_cast<int>(a), static_cast<int>(b)) -
                                           (cert.coords[a] - cert.coords[b]).norm()));
        CHECK(cert.delta_1 == doctest::Approx(d1).epsilon(1e-12));
        // delta_2 upper-bounds the true covering defect (pitch margin).
        double cover = covering_oracle(cert.coords, 0.01);
        CHECK(cert.delta_2 >= cover - 1e-9);
        // Image inside B_{1 + delta_a}.
        for (const Vec& c : cert.coords) CHECK(c.norm() <= 1.0 + cert.delta_a + 1e-12);
    }
}

TEST_CASE("ghdist at h = 0.05 meets the 0.08 example level") {
    auto pts = ball_grid(2, 0.05);
    CenteredBall ball;
    ball.space = from_points(pts);
    for (int i = 0; i < static_cast<int>(pts.size()); ++i) ball.global_indices.push_back(i);
    GHCertificate cert = ghdist_to_ball(ball, 2);
    CHECK(cert.delta_a <= 0.08);
}

TEST_CASE("ghdist depends only on the distance matrix") {
    auto pts = ball_grid(2, 0.1);
    // Rigid motion of the sample leaves the metric untouched.
    Mat rot(2, 2);
    double a = 0.7;
    rot << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    std::vector<Vec> moved;
    for (const Vec& p : pts) moved.push_back(rot * p + Vec(Eigen::Vector2d(3.0, -1.0)));
    CenteredBall b1, b2;
    b1.space = from_points(pts);
    b2.space = from_points(moved);
    GHCertificate c1 = ghdist_to_ball(b1, 2);
    GHCertificate c2 = ghdist_to_ball(b2, 2);
    CHECK(c1.delta_a == doctest::Approx(c2.delta_a).epsilon(1e-12));
    CHECK(c1.frame == c2.frame);
    for (size_t i = 0; i < c1.coords.size(); ++i)
        CHECK((c1.coords[i] - c2.coords[i]).norm() < 1e-9);
}

TEST_CASE("ghdist scale equivariance") {
    auto pts = ball_grid(2, 0.1);
    CenteredBall b;
    b.space = from_points(pts);
    GHCertificate c = ghdist_to_ball(b, 2);
    CenteredBall bs;
    bs.space = b.space.rescaled(3.0);
    // Rescaling back to unit radius must reproduce the certificate exactly.
    bs.space = bs.space.rescaled(1.0 / 3.0);
    GHCertificate cs = ghdist_to_ball(bs, 2);
    CHECK(cs.delta_a == doctest::Approx(c.delta_a).epsilon(1e-14));
}

TEST_CASE("ghdist needs n+1 points") {
    Mat d(2, 2);
    d << 0, 1, 1, 0;
    CenteredBall b;
    b.space = FiniteMetricSpace(d);
    CHECK_THROWS_AS(ghdist_to_ball(b, 2), Error);
    GHCertificate c = ghdist_to_ball(b, 1);  // 2 points suffice for n = 1
    CHECK(c.coords[0].size() == 1);
}

TEST_CASE("ghdist on a chordal spherical cap tracks the K r^3 scale") {
    // Intrinsic radius-1 cap on a radius-3 sphere, chordal metric.
    const double R = 3.0;
    std::vector<Vec> pts;
    Vec c0(3);
    c0 << 0, 0, R;
    pts.push_back(c0);
    for (int ring = 1; ring <= 8; ++ring) {
        double theta = (1.0 / R) * ring / 8.0;
        int m = 6 * ring;
        for (int k = 0; k < m; ++k) {
            double phi = 2.0 * M_PI * k / m;
            Vec p(3);
            p << R * std::sin(theta) * std::cos(phi), R * std::sin(theta) * std::sin(phi),
                R * std::cos(theta);
            pts.push_back(p);
        }
    }
    // The metric ball of intrinsic radius 1: distances measured chordally.
    CenteredBall ball;
    ball.space = from_points(pts);
    GHCertificate cert = ghdist_to_ball(ball, 2);
    const double kr3 = 1.0 / (R * R);  // K r^3 with K = 1/R^2, r = 1
    CHECK(cert.delta_a <= 10.0 * kr3);
    // Diameter-defect lower bound on the pointed GH distance: the chordal cap
    // is strictly smaller in diameter than B_1^2.
    double diam = 0.0;
    for (size_t a = 0; a < pts.size(); ++a)
        for (size_t b = 0; b < pts.size(); ++b)
            diam = std::max(diam, (pts[a] - pts[b]).norm());
    double lower = (2.0 - diam) / 2.0;
    CHECK(cert.delta_a >= lower - 1e-9);
    CHECK(lower >= kr3 / 10.0);
}

TEST_CASE("alignment recovers rotations") {
    Rng rng(11);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<Vec> f1;
    for (int i = 0; i < 30; ++i) {
        Vec p(2);
        p << uni(rng), uni(rng);
        f1.push_back(p);
    }
    std::vector<Index> common;
    for (int i = 0; i < 30; ++i) common.push_back(i);

    SUBCASE("identity") {
        auto al = align_coordinate_maps(f1, f1, common);
        CHECK((al.rotation - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(al.residual == doctest::Approx(0.0));
    }
    SUBCASE("pure rotation is inverted to 1e-8") {
        Mat rot(2, 2);
        double a = 1.234;
        rot << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
        std::vector<Vec> f2;
        for (const Vec& p : f1) f2.push_back(rot * p);
        auto al = align_coordinate_maps(f1, f2, common);
        CHECK((al.rotation - rot.transpose()).cwiseAbs().maxCoeff() < 1e-8);
        CHECK(al.residual < 1e-8);
        CHECK((al.rotation * al.rotation.transpose() - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() <
              1e-10);
    }
    SUBCASE("noise stays within a small multiple over seeded trials") {
        int bad = 0;
        for (int trial = 0; trial < 100; ++trial) {
            Rng trng(1000 + static_cast<uint64_t>(trial));
            double eta = 0.01;
            double a = std::uniform_real_distribution<double>(0.0, 2 * M_PI)(trng);
            Mat rot(2, 2);
            rot << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
            std::vector<Vec> f2;
            std::uniform_real_distribution<double> nuni(-eta, eta);
            for (const Vec& p : f1) {
                Vec q = rot * p;
                q[0] += nuni(trng);
                q[1] += nuni(trng);
                f2.push_back(q);
            }
            auto al = align_coordinate_maps(f1, f2, common);
            if (al.residual > 5.0 * eta) ++bad;
        }
        CHECK(bad == 0);
    }
    SUBCASE("rank-deficient input is rejected") {
        std::vector<Vec> collinear;
        for (int i = 0; i < 10; ++i) {
            Vec p(2);
            p << i * 0.1, 0.0;
            collinear.push_back(p);
        }
        std::vector<Index> idx;
        for (int i = 0; i < 10; ++i) idx.push_back(i);
        CHECK_THROWS_AS(align_coordinate_maps(collinear, collinear, idx), Error);
    }
}

TEST_CASE("closeness scan separates interior from boundary") {
    // 20 x 20 grid on [0, 2]^2, r = 0.5.
    std::vector<Vec> pts;
    for (int a = 0; a < 20; ++a)
        for (int b = 0; b < 20; ++b) {
            Vec p(2);
            p << 2.0 * a / 19.0, 2.0 * b / 19.0;
            pts.push_back(p);
        }
    auto x = from_points(pts);
    auto scan = closeness_to_Rn_scan(x, 0.5, 2);
    double interior_max = 0.0, boundary_min = kInf;
    for (int i = 0; i < x.size(); ++i) {
        const Vec& p = pts[static_cast<size_t>(i)];
        bool interior = p[0] > 0.55 && p[0] < 1.45 && p[1] > 0.55 && p[1] < 1.45;
        if (interior)
            interior_max = std::max(interior_max, scan.delta_a[static_cast<size_t>(i)]);
        else
            boundary_min = std::min(boundary_min, scan.delta_a[static_cast<size_t>(i)]);
    }
    // Interior balls behave like genuine disc samples; boundary ones lose a
    // half-plane and their covering defect jumps by several multiples.
    CHECK(interior_max < 0.12 * 0.5 * 2.2);
    double boundary_max = scan.max_delta_a;
    CHECK(boundary_max > 2.0 * interior_max);
    CHECK(scan.delta_a.size() == pts.size());
}

TEST_CASE("closeness scan runs on a two-point space with n = 1") {
    Mat d(2, 2);
    d << 0, 0.4, 0.4, 0;
    FiniteMetricSpace x(d);
    auto scan = closeness_to_Rn_scan(x, 1.0, 1);
    CHECK(scan.delta_a.size() == 2);
}

TEST_CASE("certificate serialization") {
    auto pts = ball_grid(2, 0.2);
    CenteredBall b;
    b.space = from_points(pts);
    GHCertificate c = ghdist_to_ball(b, 2);
    c.to_json_file("/tmp/recon_cert_test.json");
    CHECK(true);
}
