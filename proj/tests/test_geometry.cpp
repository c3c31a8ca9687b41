#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "leafrec/geometry.hpp"
#include "oracles.hpp"

using namespace leafrec;

namespace {

BinaryMask ellipse_mask(int w, int h, double cx, double cy, double a, double b,
                        double angle = 0) {
    BinaryMask m(w, h);
    double ca = std::cos(angle), sa = std::sin(angle);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double dx = x - cx, dy = y - cy;
            double u = dx * ca + dy * sa, v = -dx * sa + dy * ca;
            if (u * u / (a * a) + v * v / (b * b) <= 1.0) m.v[m.idx(x, y)] = 1;
        }
    return m;
}

}  // namespace

TEST_CASE("principal axis of an axis-aligned elongated blob") {
    BinaryMask m = ellipse_mask(100, 100, 50, 50, 30, 10, 0);
    PrincipalAxes ax = principal_axes(m);
    CHECK(std::abs(ax.angle) < 0.02);  // major axis horizontal
    CHECK(ax.major > ax.minor);
}

TEST_CASE("principal axis recovers a rotated ellipse") {
    for (double deg : {20.0, 45.0, 70.0, -30.0}) {
        double theta = deg * std::numbers::pi / 180.0;
        BinaryMask m = ellipse_mask(160, 160, 80, 80, 45, 12, theta);
        double got = principal_axis(m);
        double want = std::atan2(std::sin(theta), std::cos(theta));
        // Compare as undirected angles.
        double d = std::abs(got - want);
        d = std::min(d, std::numbers::pi - d);
        CHECK(d < 0.03);
    }
}

TEST_CASE("principal axes degenerate input") {
    BinaryMask m(10, 10);
    CHECK_THROWS_AS(principal_axes(m), DegenerateInput);
    m.v[0] = 1;
    CHECK_THROWS_AS(principal_axes(m), DegenerateInput);
}

TEST_CASE("align_upright turns the major axis vertical") {
    BinaryMask m = ellipse_mask(200, 200, 100, 100, 60, 15, 0.5);
    RasterImage img(200, 200, 30, 120, 40);
    AlignResult r = align_upright(img, m);
    CHECK(r.rotated);
    BBox b = content_bbox(r.mask);
    CHECK(b.height() > b.width());
    // Mask area is approximately preserved by the rotation.
    double before = static_cast<double>(m.count());
    double after = static_cast<double>(r.mask.count());
    CHECK(std::abs(after - before) / before < 0.05);
}

TEST_CASE("align_upright skips near-isotropic shapes") {
    BinaryMask m = ellipse_mask(100, 100, 50, 50, 20, 19, 0.7);
    RasterImage img(100, 100, 10, 10, 10);
    AlignResult r = align_upright(img, m);
    CHECK_FALSE(r.rotated);
    CHECK(r.mask.v == m.v);
}

TEST_CASE("contour of a single row is closed and 8-connected") {
    BinaryMask m(10, 5);
    for (int x = 2; x < 8; ++x) m.v[m.idx(x, 2)] = 1;
    Contour c = trace_contour(m);
    REQUIRE(c.points.size() >= 6);
    for (std::size_t i = 0; i < c.points.size(); ++i) {
        auto [x0, y0] = c.points[i];
        auto [x1, y1] = c.points[(i + 1) % c.points.size()];
        CHECK(std::max(std::abs(x1 - x0), std::abs(y1 - y0)) <= 1);
        CHECK(m.at(x0, y0) == 1);
    }
}

TEST_CASE("contour of a rectangle visits its border") {
    BinaryMask m(20, 20);
    for (int y = 4; y < 12; ++y)
        for (int x = 3; x < 15; ++x) m.v[m.idx(x, y)] = 1;
    Contour c = trace_contour(m);
    // Border pixel count of a 12x8 rectangle = 2*12 + 2*8 - 4 = 36.
    CHECK(c.points.size() == 36);
}

TEST_CASE("contour requires enough foreground") {
    BinaryMask m(5, 5);
    CHECK_THROWS(trace_contour(m));
    m.v[m.idx(2, 2)] = 1;
    CHECK_THROWS(trace_contour(m));
}

TEST_CASE("geometric features of a filled rectangle") {
    BinaryMask m(30, 30);
    for (int y = 10; y < 20; ++y)
        for (int x = 5; x < 25; ++x) m.v[m.idx(x, y)] = 1;
    Contour c = trace_contour(m);
    GeometricFeatures g = geometric_features(m, c);
    CHECK(g.length == doctest::Approx(10));   // vertical extent
    CHECK(g.width == doctest::Approx(20));    // horizontal extent
    CHECK(g.area == doctest::Approx(200));
    // Axis-aligned rectangle boundary: all axial steps.
    CHECK(g.perimeter == doctest::Approx(2 * 19 + 2 * 9));
    CHECK(g.diameter == doctest::Approx(std::sqrt(4 * 200 / std::numbers::pi)));
}

TEST_CASE("reference morphological feature values") {
    // Regression against published intermediate values for one leaf:
    // L=154, W=1552, A=168711.5, P=3248.9.
    GeometricFeatures g;
    g.length = 154;
    g.width = 1552;
    g.area = 168711.5;
    g.perimeter = 3248.9;
    g.diameter = std::sqrt(4.0 * g.area / std::numbers::pi);
    CHECK(g.diameter == doctest::Approx(463.5).epsilon(0.001));

    auto f = morphological_features(g);
    CHECK(f[0] == doctest::Approx(0.099).epsilon(0.02));   // aspect L/W
    CHECK(f[1] == doctest::Approx(0.20).epsilon(0.03));    // form factor
    CHECK(f[2] == doctest::Approx(1.42).epsilon(0.01));    // rectangularity
    CHECK(f[3] == doctest::Approx(3.01).epsilon(0.01));    // narrow factor D/L
    CHECK(f[4] == doctest::Approx(7.01).epsilon(0.01));    // P/D
    CHECK(f[5] == doctest::Approx(1.90).epsilon(0.01));    // P/(L+W)
}

TEST_CASE("moments match a double-loop oracle") {
    std::mt19937 rng(3);
    GrayImage g(24, 18);
    BinaryMask m(24, 18);
    for (int y = 3; y < 15; ++y)
        for (int x = 4; x < 20; ++x) {
            m.v[m.idx(x, y)] = 1;
            g.v[g.idx(x, y)] = static_cast<std::uint8_t>(40 + rng() % 180);
        }
    auto feats = moment_features(g, m);
    auto ref = oracle::moments(g, m);

    // Spatial: M00,M01,M02,M03,M10,M11,M12,M20,M21,M30.
    double spatial[10] = {ref.M[0][0], ref.M[0][1], ref.M[0][2], ref.M[0][3],
                          ref.M[1][0], ref.M[1][1], ref.M[1][2], ref.M[2][0],
                          ref.M[2][1], ref.M[3][0]};
    for (int i = 0; i < 10; ++i)
        CHECK(feats[i] == doctest::Approx(spatial[i]).epsilon(1e-9));
    // Central: mu02,mu03,mu11,mu12,mu20,mu21,mu30.
    double central[7] = {ref.mu[0][2], ref.mu[0][3], ref.mu[1][1], ref.mu[1][2],
                         ref.mu[2][0], ref.mu[2][1], ref.mu[3][0]};
    for (int i = 0; i < 7; ++i)
        CHECK(feats[10 + i] == doctest::Approx(central[i]).epsilon(1e-9));
    // Normalized central, same order.
    double eta[7] = {ref.eta[0][2], ref.eta[0][3], ref.eta[1][1], ref.eta[1][2],
                     ref.eta[2][0], ref.eta[2][1], ref.eta[3][0]};
    for (int i = 0; i < 7; ++i)
        CHECK(feats[17 + i] == doctest::Approx(eta[i]).epsilon(1e-9));
}

TEST_CASE("central moments are translation invariant") {
    GrayImage g1(40, 40), g2(40, 40);
    BinaryMask m1(40, 40), m2(40, 40);
    std::mt19937 rng(5);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) {
            std::uint8_t v = static_cast<std::uint8_t>(50 + rng() % 150);
            g1.v[g1.idx(x + 5, y + 5)] = v;
            m1.v[m1.idx(x + 5, y + 5)] = 1;
            g2.v[g2.idx(x + 20, y + 17)] = v;
            m2.v[m2.idx(x + 20, y + 17)] = 1;
        }
    auto f1 = moment_features(g1, m1);
    auto f2 = moment_features(g2, m2);
    for (int i = 10; i < 24; ++i)
        CHECK(f1[i] == doctest::Approx(f2[i]).epsilon(1e-9));
}

TEST_CASE("shape vector layout") {
    BinaryMask m(30, 30);
    GrayImage g(30, 30, 0);
    for (int y = 8; y < 22; ++y)
        for (int x = 10; x < 20; ++x) {
            m.v[m.idx(x, y)] = 1;
            g.v[g.idx(x, y)] = 120;
        }
    Contour c = trace_contour(m);
    auto sv = shape_vector(g, m, c);
    GeometricFeatures gf = geometric_features(m, c);
    CHECK(sv[0] == gf.length);
    CHECK(sv[1] == gf.width);
    CHECK(sv[2] == gf.area);
    CHECK(sv[3] == gf.perimeter);
    CHECK(sv[4] == gf.diameter);
    auto mf = morphological_features(gf);
    for (int i = 0; i < 6; ++i) CHECK(sv[5 + i] == mf[i]);
    auto mm = moment_features(g, m);
    for (int i = 0; i < 24; ++i) CHECK(sv[11 + i] == mm[i]);
}
