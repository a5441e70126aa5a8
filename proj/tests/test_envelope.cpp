#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "mesogrow/envelope.hpp"

using namespace mesogrow;
using namespace mesogrow::envelope;

namespace {

std::vector<Vec2> circle_points(int n, double r = 1.0, Vec2 c = {0, 0})
{
    std::vector<Vec2> pts;
    for (int i = 0; i < n; ++i) {
        double a = 2 * M_PI * i / n;
        pts.push_back({c.x + r * std::cos(a), c.y + r * std::sin(a)});
    }
    return pts;
}

// winding-number oracle for the inside test
bool winding_inside(const std::vector<Vec2>& poly, const Vec2& p)
{
    double total = 0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        Vec2 a{poly[i].x - p.x, poly[i].y - p.y};
        Vec2 b{poly[(i + 1) % poly.size()].x - p.x, poly[(i + 1) % poly.size()].y - p.y};
        total += std::atan2(a.x * b.y - a.y * b.x, a.x * b.x + a.y * b.y);
    }
    return std::abs(total) > M_PI;
}

} // namespace

TEST_CASE("order_nodes recovers an angular ordering")
{
    auto pts = circle_points(40, 2.0, {0.5, -0.3});
    std::vector<Vec2> shuffled = pts;
    std::mt19937 rng(17);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    auto order = order_nodes(shuffled);
    REQUIRE(order.size() == shuffled.size());
    // consecutive angular gaps about the centroid must all be one step
    std::vector<double> ang;
    for (int i : order) {
        const Vec2& p = shuffled[static_cast<std::size_t>(i)];
        ang.push_back(std::atan2(p.y + 0.3, p.x - 0.5));
    }
    for (std::size_t i = 0; i < ang.size(); ++i) {
        double d = ang[(i + 1) % ang.size()] - ang[i];
        while (d < 0) d += 2 * M_PI;
        CHECK(d == doctest::Approx(2 * M_PI / 40).epsilon(1e-6));
    }
    CHECK_THROWS_WITH(order_nodes({{0, 0}, {1, 1}}), "degenerate boundary");
}

TEST_CASE("spline interpolates its data points")
{
    auto pts = circle_points(17, 1.3);
    for (int k = 1; k <= 4; ++k) {
        ParametricCurve c = fit_spline(pts, k);
        CHECK(c.degree() == k);
        for (int i = 0; i < c.node_count(); ++i) {
            Vec2 p = c.eval(c.node_param(i));
            CHECK(p.x == doctest::Approx(pts[static_cast<std::size_t>(i)].x).epsilon(1e-10));
            CHECK(p.y == doctest::Approx(pts[static_cast<std::size_t>(i)].y).epsilon(1e-10));
        }
    }
}

TEST_CASE("spline accuracy improves with degree on a circle")
{
    auto pts = circle_points(24);
    double err[5] = {};
    for (int k = 1; k <= 4; ++k) {
        ParametricCurve c = fit_spline(pts, k);
        double worst = 0;
        for (int s = 0; s < 500; ++s)
            worst = std::max(worst, std::abs(c.eval(c.period() * s / 500).norm() - 1.0));
        err[k] = worst;
    }
    CHECK(err[2] < err[1] / 5);
    CHECK(err[3] < err[2]);
    CHECK(err[1] < 0.01);
    CHECK(err[3] < 2e-5);
}

TEST_CASE("normals point outward and are accurate")
{
    auto pts = circle_points(32, 0.7, {1.0, 2.0});
    ParametricCurve c = fit_spline(pts, 2);
    for (int s = 0; s < 64; ++s) {
        double t = c.period() * s / 64;
        Vec2 p = c.eval(t);
        Vec2 n = c.normal_at(t);
        Vec2 radial{(p.x - 1.0) / 0.7, (p.y - 2.0) / 0.7};
        CHECK(n.x * radial.x + n.y * radial.y == doctest::Approx(1.0).epsilon(1e-3));
    }
}

TEST_CASE("closest_param against dense scan")
{
    auto pts = circle_points(20, 1.0);
    // slight ellipse so the answer is nontrivial
    for (auto& p : pts) p.y *= 0.6;
    ParametricCurve c = fit_spline(pts, 3);
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> d(-1.5, 1.5);
    for (int q = 0; q < 30; ++q) {
        Vec2 x{d(rng), d(rng)};
        double t = c.closest_param(x);
        double dist_found = dist(x, c.eval(t));
        double dist_scan = 1e30;
        for (int s = 0; s < 20000; ++s)
            dist_scan = std::min(dist_scan, dist(x, c.eval(c.period() * s / 20000)));
        CHECK(dist_found <= dist_scan + 1e-6);
    }
}

TEST_CASE("is_inside against the winding oracle")
{
    auto pts = circle_points(28, 1.1, {-0.2, 0.4});
    for (auto& p : pts) p.x = -0.2 + (p.x + 0.2) * 1.4; // ellipse
    ParametricCurve c = fit_spline(pts, 2);
    // dense polygon for the oracle
    std::vector<Vec2> poly;
    for (int s = 0; s < 2000; ++s)
        poly.push_back(c.eval(c.period() * s / 2000));
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> d(-2.2, 2.2);
    for (int q = 0; q < 200; ++q) {
        Vec2 x{d(rng), d(rng)};
        // skip points hugging the curve, where polygonization noise decides
        double t = c.closest_param(x);
        if (dist(x, c.eval(t)) < 1e-3) continue;
        CHECK(c.is_inside(x) == winding_inside(poly, x));
    }
}

TEST_CASE("curve length of a circle")
{
    ParametricCurve c = fit_spline(circle_points(64, 2.5), 3);
    CHECK(c.length() == doctest::Approx(2 * M_PI * 2.5).epsilon(1e-4));
}

TEST_CASE("shape metrics on a circle")
{
    ParametricCurve c = fit_spline(circle_points(40, 3.0, {1, 1}), 2);
    ShapeMetrics m = shape_metrics(c, {1, 1});
    CHECK(m.mean_radius == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(m.max_radius - m.min_radius < 1e-6);
    CHECK(std::abs(m.max_angle_distortion) < 1e-4);
    CHECK(std::abs(m.min_angle_distortion) < 1e-4);
}

TEST_CASE("grain refit and ledger")
{
    Grain g;
    g.nodes = circle_points(16, 0.5);
    g.refit(2);
    g.reset_ledger();
    CHECK(g.cumulative_displacement.size() == 16);
    CHECK(g.centroid().x == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(g.curve.node_count() == 16);
}

TEST_CASE("coincident nodes rejected")
{
    std::vector<Vec2> pts = circle_points(8);
    pts[3] = pts[2];
    CHECK_THROWS_WITH(fit_spline(pts, 2), "coincident nodes");
}
