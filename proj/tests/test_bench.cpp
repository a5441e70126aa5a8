#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "mesogrow/analyze.hpp"
#include "mesogrow/bench.hpp"

using namespace mesogrow;
using namespace mesogrow::bench;

TEST_CASE("sibson function values")
{
    CHECK(sibson({0.25, 0.25}) == doctest::Approx(1.0));
    CHECK(sibson({0.5, 0.25}) == doctest::Approx(-1.0)); // 4 pi * 0.25 = pi
    CHECK(sibson({0.75, 0.25}) == doctest::Approx(1.0));
}

TEST_CASE("tip shape radius and normal")
{
    CHECK(tip_shape_radius(0.0) == doctest::Approx(1.0));
    // the radius is 2 pi / 3 periodic
    for (double t : {0.17, 0.9, 2.0, 4.4})
        CHECK(tip_shape_radius(t + 2 * M_PI / 3) == doctest::Approx(tip_shape_radius(t)));
    // normals are unit and orthogonal to a finite-difference tangent
    for (double t : {0.1, 0.7, 1.3, 2.9, 5.0}) {
        Vec2 n = tip_shape_normal(t);
        CHECK(n.norm() == doctest::Approx(1.0));
        const double e = 1e-6;
        Vec2 a = tip_shape_point(t - e), b = tip_shape_point(t + e);
        Vec2 tan{(b.x - a.x) / (2 * e), (b.y - a.y) / (2 * e)};
        CHECK(std::abs(n.x * tan.x + n.y * tan.y) / tan.norm() < 1e-5);
        // outward: pointing away from the origin on average
        Vec2 p = tip_shape_point(t);
        CHECK(n.x * p.x + n.y * p.y > 0);
    }
}

TEST_CASE("reconstruction error drops with spline degree")
{
    auto rows = bench_reconstruction({0.1}, {1, 2}, 0.02);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].k == 1);
    CHECK(rows[1].k == 2);
    CHECK(rows[1].max_radius_err < rows[0].max_radius_err / 2);
    CHECK(rows[0].n_fit > 100); // full test curve is ~12 units long
}

TEST_CASE("interpolation study orders the methods")
{
    auto rows = bench_interpolation({400}, {12}, {2});
    double shepard = 0, rbf = 0;
    for (const auto& r : rows) {
        if (r.method == "shepard") shepard = r.rel_l2;
        if (r.method == "rbffd") rbf = r.rel_l2;
    }
    CHECK(shepard > 0);
    CHECK(rbf > 0);
    CHECK(rbf < shepard);
}

TEST_CASE("anisotropy report on synthetic envelopes")
{
    // perfectly four-fold: quadrants agree
    std::vector<Vec2> sym;
    for (int i = 0; i < 720; ++i) {
        double th = 2 * M_PI * i / 720;
        double r = 5.0 + 0.5 * std::cos(4 * th);
        sym.push_back({r * std::cos(th), r * std::sin(th)});
    }
    auto rep = analyze::analyze_anisotropy(sym, 0.1);
    CHECK(rep.e_max < 1e-3);
    CHECK(rep.max_rel < 1e-3);

    // a bump confined to quadrant II shows up as quadrant disagreement
    std::vector<Vec2> bent = sym;
    for (auto& p : bent) {
        double th = std::atan2(p.y, p.x);
        if (th > M_PI / 2 + 0.3 && th < M_PI - 0.3) {
            double r = p.norm() + 0.1;
            p = {r * std::cos(th), r * std::sin(th)};
        }
    }
    auto rep2 = analyze::analyze_anisotropy(bent, 0.1);
    CHECK(rep2.e_max == doctest::Approx(0.1).epsilon(0.1));
    CHECK(rep2.e_max_over_he == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("center depression detector")
{
    // convex four-fold envelope: no depression
    std::vector<Vec2> convex;
    for (int i = 0; i < 720; ++i) {
        double th = 2 * M_PI * i / 720;
        double r = 5.0 + 0.15 * std::cos(4 * th);
        convex.push_back({r * std::cos(th), r * std::sin(th)});
    }
    CHECK(!analyze::has_center_depression(convex));

    // a dip carved around the first-quadrant diagonal
    std::vector<Vec2> dipped = convex;
    for (auto& p : dipped) {
        double th = std::atan2(p.y, p.x);
        double d = th - M_PI / 4;
        double r = p.norm() - 1.2 * std::exp(-d * d / (2 * 0.12 * 0.12));
        p = {r * std::cos(th), r * std::sin(th)};
    }
    CHECK(analyze::has_center_depression(dipped));
}

TEST_CASE("run summary reader picks the row closest in time")
{
    std::string dir = "test_run_summary";
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir + "/metrics.csv");
        out << "step,t,tip_x,tip_velocity,envelope_length,n_total,n_envelope,max_speed\n";
        out << "1,0.1,1.0,0.5,6.0,100,10,0.5\n";
        out << "2,0.2,2.0,0.5,7.0,99,10,0.5\n";
        out << "3,0.3,3.0,0.5,8.0,98,10,0.5\n";
    }
    auto row = analyze::read_run_summary(dir, 0.21);
    CHECK(row.tip_x == 2.0);
    CHECK(row.envelope_length == 7.0);
    CHECK(row.node_count == 99);
    auto last = analyze::read_run_summary(dir, 99.0);
    CHECK(last.tip_x == 3.0);
    std::filesystem::remove_all(dir);
}
