#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "mesogrow/envelope.hpp"
#include "mesogrow/spatial.hpp"

using namespace mesogrow;
using namespace mesogrow::spatial;

namespace {

std::vector<Vec2> random_points(int n, unsigned seed)
{
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    std::vector<Vec2> pts(static_cast<std::size_t>(n));
    for (auto& p : pts) p = {d(rng), d(rng)};
    return pts;
}

std::vector<int> brute_knn(const std::vector<Vec2>& pts, const Vec2& x, int k)
{
    std::vector<int> idx(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) idx[i] = static_cast<int>(i);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        double da = dist2(x, pts[static_cast<std::size_t>(a)]);
        double db = dist2(x, pts[static_cast<std::size_t>(b)]);
        if (da != db) return da < db;
        return a < b;
    });
    idx.resize(static_cast<std::size_t>(k));
    return idx;
}

} // namespace

TEST_CASE("kdtree matches brute force")
{
    auto pts = random_points(500, 42);
    KDTree tree(pts);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> d(-1.2, 1.2);
    for (int q = 0; q < 200; ++q) {
        Vec2 x{d(rng), d(rng)};
        for (int k : {1, 5, 12, 30})
            CHECK(tree.knn(x, k) == brute_knn(pts, x, k));
    }
    CHECK_THROWS_WITH(tree.knn({0, 0}, 501), "insufficient nodes");
}

TEST_CASE("kdtree radius query")
{
    auto pts = random_points(300, 3);
    KDTree tree(pts);
    Vec2 x{0.1, -0.2};
    double r = 0.3;
    auto got = tree.radius(x, r);
    std::sort(got.begin(), got.end());
    std::vector<int> want;
    for (std::size_t i = 0; i < pts.size(); ++i)
        if (dist(x, pts[i]) <= r) want.push_back(static_cast<int>(i));
    CHECK(got == want);
}

TEST_CASE("outer boundary square")
{
    OuterBoundary sq(OuterBoundary::Shape::square, 20.0);
    CHECK(sq.inside({0, 0}));
    CHECK(!sq.inside({10.0, 0}));
    CHECK(sq.inside({9.99, -9.99}));
    Vec2 n = sq.outward_normal({10.0, 3.0});
    CHECK(n.x == doctest::Approx(1.0));
    CHECK(n.y == doctest::Approx(0.0));
    Vec2 cp = sq.closest_point({8.0, 3.0});
    CHECK(cp.x == doctest::Approx(10.0));
    CHECK(cp.y == doctest::Approx(3.0));

    auto pts = sq.discretize(0.1);
    CHECK(pts.size() == 800); // 200 per side
    for (const Vec2& p : pts)
        CHECK(std::max(std::abs(p.x), std::abs(p.y)) == doctest::Approx(10.0));
}

TEST_CASE("outer boundary circle")
{
    OuterBoundary c(OuterBoundary::Shape::circle, 20.0);
    CHECK(c.inside({9.9, 0}));
    CHECK(!c.inside({7.2, 7.2}));
    Vec2 n = c.outward_normal({0, -10});
    CHECK(n.y == doctest::Approx(-1.0));
    auto pts = c.discretize(0.1);
    CHECK(pts.size() == static_cast<std::size_t>(std::lround(2 * M_PI * 10 / 0.1)));
    for (const Vec2& p : pts)
        CHECK(p.norm() == doctest::Approx(10.0));
}

TEST_CASE("spacing field blends linearly and clamps")
{
    // envelope node at origin, outer node at (10, 0)
    std::vector<Vec2> env{{0, 0}};
    std::vector<Vec2> outer{{10, 0}};
    SpacingParams p{0.05, 0.1};
    SpacingField h(env, outer, p);
    CHECK(h({0, 0}) == doctest::Approx(0.05));
    CHECK(h({10, 0}) == doctest::Approx(0.1));
    // halfway: d = 5, d_closest = 10 -> h_e + (h_l - h_e) / 2
    CHECK(h({5, 0}) == doctest::Approx(0.075));
    // beyond the outer node the blend is clamped at h_l
    CHECK(h({14, 0}) == doctest::Approx(0.1));
}

TEST_CASE("fill_domain covers the unit square at the expected density")
{
    NodeSet seeds;
    seeds.add({0.5, 0.5}, NodeRole::interior, 0.1);
    auto inside = [](const Vec2& x) {
        return x.x > 0 && x.x < 1 && x.y > 0 && x.y < 1;
    };
    NodeSet filled = fill_domain(seeds, [](const Vec2&) { return 0.1; }, inside);
    // roughly 1/h^2 nodes for a proximity radius ~ h
    CHECK(filled.size() > 80);
    CHECK(filled.size() < 140);
    CHECK(min_separation_factor(filled) >= 0.5);
    // no holes: every cell of a coarse probe grid has a node within 1.2 h
    KDTree tree(filled.positions);
    for (int j = 1; j < 10; ++j)
        for (int i = 1; i < 10; ++i) {
            Vec2 x{i / 10.0, j / 10.0};
            CHECK(dist(x, tree.point(tree.nearest(x))) < 1.2 * 0.1);
        }
}

TEST_CASE("fill_domain is deterministic")
{
    NodeSet seeds;
    seeds.add({0.0, 0.0}, NodeRole::interior, 0.07);
    auto inside = [](const Vec2& x) { return x.norm() < 1.0; };
    auto h = [](const Vec2&) { return 0.07; };
    NodeSet a = fill_domain(seeds, h, inside);
    NodeSet b = fill_domain(seeds, h, inside);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.positions[i].x == b.positions[i].x);
        CHECK(a.positions[i].y == b.positions[i].y);
    }
}

TEST_CASE("fill_domain rejects invalid spacing")
{
    NodeSet seeds;
    seeds.add({0, 0}, NodeRole::interior, 0.1);
    CHECK_THROWS_WITH(fill_domain(seeds, [](const Vec2&) { return 0.0; },
                                  [](const Vec2&) { return true; }),
                      "invalid spacing");
}

TEST_CASE("nodeset csv round trip")
{
    NodeSet s;
    s.add({0.125, -3.5}, NodeRole::outer, 0.1);
    s.add({1.0 / 3.0, 2.0 / 7.0}, NodeRole::envelope, 0.05, 2);
    s.add({-0.25, 0.75}, NodeRole::interior, 0.08);
    std::string path = "test_nodes_roundtrip.csv";
    s.write_csv(path);
    NodeSet r = NodeSet::read_csv(path);
    REQUIRE(r.size() == s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(r.positions[i].x == s.positions[i].x); // full precision
        CHECK(r.positions[i].y == s.positions[i].y);
        CHECK(r.roles[i] == s.roles[i]);
        CHECK(r.grain_id[i] == s.grain_id[i]);
        CHECK(r.spacing[i] == s.spacing[i]);
    }
    std::remove(path.c_str());
}

TEST_CASE("discretize_curve spaces nodes by the target h")
{
    // unit circle, target spacing 0.1 -> ~63 nodes with near-equal gaps
    std::vector<Vec2> pts;
    for (int i = 0; i < 64; ++i)
        pts.push_back({std::cos(2 * M_PI * i / 64), std::sin(2 * M_PI * i / 64)});
    auto curve = envelope::fit_spline(pts, 3);
    auto nodes = discretize_curve(curve, [](const Vec2&) { return 0.1; });
    CHECK(std::abs(static_cast<double>(nodes.size()) - 2 * M_PI / 0.1) <= 1.0);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        CHECK(nodes[i].norm() == doctest::Approx(1.0).epsilon(1e-3));
        double gap = dist(nodes[i], nodes[(i + 1) % nodes.size()]);
        CHECK(gap == doctest::Approx(0.1).epsilon(0.05));
    }
}
