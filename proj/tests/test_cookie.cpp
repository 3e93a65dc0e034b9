#include <gtest/gtest.h>

#include <cmath>

#include "icd/cookie.hpp"
#include "support.hpp"

using namespace icd;
using namespace icd::cookie;

namespace {

DomainSpec disc_domain(double r = 1.0) { return {{circle_component({0, 0}, r)}, 0}; }

DomainSpec annulus(double inner, double outer = 1.0)
{
    return {{circle_component({0, 0}, outer), circle_component({0, 0}, inner)}, 0};
}

// Brute-force count of lattice centers c with |c| + eps < r.
int lattice_count_in_disc(double r, double eps)
{
    const int n = static_cast<int>(std::ceil(r / eps)) + 2;
    int count = 0;
    for (int j = -n; j <= n; ++j)
        for (int i = -2 * n; i <= 2 * n; ++i) {
            const double x = eps * (2 * i + j), y = eps * std::sqrt(3.0) * j;
            if (std::hypot(x, y) + eps < r) ++count;
        }
    return count;
}

} // namespace

// ---------------------------------------------------------------------------
// Domains
// ---------------------------------------------------------------------------

TEST(Domain, ParsesCirclesAndPolygons)
{
    const auto j = nlohmann::json::parse(R"({"components":[
        {"type":"polygon","points":[[-2,-2],[2,-2],[2,2],[-2,2]]},
        {"type":"circle","center":[0.5,0],"radius":0.25}],"holes_are_complement":true})");
    const auto d = domain_from_json(j);
    ASSERT_EQ(d.components.size(), 2u);
    EXPECT_FALSE(d.components[0].is_circle());
    EXPECT_TRUE(d.components[1].is_circle());
    EXPECT_EQ(d.outer, 0);
    EXPECT_TRUE(disc_inside(d, {-1, 0}, 0.5));
    EXPECT_FALSE(disc_inside(d, {0.5, 0}, 0.01));
    EXPECT_FALSE(disc_inside(d, {1.8, 0}, 0.3));
}

TEST(Domain, RejectsSelfIntersectingPolygon)
{
    const auto j = nlohmann::json::parse(R"({"components":[
        {"type":"polygon","points":[[0,0],[1,1],[1,0],[0,1]]}]})");
    try {
        domain_from_json(j);
        FAIL() << "bow-tie polygon accepted";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::invalid_domain);
    }
}

TEST(Domain, RejectsMeetingComponents)
{
    DomainSpec d{{circle_component({0, 0}, 1.0), circle_component({0.9, 0}, 0.2)}, 0};
    EXPECT_THROW(validate(d), Error);
    DomainSpec outside{{circle_component({0, 0}, 1.0), circle_component({3, 0}, 0.2)}, 0};
    EXPECT_THROW(validate(outside), Error);
}

TEST(Domain, JsonRoundTrip)
{
    DomainSpec d{{polygon_component({{0, 0}, {3, 0}, {3, 2}, {0, 2}}), circle_component({1, 1}, 0.5)}, 0};
    const auto j = to_json(d);
    const auto back = domain_from_json(nlohmann::json::parse(j.dump()));
    EXPECT_EQ(to_json(back).dump(), j.dump());
}

// ---------------------------------------------------------------------------
// hex_cutout
// ---------------------------------------------------------------------------

TEST(Cutout, UnitDiscCoarseMeshKeepsSevenCircles)
{
    const auto r = hex_cutout(disc_domain(), 0.3);
    EXPECT_EQ(lattice_count_in_disc(1.0, 0.3), 7);
    EXPECT_EQ(r.complex.vertex_count(), 7);
    EXPECT_EQ(complex::boundary_cycles(r.complex).size(), 1u);
    EXPECT_EQ(r.cycle_map, (std::vector<int>{0}));
    for (const auto& c : r.embedding) EXPECT_LE(std::abs(c), 0.7);
    EXPECT_DOUBLE_EQ(r.mesh, 0.3);
}

TEST(Cutout, TinyHoleIsNotSeparated)
{
    try {
        hex_cutout(annulus(0.05), 0.3);
        FAIL() << "expected ComponentNotSeparated";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::component_not_separated);
        EXPECT_NE(std::string(e.what()).find("component 1"), std::string::npos);
    }
}

TEST(Cutout, NoCircleFits)
{
    try {
        hex_cutout(disc_domain(0.2), 0.3);
        FAIL() << "expected NoInterior";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::no_interior);
    }
}

TEST(Cutout, AnnulusHasTwoMatchedCycles)
{
    const auto r = hex_cutout(annulus(0.2), 0.05);
    EXPECT_EQ(r.complex.euler_characteristic(), 0);
    const auto cycles = complex::boundary_cycles(r.complex);
    ASSERT_EQ(cycles.size(), 2u);
    for (std::size_t k = 0; k < cycles.size(); ++k) {
        double mean = 0.0;
        for (int v : cycles[k].vertices) mean += std::abs(r.embedding[static_cast<std::size_t>(v)]);
        mean /= static_cast<double>(cycles[k].vertices.size());
        // the outer component is 0, the hole is 1
        EXPECT_EQ(r.cycle_map[k], mean > 0.6 ? 0 : 1);
    }
}

TEST(Cutout, EveryCircleInsideDomain)
{
    const double eps = 0.04;
    const auto r = hex_cutout(annulus(0.3), eps);
    for (const auto& c : r.embedding) {
        EXPECT_LT(std::abs(c) + eps, 1.0);
        EXPECT_GT(std::abs(c) - eps, 0.3);
    }
    EXPECT_NO_THROW(complex::validate(r.complex));
}

TEST(Cutout, PolygonDomainContainment)
{
    DomainSpec d{{polygon_component({{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}})}, 0};
    const double eps = 0.05;
    const auto r = hex_cutout(d, eps);
    auto in_l = [](cplx z) {
        const bool lower = z.real() > 0 && z.real() < 2 && z.imag() > 0 && z.imag() < 1;
        const bool left = z.real() > 0 && z.real() < 1 && z.imag() > 0 && z.imag() < 2;
        return lower || left;
    };
    for (const auto& c : r.embedding) {
        // sample the closed disc's rim against the L-shape
        for (int k = 0; k < 720; ++k) EXPECT_TRUE(in_l(c + std::polar(eps, k * geom::pi / 360))) << c;
    }
    EXPECT_EQ(complex::boundary_cycles(r.complex).size(), 1u);
}

TEST(Cutout, SurvivorCountScalesByFour)
{
    const auto d = annulus(0.3);
    int prev = hex_cutout(d, 0.08).complex.vertex_count();
    for (double eps : {0.04, 0.02}) {
        const int n = hex_cutout(d, eps).complex.vertex_count();
        const double ratio = static_cast<double>(n) / prev;
        EXPECT_GE(ratio, 3.0);
        EXPECT_LE(ratio, 5.0);
        prev = n;
    }
}

TEST(Cutout, SymmetricDomainGivesSymmetricCutout)
{
    const auto r = hex_cutout(annulus(0.3), 0.05);
    // the lattice is invariant under rotation by 60 degrees about the origin
    const cplx rot = std::polar(1.0, geom::pi / 3);
    for (const auto& c : r.embedding) {
        const cplx img = rot * c;
        double best = 1e9;
        for (const auto& d : r.embedding) best = std::min(best, std::abs(d - img));
        EXPECT_LT(best, 1e-9);
    }
}

TEST(Cutout, SimilarityCommutesWithCutoutCounts)
{
    const auto d = annulus(0.3);
    const auto big = transform(d, {2.0, 0.0}, {5.0, -1.0});
    // cutting the scaled domain at the scaled mesh keeps the same count up to
    // lattice offset effects
    const int a = hex_cutout(d, 0.05).complex.vertex_count();
    const int b = hex_cutout(big, 0.1).complex.vertex_count();
    EXPECT_NEAR(static_cast<double>(b) / a, 1.0, 0.1);
}

// ---------------------------------------------------------------------------
// prune
// ---------------------------------------------------------------------------

namespace {

std::vector<cplx> dummy_embedding(int n)
{
    std::vector<cplx> e;
    for (int k = 0; k < n; ++k) e.emplace_back(k, 0);
    return e;
}

} // namespace

TEST(Prune, DisjointTrianglesKeepLowerIds)
{
    RawComplex raw{6, {{3, 4, 5}, {0, 1, 2}}, {}};
    const auto p = prune(raw, dummy_embedding(6));
    EXPECT_EQ(p.complex.vertex_count(), 3);
    EXPECT_EQ(p.new_to_old, (std::vector<int>{0, 1, 2}));
}

TEST(Prune, PendantVertexDropped)
{
    RawComplex raw{4, {{0, 1, 2}}, {{2, 3}}};
    const auto p = prune(raw, dummy_embedding(4));
    EXPECT_EQ(p.complex.vertex_count(), 3);
    EXPECT_EQ(p.new_to_old, (std::vector<int>{0, 1, 2}));
    EXPECT_EQ(p.embedding[2], cplx(2, 0));
}

TEST(Prune, BowtieSplitKeepsLargerSide)
{
    // vertex 2 joins a triangle to a two-triangle strip
    RawComplex raw{7, {{0, 1, 2}, {2, 3, 4}, {2, 4, 5}}, {}};
    auto p = prune(raw, dummy_embedding(7));
    EXPECT_EQ(p.new_to_old, (std::vector<int>{2, 3, 4, 5}));
    EXPECT_EQ(p.complex.face_count(), 2);
    // equal sides: lowest id wins
    RawComplex even{5, {{2, 3, 4}, {0, 1, 2}}, {}};
    p = prune(even, dummy_embedding(5));
    EXPECT_EQ(p.new_to_old, (std::vector<int>{0, 1, 2}));
}

TEST(Prune, PinchInsideOneComponentResolved)
{
    // a ring of six triangles around 0 with the triangles at one vertex
    // arranged so vertex 1 has two fans joined elsewhere
    RawComplex raw{8, {{0, 1, 2}, {0, 2, 3}, {0, 3, 4}, {0, 4, 5}, {0, 5, 6}, {1, 6, 7}, {1, 7, 5}}, {}};
    // faces around 1: {0,1,2} and {1,6,7},{1,7,5} share no edge through 1
    const auto p = prune(raw, dummy_embedding(8));
    EXPECT_NO_THROW(complex::validate(p.complex));
    for (int v = 0; v < p.complex.vertex_count(); ++v) EXPECT_GE(p.complex.degree(v), 2);
}

TEST(Prune, EmptyInput)
{
    RawComplex raw{2, {}, {{0, 1}}};
    try {
        prune(raw, dummy_embedding(2));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::empty);
    }
}

// ---------------------------------------------------------------------------
// boundary_refine
// ---------------------------------------------------------------------------

TEST(Refine, ZeroLayersIsIdentity)
{
    const auto t = test::hex_disc(2);
    EXPECT_TRUE(boundary_refine(t, 0) == t);
}

TEST(Refine, HexFlowerBoundaryDoubles)
{
    const auto t = test::n_flower(6);
    const auto r = boundary_refine(t, 1);
    const auto cycles = complex::boundary_cycles(r);
    ASSERT_EQ(cycles.size(), 1u);
    EXPECT_EQ(cycles[0].vertices.size(), 12u);
    EXPECT_LE(r.max_degree(), 8);
    EXPECT_EQ(r.euler_characteristic(), t.euler_characteristic());
    // old boundary vertices become interior with degree 3 + 3
    for (int v = 1; v <= 6; ++v) {
        EXPECT_TRUE(r.is_interior(v));
        EXPECT_EQ(r.degree(v), 6);
    }
}

TEST(Refine, TwoLayersHaveDegreeSevenSeams)
{
    const auto r = boundary_refine(test::hex_disc(2), 2);
    EXPECT_EQ(complex::boundary_cycles(r)[0].vertices.size(), 48u);
    EXPECT_LE(r.max_degree(), 8);
    int sevens = 0;
    for (int v = 0; v < r.vertex_count(); ++v)
        if (r.is_interior(v) && r.degree(v) == 7) ++sevens;
    EXPECT_GT(sevens, 0);
}

TEST(Refine, CutoutKeepsCycleMapAndEuler)
{
    const auto c = hex_cutout(annulus(0.3), 0.05);
    const auto r = refine_cutout(c, 1);
    EXPECT_EQ(r.complex.euler_characteristic(), 0);
    EXPECT_EQ(r.embedding.size(), static_cast<std::size_t>(r.complex.vertex_count()));
    auto sorted = r.cycle_map;
    std::sort(sorted.begin(), sorted.end());
    EXPECT_EQ(sorted, (std::vector<int>{0, 1}));
    const auto old_cycles = complex::boundary_cycles(c.complex);
    const auto new_cycles = complex::boundary_cycles(r.complex);
    std::size_t old_total = 0, new_total = 0;
    for (const auto& x : old_cycles) old_total += x.vertices.size();
    for (const auto& x : new_cycles) new_total += x.vertices.size();
    EXPECT_EQ(new_total, 2 * old_total);
    EXPECT_LE(r.complex.max_degree(), 8);
}
