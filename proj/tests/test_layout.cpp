#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "icd/label.hpp"
#include "icd/layout.hpp"
#include "icd/sphere.hpp"
#include "support.hpp"

using namespace icd;
using namespace icd::layout;
using geom::cplx;
using geom::pi;
using geom::Vec3;

TEST(Layout, UnitHexFlower)
{
    const auto t = test::n_flower(6);
    const label::PackingLabel l{label::Geometry::euclidean, std::vector<double>(7, 1.0)};
    const auto p = layout::layout(t, l, {0, 1});
    EXPECT_EQ(p.model, geom::Model::plane);
    EXPECT_LT(p.centers[0].norm(), 1e-15);
    for (int k = 1; k <= 6; ++k) {
        const cplx want = 2.0 * std::polar(1.0, (k - 1) * pi / 3);
        EXPECT_LT(std::abs(to_cplx(p.centers[static_cast<std::size_t>(k)]) - want), 1e-14) << k;
    }
    EXPECT_LT(tangency_residual(p), 1e-14);
}

TEST(Layout, MaxHyperbolicHexFlower)
{
    const auto t = test::n_flower(6);
    const auto s = label::solve_max_hyperbolic(t);
    const auto p = layout::layout(t, s.label, {0, 1});
    EXPECT_EQ(p.model, geom::Model::disc);
    EXPECT_LT(p.centers[0].norm(), 1e-12);
    EXPECT_NEAR(p.radii[0], 1.0 / 3.0, 1e-10);
    for (int k = 1; k <= 6; ++k) {
        EXPECT_NEAR(p.radii[static_cast<std::size_t>(k)], 1.0 / 3.0, 1e-10);
        const cplx want = (2.0 / 3.0) * std::polar(1.0, (k - 1) * pi / 3);
        EXPECT_LT(std::abs(to_cplx(p.centers[static_cast<std::size_t>(k)]) - want), 1e-10) << k;
    }
    EXPECT_LT(tangency_residual(p), 1e-9);
}

TEST(Layout, HorocyclesInternallyTangentToUnitCircle)
{
    const auto t = test::hex_disc(4);
    const auto s = label::solve_max_hyperbolic(t);
    const auto p = layout::layout(t, s.label);
    for (int v = 0; v < t.vertex_count(); ++v) {
        if (t.is_interior(v)) continue;
        EXPECT_NEAR(p.centers[static_cast<std::size_t>(v)].norm() + p.radii[static_cast<std::size_t>(v)], 1.0, 1e-9);
    }
    EXPECT_LT(tangency_residual(p), 1e-8);
}

TEST(Layout, TwoAnchorsAgreeUpToRigidMotion)
{
    // lay out from two anchors; the second is rotated back to the first frame
    const auto t = test::hex_disc(2);
    const auto s = label::solve_euclidean(t, 1.0);
    const auto a = layout::layout(t, s.label, {0, t.flower(0)[0]});
    const auto b = layout::layout(t, s.label, {0, t.flower(0)[3]});
    const cplx rot = to_cplx(a.centers[static_cast<std::size_t>(t.flower(0)[3])]) / to_cplx(b.centers[static_cast<std::size_t>(t.flower(0)[3])]);
    for (int v = 0; v < t.vertex_count(); ++v)
        EXPECT_LT(std::abs(rot * to_cplx(b.centers[static_cast<std::size_t>(v)]) - to_cplx(a.centers[static_cast<std::size_t>(v)])), 1e-8);

    const auto h = label::solve_max_hyperbolic(t);
    const auto c = layout::layout(t, h.label, {0, t.flower(0)[0]});
    const auto d = layout::layout(t, h.label, {0, t.flower(0)[2]});
    const cplx rot2 = to_cplx(c.centers[static_cast<std::size_t>(t.flower(0)[2])]) / to_cplx(d.centers[static_cast<std::size_t>(t.flower(0)[2])]);
    for (int v = 0; v < t.vertex_count(); ++v)
        EXPECT_LT(std::abs(rot2 * to_cplx(d.centers[static_cast<std::size_t>(v)]) - to_cplx(c.centers[static_cast<std::size_t>(v)])), 1e-8);
}

TEST(Layout, RandomComplexTangency)
{
    std::mt19937 rng(31);
    for (int trial = 0; trial < 8; ++trial) {
        const auto t = test::random_disc(rng, 60);
        if (t.interior_count() == 0) continue;
        const auto e = label::solve_euclidean(t, 1.0);
        EXPECT_LT(tangency_residual(layout::layout(t, e.label)), 1e-6);
        const auto h = label::solve_max_hyperbolic(t);
        EXPECT_LT(tangency_residual(layout::layout(t, h.label)), 1e-6);
    }
}

TEST(Layout, HyperbolicCircleFromCenterMatchesDiameterEndpoints)
{
    for (double rho : {0.0, 0.02, 0.5, 0.97}) {
        for (double h : {1e-5, 3e-4, 0.1, 2.0, 12.0}) {
            const cplx z = rho * std::polar(1.0, 0.7);
            const auto c = detail::circle_at(z, h);
            // endpoints on the diameter through z: images of -t and t under the translation to z
            const double t = std::tanh(h / 2);
            const double lo = (rho - t) / (1 - rho * t), hi = (rho + t) / (1 + rho * t);
            EXPECT_NEAR(std::abs(c.center), (lo + hi) / 2, 1e-15 + 1e-12 * std::abs(lo + hi)) << rho << " " << h;
            EXPECT_NEAR(c.radius, (hi - lo) / 2, 1e-15 + 1e-10 * (hi - lo)) << rho << " " << h;
        }
    }
}

TEST(Layout, LargeMaxPackingStaysTangent)
{
    const auto t = test::hex_disc(40);
    const auto s = label::solve_max_hyperbolic(t);
    ASSERT_TRUE(s.report.converged);
    EXPECT_LT(tangency_residual(layout::layout(t, s.label)), 1e-8);
}

TEST(Layout, UnconvergedLabelRejected)
{
    const auto t = test::n_flower(6);
    label::PackingLabel l{label::Geometry::euclidean, std::vector<double>(7, 1.0)};
    l.radii[0] = 1.5;
    try {
        layout::layout(t, l);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::unconverged_label);
    }
    LayoutOptions loose;
    loose.allow_unconverged = true;
    EXPECT_NO_THROW(layout::layout(t, l, {-1, -1}, loose));
}

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

namespace {

Packing octahedron_packing() { return label::solve_sphere(test::octahedron(), 0).packing; }

} // namespace

TEST(Layout, NormalizeToCurrentCentersIsIdentity)
{
    const auto p = octahedron_packing();
    const auto q = normalize_three_points(p, 1, 2, 3, {p.centers[1], p.centers[2], p.centers[3]});
    for (int v = 0; v < p.size(); ++v) {
        EXPECT_LT((q.centers[static_cast<std::size_t>(v)] - p.centers[static_cast<std::size_t>(v)]).norm(), 1e-12);
        EXPECT_NEAR(q.radii[static_cast<std::size_t>(v)], p.radii[static_cast<std::size_t>(v)], 1e-12);
    }
}

TEST(Layout, NormalizationGroupProperty)
{
    const auto p = octahedron_packing();
    const std::array<Vec3, 3> t1{Vec3(0, 0, -1), Vec3(1, 0, 0), Vec3(0, 1, 0)};
    const std::array<Vec3, 3> t2{Vec3(0.6, 0, 0.8), Vec3(0, -1, 0), Vec3(-0.8, 0, 0.6)};
    const auto twice = normalize_three_points(normalize_three_points(p, 1, 2, 4, t1), 1, 2, 4, t2);
    const auto once = normalize_three_points(p, 1, 2, 4, t2);
    for (int v = 0; v < p.size(); ++v) {
        EXPECT_LT((twice.centers[static_cast<std::size_t>(v)] - once.centers[static_cast<std::size_t>(v)]).norm(), 1e-10);
        EXPECT_NEAR(twice.radii[static_cast<std::size_t>(v)], once.radii[static_cast<std::size_t>(v)], 1e-10);
    }
    const std::array<int, 3> marked{1, 2, 4};
    for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_LT((once.point(marked[k]) - t2[k]).norm(), 1e-10);
        EXPECT_LT((twice.point(marked[k]) - t2[k]).norm(), 1e-10);
    }
}

TEST(Layout, NormalizationPreservesCrossRatiosAndTangency)
{
    const auto t = test::n_flower(6);
    const auto s = complex::add_ideal_vertex(t, complex::boundary_cycles(t)[0]);
    const auto p = label::solve_sphere(s, 0).packing;
    const auto q = normalize_three_points(p, 1, 3, 5, {Vec3(0, 0, -1), Vec3(1, 0, 0), Vec3(0, 1, 0)});
    // tracked points move as points, so their cross-ratios are invariant
    const cplx before = geom::cross_ratio(p.point(0), p.point(2), p.point(4), p.point(6));
    const cplx after = geom::cross_ratio(q.point(0), q.point(2), q.point(4), q.point(6));
    EXPECT_LT(std::abs(before - after), 1e-8 * std::max(1.0, std::abs(before)));
    EXPECT_LT(tangency_residual(q), tangency_residual(p) + 1e-9);
}

TEST(Layout, DegenerateTripleRejected)
{
    const auto p = octahedron_packing();
    try {
        normalize_three_points(p, 1, 1, 2, {Vec3(0, 0, -1), Vec3(1, 0, 0), Vec3(0, 1, 0)});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::degenerate_triple);
    }
}

// ---------------------------------------------------------------------------
// Carrier maps and dilatation
// ---------------------------------------------------------------------------

namespace {

// Singular-value oracle: eigenvalues of the Gram matrix A^T A.
double gram_dilatation(const Eigen::Matrix2d& a)
{
    const Eigen::Matrix2d g = a.transpose() * a;
    const double tr = g.trace(), det = g.determinant();
    const double disc = std::sqrt(std::max(0.0, tr * tr / 4 - det));
    return std::sqrt((tr / 2 + disc) / (tr / 2 - disc));
}

Packing hex_unit()
{
    const auto t = test::n_flower(6);
    return layout::layout(t, {label::Geometry::euclidean, std::vector<double>(7, 1.0)}, {0, 1});
}

} // namespace

TEST(Carrier, IdentityHasUnitDilatation)
{
    const auto p = hex_unit();
    for (const auto& f : carrier_map(p, p).faces) EXPECT_NEAR(dilatation(f), 1.0, 1e-12);
}

TEST(Carrier, ScaledFlowerIsConformal)
{
    const auto p = hex_unit();
    const auto t = test::n_flower(6);
    const auto q = layout::layout(t, {label::Geometry::euclidean, std::vector<double>(7, 2.0)}, {0, 1});
    for (const auto& f : carrier_map(p, q).faces) EXPECT_NEAR(dilatation(f), 1.0, 1e-12);
}

TEST(Carrier, PerturbedHubMatchesSingularValueOracle)
{
    const auto p = hex_unit();
    const auto t = test::n_flower(6);
    label::PackingLabel l{label::Geometry::euclidean, std::vector<double>(7, 1.0)};
    l.radii[0] = 1.1;
    LayoutOptions loose;
    loose.allow_unconverged = true;
    const auto q = layout::layout(t, l, {0, 1}, loose);
    double worst = 0;
    for (const auto& f : carrier_map(p, q).faces) {
        const double k = dilatation(f);
        // independent oracle: build the affine map directly from plane coordinates
        Eigen::Matrix2d s, d;
        const auto col = [](const Vec3& a, const Vec3& b) { return Eigen::Vector2d(b.x() - a.x(), b.y() - a.y()); };
        s << col(f.src[0], f.src[1]), col(f.src[0], f.src[2]);
        d << col(f.dst[0], f.dst[1]), col(f.dst[0], f.dst[2]);
        EXPECT_NEAR(k, gram_dilatation(d * s.inverse()), 1e-10);
        worst = std::max(worst, k);
    }
    EXPECT_GT(worst, 1.0 + 1e-3);
}

TEST(Carrier, ShearOracle)
{
    FaceMap m;
    m.linear << 1, 0, 1, 1;  // (x, y) -> (x, x + y)
    // Gram matrix [[2,1],[1,1]] has eigenvalues (3 +- sqrt 5)/2
    const double oracle = std::sqrt((3 + std::sqrt(5.0)) / (3 - std::sqrt(5.0)));
    EXPECT_NEAR(dilatation(m), oracle, 1e-12);
    EXPECT_NEAR(oracle, (1 + std::sqrt(5.0)) / 2 * (1 + std::sqrt(5.0)) / 2, 1e-12);
    m.linear << 3, -4, 4, 3;
    EXPECT_NEAR(dilatation(m), 1.0, 1e-12);
}

TEST(Carrier, MismatchedComplexesRejected)
{
    const auto p = hex_unit();
    const auto t = test::n_flower(5);
    const auto q = layout::layout(t, label::solve_euclidean(t, 1.0).label);
    try {
        carrier_map(p, q);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::mismatched_complexes);
    }
}

TEST(Carrier, PlaneToSphereMapsPoints)
{
    const auto t = test::n_flower(6);
    const auto s = complex::add_ideal_vertex(t, complex::boundary_cycles(t)[0]);
    const auto sp = label::solve_sphere(s, 7).packing;
    // restrict to the flower and map the plane hub center to the sphere
    Packing src = hex_unit();
    Packing dst;
    dst.complex = t;
    dst.model = geom::Model::sphere;
    dst.centers.assign(sp.centers.begin(), sp.centers.begin() + 7);
    dst.radii.assign(sp.radii.begin(), sp.radii.begin() + 7);
    const auto cm = carrier_map(src, dst);
    const auto img = map_point(cm, 0.0);
    ASSERT_TRUE(img.has_value());
    EXPECT_NEAR(img->norm(), 1.0, 1e-12);
    EXPECT_LT((*img - dst.centers[0]).norm(), 1e-12);
    EXPECT_FALSE(map_point(cm, cplx(50, 0)).has_value());
}

TEST(Layout, PackingJsonRoundTrip)
{
    const auto p = octahedron_packing();
    const auto j = to_json(p);
    const auto back = packing_from_json(j);
    EXPECT_EQ(back.complex, p.complex);
    for (int v = 0; v < p.size(); ++v) {
        EXPECT_EQ(back.centers[static_cast<std::size_t>(v)], p.centers[static_cast<std::size_t>(v)]);
        EXPECT_EQ(back.radii[static_cast<std::size_t>(v)], p.radii[static_cast<std::size_t>(v)]);
    }
    EXPECT_EQ(to_json(back).dump(), j.dump());
}
