#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <set>

#include "icd/pipeline.hpp"

using icd::Errc;
using icd::Error;
using icd::geom::cplx;
using icd::geom::Vec3;
namespace complex = icd::complex;
namespace cookie = icd::cookie;
namespace geom = icd::geom;
namespace layout = icd::layout;
namespace pipeline = icd::pipeline;
namespace weld = icd::weld;

namespace {

cookie::DomainSpec load_sample(const std::string& name)
{
    std::ifstream in(std::string(ICD_SAMPLES_DIR) + "/" + name);
    return cookie::domain_from_json(nlohmann::json::parse(in));
}

cookie::DomainSpec disc() { return {{cookie::circle_component(0.0, 1.0)}, 0}; }

cookie::DomainSpec annulus(double inner) { return {{cookie::circle_component(0.0, 1.0), cookie::circle_component(0.0, inner)}, 0}; }

pipeline::PipelineConfig coarse(double eps)
{
    pipeline::PipelineConfig cfg;
    cfg.epsilon = eps;
    return cfg;
}

// Rotation of the cut-out by 60 degrees as a vertex permutation.
std::vector<int> rotation_map(const std::vector<cplx>& emb)
{
    std::vector<int> out;
    for (auto z : emb) {
        const cplx w = z * std::polar(1.0, geom::pi / 3);
        const int v = pipeline::detail::nearest_vertex(emb, w);
        EXPECT_LT(std::abs(emb[static_cast<std::size_t>(v)] - w), 1e-9);
        out.push_back(v);
    }
    return out;
}

} // namespace

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

TEST(Pipeline, DiscGivesSpherePartitionedByRole)
{
    const auto r = pipeline::run(disc(), coarse(0.125));
    const auto& t = r.sphere_packing.complex;
    EXPECT_TRUE(complex::is_sphere(t));
    ASSERT_EQ(r.component_discs.size(), 1u);
    EXPECT_EQ(r.component_discs[0].component, 0);
    EXPECT_LT(r.component_discs[0].ideal_decay, 0.0);

    std::vector<int> role(static_cast<std::size_t>(t.vertex_count()), 0);
    for (int v : r.omega_vertices) ++role[static_cast<std::size_t>(v)];
    for (const auto& c : r.component_discs)
        for (int v : c.cap_vertices) ++role[static_cast<std::size_t>(v)];
    for (int k : role) EXPECT_EQ(k, 1);
    for (int v : r.omega_vertices) EXPECT_FALSE(t.has_mark(v, complex::mark_cap));
    for (int v : r.component_discs[0].cap_vertices) EXPECT_TRUE(t.has_mark(v, complex::mark_cap));

    for (const auto& [name, rep] : r.reports) {
        EXPECT_TRUE(rep.converged) << name;
        EXPECT_LE(rep.final_residual, 1e-10) << name;
    }
    EXPECT_LE(r.diagnostics.tangency_residual, 1e-6);
    EXPECT_LE(r.diagnostics.max_degree, 9);
}

TEST(Pipeline, PunctureIsDeepestOmegaVertex)
{
    const auto r = pipeline::run(disc(), coarse(0.125));
    const auto depth = complex::boundary_depth(r.cutout.complex);
    const int best = *std::max_element(depth.begin(), depth.end());
    EXPECT_EQ(depth[static_cast<std::size_t>(r.puncture)], best);
    for (int v = 0; v < r.puncture; ++v) EXPECT_LT(depth[static_cast<std::size_t>(v)], best);
}

TEST(Pipeline, MarkedVerticesReachTargets)
{
    auto cfg = coarse(0.125);
    cfg.marked = std::array<cplx, 3>{cplx(0.0, 0.0), cplx(0.5, 0.0), cplx(0.0, 0.5)};
    const auto r = pipeline::run(disc(), cfg);
    for (std::size_t k = 0; k < 3; ++k) {
        const int v = r.marked_vertices[k];
        EXPECT_EQ(v, pipeline::detail::nearest_vertex(r.cutout.embedding, (*cfg.marked)[k]));
        EXPECT_LT((r.sphere_packing.point(v) - cfg.targets[k]).norm(), 1e-9);
    }
}

TEST(Pipeline, AnnulusHasTwoComponentDiscs)
{
    const auto r = pipeline::run(annulus(0.3), coarse(0.0625));
    ASSERT_EQ(r.component_discs.size(), 2u);
    std::set<int> comps;
    for (const auto& c : r.component_discs) {
        comps.insert(c.component);
        EXPECT_GT(c.ideal_decay, 0.0);
        EXPECT_LT(c.ideal_decay, 1.0);
        EXPECT_EQ(c.param.orientation, -1);
    }
    EXPECT_EQ(comps, (std::set<int>{0, 1}));
    ASSERT_TRUE(r.diagnostics.modulus.has_value());
}

TEST(Pipeline, AnnulusModulusErrorShrinksWithMesh)
{
    const double exact = std::log(1.0 / 0.3) / geom::two_pi;
    const auto a = pipeline::run(annulus(0.3), coarse(0.0625));
    const auto b = pipeline::run(annulus(0.3), coarse(0.03125));
    const double ea = std::abs(*a.diagnostics.modulus - exact), eb = std::abs(*b.diagnostics.modulus - exact);
    EXPECT_LT(eb, ea);
    EXPECT_LT(eb / exact, 0.15);
}

TEST(Pipeline, RepeatedRunsAreBitIdentical)
{
    const auto d = load_sample("three_holes.json");
    auto one = coarse(0.0625);
    one.threads = 1;
    auto many = one;
    many.threads = 4;
    const auto a = pipeline::run(d, one), b = pipeline::run(d, many), c = pipeline::run(d, many);
    ASSERT_EQ(a.sphere_packing.size(), b.sphere_packing.size());
    for (int v = 0; v < a.sphere_packing.size(); ++v) {
        const auto i = static_cast<std::size_t>(v);
        EXPECT_EQ(a.sphere_packing.centers[i], b.sphere_packing.centers[i]);
        EXPECT_EQ(a.sphere_packing.radii[i], b.sphere_packing.radii[i]);
        EXPECT_EQ(b.sphere_packing.centers[i], c.sphere_packing.centers[i]);
    }
}

TEST(Pipeline, SixfoldDomainGivesSixfoldPacking)
{
    const auto r = pipeline::run(load_sample("six_holes.json"), coarse(0.03125));
    EXPECT_EQ(r.component_discs.size(), 7u);
    const auto rot = rotation_map(r.cutout.embedding);
    // after centering, the symmetry is a rotation of the sphere: fit it by SVD
    const auto p = layout::center_sphere_packing(r.sphere_packing);
    Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
    for (std::size_t v = 0; v < rot.size(); ++v) h += p.centers[v] * p.centers[static_cast<std::size_t>(rot[v])].transpose();
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d q = svd.matrixV() * svd.matrixU().transpose();
    EXPECT_NEAR(q.determinant(), 1.0, 1e-9);
    EXPECT_NEAR(q.trace(), 2.0, 1e-6);  // rotation by 60 degrees: 1 + 2 cos(pi/3)
    for (std::size_t v = 0; v < rot.size(); ++v) {
        const auto w = static_cast<std::size_t>(rot[v]);
        EXPECT_LT(geom::sphere_distance(q * p.centers[v], p.centers[w]) / p.radii[w], 1e-6);
    }
}

TEST(Pipeline, AnchorVertexCommutesWithRotation)
{
    const auto c = cookie::hex_cutout(load_sample("six_holes.json"), 0.03125);
    const auto rot = rotation_map(c.embedding);
    const auto cycles = complex::boundary_cycles(c.complex);
    int checked = 0;
    for (const auto& cy : cycles) {
        // the outer cycle is centered at the origin; only its position set is symmetric
        cplx centroid = 0.0;
        for (int v : cy.vertices) centroid += c.embedding[static_cast<std::size_t>(v)];
        if (std::abs(centroid) < 1e-6 * static_cast<double>(cy.vertices.size())) continue;
        ++checked;
        complex::BoundaryCycle image;
        for (int v : cy.vertices) image.vertices.push_back(rot[static_cast<std::size_t>(v)]);
        EXPECT_EQ(pipeline::detail::anchor_vertex(image, c.embedding), rot[static_cast<std::size_t>(pipeline::detail::anchor_vertex(cy, c.embedding))]);
    }
    EXPECT_EQ(checked, 6);
}

TEST(Pipeline, StageErrorsPropagate)
{
    const cookie::DomainSpec tiny{{cookie::circle_component(0.0, 1.0), cookie::circle_component(0.0, 0.05)}, 0};
    try {
        pipeline::run(tiny, coarse(0.3));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::component_not_separated);
        EXPECT_NE(std::string(e.what()).find("stage cutout"), std::string::npos);
    }
    EXPECT_THROW(pipeline::run(disc(), coarse(-1.0)), Error);
}

TEST(Pipeline, ParallelForRethrowsLowestIndex)
{
    try {
        pipeline::detail::parallel_for(8, 3, [](int k) {
            if (k == 2 || k == 5) icd::fail(Errc::empty, std::to_string(k));
        });
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("2"), std::string::npos);
    }
}

// ---------------------------------------------------------------------------
// modulus and seam circles
// ---------------------------------------------------------------------------

TEST(Modulus, DisjointImagesOfConcentricCircles)
{
    // z -> 1/(z - c) sends |z| = a and |z| = b (a < |c| < b) to disjoint circles
    for (double a : {0.2, 0.5}) {
        const double b = 1.0, cpos = 0.5 * (a + b);
        const geom::Mobius m{0.0, 1.0, 1.0, -cpos};
        const auto ca = geom::mobius_apply(m, geom::Circle{0.0, a});
        const auto cb = geom::mobius_apply(m, geom::Circle{0.0, b});
        EXPECT_NEAR(pipeline::detail::ring_modulus(ca, cb), std::log(b / a) / geom::two_pi, 1e-12);
    }
}

TEST(Modulus, TangencyPointSplitsCenterArc)
{
    const geom::Cap a{Vec3(0, 0, -1), 0.3}, b{Vec3(std::sin(0.5), 0, -std::cos(0.5)), 0.2};
    const auto p = pipeline::detail::tangency_point(a, b);
    EXPECT_NEAR(geom::sphere_distance(p, a.center), 0.3, 1e-14);
    EXPECT_NEAR(geom::sphere_distance(p, b.center), 0.2, 1e-14);
}

TEST(Modulus, DiscSeamRoundnessDropsWithMesh)
{
    const auto a = pipeline::run(disc(), coarse(0.125));
    const auto b = pipeline::run(disc(), coarse(0.0625));
    EXPECT_LT(b.diagnostics.roundness[0], a.diagnostics.roundness[0]);
}

// ---------------------------------------------------------------------------
// verify_intrinsic
// ---------------------------------------------------------------------------

TEST(VerifyIntrinsic, DiscAndAnnulusCertify)
{
    const auto d = pipeline::run(disc(), coarse(0.0625));
    EXPECT_LT(pipeline::verify_intrinsic(d, 0), 0.02);
    const auto a = pipeline::run(annulus(0.3), coarse(0.03125));
    EXPECT_LT(pipeline::verify_intrinsic(a, 0), 0.05);
    EXPECT_LT(pipeline::verify_intrinsic(a, 1), 0.05);
}

TEST(VerifyIntrinsic, WarpedCapFails)
{
    auto cfg = coarse(0.0625);
    cfg.seam_warp = pipeline::shuffle_warp;
    const auto d = pipeline::run(disc(), cfg);
    EXPECT_GT(pipeline::verify_intrinsic(d, 0), 0.1);
}

TEST(VerifyIntrinsic, MissingComponent)
{
    const auto d = pipeline::run(disc(), coarse(0.125));
    try {
        pipeline::verify_intrinsic(d, 3);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::missing_component);
    }
}

TEST(VerifyIntrinsic, PhaseFreeResidualIgnoresRotationAndDirection)
{
    std::vector<double> welded, realized;
    for (int k = 0; k < 10; ++k) {
        welded.push_back(k / 10.0);
        realized.push_back(weld::frac(0.37 - k / 10.0));
    }
    EXPECT_LT(pipeline::detail::phase_free_residual(realized, welded), 1e-12);
    // one entry off by 0.05: the circular mean moves the phase toward it
    realized[4] = weld::frac(realized[4] - 0.05);
    const double phase = std::atan2(std::sin(geom::two_pi * 0.05), 9.0 + std::cos(geom::two_pi * 0.05)) / geom::two_pi;
    EXPECT_NEAR(pipeline::detail::phase_free_residual(realized, welded), 0.05 - phase, 1e-12);
}

// ---------------------------------------------------------------------------
// dilatation
// ---------------------------------------------------------------------------

TEST(Dilatation, IdentityCarrierIsConformal)
{
    const auto c = cookie::hex_cutout(disc(), 0.1);
    layout::Packing p;
    p.complex = c.complex;
    for (auto z : c.embedding) p.centers.push_back(layout::to_vec(z));
    p.radii.assign(p.centers.size(), 0.1);
    const auto rep = pipeline::dilatation_report(c.complex, layout::carrier_map(p, p));
    ASSERT_FALSE(rep.by_depth.empty());
    EXPECT_EQ(rep.by_depth[0].faces, c.complex.face_count());
    for (const auto& s : rep.by_depth) {
        EXPECT_NEAR(s.max, 1.0, 1e-12);
        EXPECT_NEAR(s.median, 1.0, 1e-12);
    }
    EXPECT_NEAR(rep.trend_slope, 0.0, 1e-12);
}

TEST(Dilatation, DepthStrataAreNested)
{
    const auto r = pipeline::run(annulus(0.3), coarse(0.0625));
    const auto rep = pipeline::dilatation_report(r);
    ASSERT_GE(rep.by_depth.size(), 2u);
    for (std::size_t k = 1; k < rep.by_depth.size(); ++k) {
        EXPECT_LT(rep.by_depth[k].faces, rep.by_depth[k - 1].faces);
        EXPECT_LE(rep.by_depth[k].max, rep.by_depth[k - 1].max);
    }
    EXPECT_GE(rep.interior_median, 1.0);
}

TEST(Dilatation, InteriorMedianDropsWithMesh)
{
    const auto a = pipeline::dilatation_report(pipeline::run(annulus(0.3), coarse(0.0625)));
    const auto b = pipeline::dilatation_report(pipeline::run(annulus(0.3), coarse(0.03125)));
    EXPECT_LT(b.interior_median, a.interior_median);
}

TEST(Dilatation, MedianOfEvenAndOdd)
{
    EXPECT_DOUBLE_EQ(pipeline::median_of({3.0, 1.0, 2.0}), 2.0);
    EXPECT_DOUBLE_EQ(pipeline::median_of({4.0, 1.0, 3.0, 2.0}), 2.5);
    EXPECT_DOUBLE_EQ(pipeline::median_of({}), 1.0);
}
