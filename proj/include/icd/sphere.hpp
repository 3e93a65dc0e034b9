#pragma once

// Sphere packings: puncture one vertex, take the maximal packing of the rest
// in the unit disc, project stereographically and give the puncture the
// outside of the unit circle.

#include <string>
#include <vector>

#include "icd/complex.hpp"
#include "icd/geom.hpp"
#include "icd/label.hpp"
#include "icd/layout.hpp"

namespace icd::label {

struct SphereSolution {
    layout::Packing packing;
    SolveReport report;
};

inline SphereSolution solve_sphere(const Triangulation& t, int puncture, const SolveOptions& opt = {})
{
    if (!complex::is_sphere(t)) fail(Errc::not_a_sphere, "complex is not a triangulated sphere");
    if (puncture < 0 || puncture >= t.vertex_count()) fail(Errc::not_a_sphere, "puncture vertex out of range");
    if (t.degree(puncture) < 3) fail(Errc::not_a_sphere, "puncture vertex has degree < 3");

    const std::vector<int> removed{puncture};
    const auto sub = complex::remove_vertices(t, removed);
    const auto& disc = sub.complex;

    Solution sol;
    if (disc.interior_count() == 0) {
        sol.label = {Geometry::hyperbolic, std::vector<double>(static_cast<std::size_t>(disc.vertex_count()), 0.0)};
        sol.report = {0, 0.0, true};
    } else {
        sol = solve_max_hyperbolic(disc, opt);
        if (!sol.report.converged)
            fail(Errc::max_iter_exceeded, "maximal packing did not converge, residual " + std::to_string(sol.report.final_residual));
    }
    const auto flat = layout::layout(disc, sol.label, {-1, -1}, {std::max(1e-8, 10 * opt.tol), false});

    layout::Packing p;
    p.complex = t;
    p.model = geom::Model::sphere;
    p.centers.resize(static_cast<std::size_t>(t.vertex_count()));
    p.radii.resize(static_cast<std::size_t>(t.vertex_count()));
    for (int v = 0; v < disc.vertex_count(); ++v) {
        const auto cap = geom::cap_from_plane_disc(flat.plane_circle(v));
        const auto old = static_cast<std::size_t>(sub.new_to_old[static_cast<std::size_t>(v)]);
        p.centers[old] = cap.center;
        p.radii[old] = cap.radius;
    }
    p.centers[static_cast<std::size_t>(puncture)] = geom::Vec3(0, 0, 1);
    p.radii[static_cast<std::size_t>(puncture)] = geom::pi / 2;
    return {std::move(p), sol.report};
}

} // namespace icd::label
