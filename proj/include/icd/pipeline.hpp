#pragma once

// End-to-end intrinsic circle domain: hexagonal cut-out, Fuchsian boundary
// params per cycle, hexagonal caps welded onto every cycle, sphere packing,
// three-point normalization and diagnostics.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

#include "icd/complex.hpp"
#include "icd/cookie.hpp"
#include "icd/error.hpp"
#include "icd/geom.hpp"
#include "icd/label.hpp"
#include "icd/layout.hpp"
#include "icd/sphere.hpp"
#include "icd/weld.hpp"

namespace icd::pipeline {

using complex::Triangulation;
using geom::cplx;
using geom::Vec3;
using layout::Packing;

// ---------------------------------------------------------------------------
// Configuration and results
// ---------------------------------------------------------------------------

struct PipelineConfig {
    double epsilon = 0.03125;
    double tol = 1e-10;
    long max_iter = 1'000'000;
    int refine_layers = 1;
    // Plane points in Ω sent to `targets`; defaults derive from the puncture.
    std::optional<std::array<cplx, 3>> marked;
    std::array<Vec3, 3> targets{Vec3(0, 0, -1), Vec3(1, 0, 0), Vec3(0, 1, 0)};
    bool accelerate = true;
    // Worker threads for the per-cycle solves; 0 reads ICD_THREADS (0 = auto).
    int threads = 0;
    // Circle map applied to every cap param before welding (negative controls).
    std::function<double(double)> seam_warp;
};

struct ComponentDisc {
    int component = -1;  // DomainSpec index; -1 for a cycle enclosing none
    int cycle = -1;      // index into the cut-out's boundary cycles
    std::vector<int> cap_vertices;  // sphere ids, inserted seam vertices included
    int cap_center = -1;
    weld::BoundaryParam param;      // Ω side, cut-out ids
    weld::BoundaryParam cap_param;  // cap side as welded, sphere ids
    weld::BoundaryParam cap_native;  // cap side from the cap's own packing (before any warp)
    std::vector<weld::SeamVertex> seam_left;
    std::vector<weld::SeamVertex> seam_right;
    double ideal_decay = -1.0;  // v_B in the Fuchsian packing; -1 when there is none
    geom::CircleFit fitted;     // seam circle in the stereographic chart of the puncture
};

struct Diagnostics {
    std::vector<double> roundness;  // per component disc
    std::optional<double> modulus;  // doubly connected domains only
    double max_angle_residual = 0.0;
    double tangency_residual = 0.0;
    int vertex_count = 0;
    int max_degree = 0;
    int inserted = 0;
};

struct IntrinsicResult {
    Packing sphere_packing;  // normalized
    std::vector<int> omega_vertices;
    std::vector<ComponentDisc> component_discs;
    std::map<std::string, label::SolveReport> reports;
    Diagnostics diagnostics;
    cookie::CutoutResult cutout;  // refined cut-out; ids agree with omega_vertices
    int puncture = -1;
    std::array<int, 3> marked_vertices{};
    double mesh = 0.0;
    double tol = 0.0;
};

// ---------------------------------------------------------------------------
// Helpers
// ---------------------------------------------------------------------------

inline int thread_count(int requested)
{
    int n = requested;
    if (n <= 0) {
        const char* env = std::getenv("ICD_THREADS");
        n = env ? std::atoi(env) : 0;
    }
    if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
    return std::max(1, n);
}

namespace detail {

// Runs job(k) for k < count on up to `threads` workers. Exceptions are
// rethrown in index order so failures are reproducible.
inline void parallel_for(int count, int threads, const std::function<void(int)>& job)
{
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
    std::atomic<int> next{0};
    const auto worker = [&] {
        for (int k = next++; k < count; k = next++) {
            try {
                job(k);
            } catch (...) {
                errors[static_cast<std::size_t>(k)] = std::current_exception();
            }
        }
    };
    const int n = std::min(threads, count);
    if (n <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int k = 0; k < n; ++k) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

template <class F>
auto stage(const std::string& name, F&& f) -> decltype(f())
{
    try {
        return f();
    } catch (const Error& e) {
        throw Error(e.code(), "stage " + name + ": " + e.what());
    }
}

// Deepest vertex from the boundary; lowest id on ties.
inline int deepest_vertex(const Triangulation& t)
{
    const auto depth = complex::boundary_depth(t);
    return static_cast<int>(std::max_element(depth.begin(), depth.end()) - depth.begin());
}

// First cycle vertex counterclockwise from the ray leaving the cycle's
// centroid away from the origin. Commutes with rotations about the origin.
inline int anchor_vertex(const complex::BoundaryCycle& c, std::span<const cplx> embedding)
{
    cplx centroid = 0.0;
    double scale = 0.0;
    for (int v : c.vertices) centroid += embedding[static_cast<std::size_t>(v)];
    centroid /= static_cast<double>(c.vertices.size());
    for (int v : c.vertices) scale = std::max(scale, std::abs(embedding[static_cast<std::size_t>(v)] - centroid));
    const double ref = std::abs(centroid) > 1e-6 * scale ? std::arg(centroid) : 0.0;
    int best = c.vertices.front();
    double best_key = 2.0;
    for (int v : c.vertices) {
        const double key = weld::frac((std::arg(embedding[static_cast<std::size_t>(v)] - centroid) - ref) / geom::two_pi + 1e-6);
        if (key < best_key) {
            best_key = key;
            best = v;
        }
    }
    return best;
}

// Tangency point of two tangent sphere caps, on the great circle through
// their centers.
inline Vec3 tangency_point(const geom::Cap& a, const geom::Cap& b)
{
    Vec3 dir = b.center - a.center.dot(b.center) * a.center;
    if (dir.norm() == 0.0) return a.center;
    dir.normalize();
    return std::cos(a.radius) * a.center + std::sin(a.radius) * dir;
}

// Seam edges of one component: (left vertex, right vertex) pairs that are
// adjacent in the sphere complex.
inline std::vector<std::pair<int, int>> seam_edges(const Triangulation& t, const ComponentDisc& c)
{
    std::unordered_set<int> right;
    for (const auto& s : c.seam_right) right.insert(s.vertex);
    std::vector<std::pair<int, int>> out;
    for (const auto& s : c.seam_left)
        for (int w : t.flower(s.vertex))
            if (right.count(w)) out.emplace_back(s.vertex, w);
    return out;
}

// Seam tangency points in the stereographic chart (north pole at infinity).
inline std::vector<cplx> seam_points(const Packing& p, const ComponentDisc& c)
{
    std::vector<cplx> pts;
    for (auto [u, w] : seam_edges(p.complex, c)) pts.push_back(geom::inverse_stereographic(tangency_point(p.cap(u), p.cap(w))));
    return pts;
}

// Two disjoint discs bound a ring of modulus acosh(|δ|)/2π, δ their
// inversive distance.
inline double ring_modulus(const geom::Circle& a, const geom::Circle& b)
{
    const double d2 = std::norm(a.center - b.center);
    const double delta = (d2 - a.radius * a.radius - b.radius * b.radius) / (2.0 * a.radius * b.radius);
    return std::acosh(std::max(1.0, std::abs(delta))) / geom::two_pi;
}

inline int nearest_vertex(std::span<const cplx> embedding, cplx z)
{
    int best = 0;
    for (std::size_t v = 1; v < embedding.size(); ++v)
        if (std::abs(embedding[v] - z) < std::abs(embedding[static_cast<std::size_t>(best)] - z)) best = static_cast<int>(v);
    return best;
}

inline double domain_distance(const cookie::DomainSpec& d, cplx z)
{
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : d.components) best = std::min(best, cookie::boundary_distance(c, z));
    return best;
}

} // namespace detail

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

inline IntrinsicResult run(const cookie::DomainSpec& domain, const PipelineConfig& cfg = {})
{
    if (!(cfg.epsilon > 0.0)) fail(Errc::domain_error, "mesh must be positive");
    if (cfg.refine_layers < 0) fail(Errc::domain_error, "refine layers must be non-negative");
    const label::SolveOptions opt{cfg.tol, cfg.max_iter, cfg.accelerate, 0.0};

    IntrinsicResult res;
    res.mesh = cfg.epsilon;
    res.tol = cfg.tol;

    // (1) cut-out
    res.cutout = detail::stage("cutout", [&] { return cookie::refine_cutout(cookie::hex_cutout(domain, cfg.epsilon), cfg.refine_layers); });
    const Triangulation& omega = res.cutout.complex;
    const int n_omega = omega.vertex_count();
    res.omega_vertices.resize(static_cast<std::size_t>(n_omega));
    std::iota(res.omega_vertices.begin(), res.omega_vertices.end(), 0);
    const auto cycles = complex::boundary_cycles(omega);
    const int deepest = detail::deepest_vertex(omega);

    // (2) boundary params, one independent solve per cycle
    const int nc = static_cast<int>(cycles.size());
    std::vector<weld::BoundaryParam> params(static_cast<std::size_t>(nc));
    std::vector<label::SolveReport> reports(static_cast<std::size_t>(nc));
    std::vector<double> ideal(static_cast<std::size_t>(nc), -1.0);
    detail::parallel_for(nc, thread_count(cfg.threads), [&](int k) {
        const auto& c = cycles[static_cast<std::size_t>(k)];
        weld::BoundaryParam p;
        detail::stage("param[" + std::to_string(k) + "]", [&] {
            if (nc == 1) {
                p = weld::disc_boundary_param(omega, deepest, opt, &reports[static_cast<std::size_t>(k)]);
            } else {
                const auto capped = complex::add_ideal_vertex(omega, c);
                const int vb = capped.vertex_count() - 1;
                const auto sol = label::solve_max_hyperbolic(capped, opt);
                reports[static_cast<std::size_t>(k)] = sol.report;
                if (!sol.report.converged) fail(Errc::unconverged_label, "Fuchsian packing did not converge");
                p = weld::fuchsian_boundary_param(capped, sol.label, vb, cfg.tol);
                ideal[static_cast<std::size_t>(k)] = sol.label.radii[static_cast<std::size_t>(vb)];
            }
            return 0;
        });
        params[static_cast<std::size_t>(k)] = weld::anchor_at(p, detail::anchor_vertex(c, res.cutout.embedding));
    });
    for (int k = 0; k < nc; ++k) res.reports["param[" + std::to_string(k) + "]"] = reports[static_cast<std::size_t>(k)];

    // (3) caps, welded in cycle order onto one evolving complex
    Triangulation sphere = omega;
    for (int k = 0; k < nc; ++k) {
        const auto& p = params[static_cast<std::size_t>(k)];
        const auto tag = "weld[" + std::to_string(k) + "]";
        detail::stage(tag, [&] {
            const auto cap = weld::make_cap(p, 0.0, opt);
            // half a gap off the anchor keeps the two chains from tying
            const double g0 = weld::gaps(cap.param).front();
            const auto native = weld::remap(cap.param, [g0](double t) { return t + 0.5 * g0; });
            auto cp = cfg.seam_warp ? weld::remap(native, cfg.seam_warp) : native;
            const auto rec = weld::weld(sphere, p, cap.complex, cp);

            ComponentDisc disc;
            disc.component = res.cutout.cycle_map.empty() ? -1 : res.cutout.cycle_map[static_cast<std::size_t>(k)];
            disc.cycle = k;
            for (int v : rec.right_map) disc.cap_vertices.push_back(v);
            for (int v : rec.inserted) disc.cap_vertices.push_back(v);
            std::sort(disc.cap_vertices.begin(), disc.cap_vertices.end());
            disc.cap_center = rec.right_map[static_cast<std::size_t>(std::max(0, cap.center))];
            disc.param = p;
            disc.cap_param = cp;
            disc.cap_native = native;
            for (auto& e : disc.cap_param.entries) e.vertex = rec.right_map[static_cast<std::size_t>(e.vertex)];
            for (auto& e : disc.cap_native.entries) e.vertex = rec.right_map[static_cast<std::size_t>(e.vertex)];
            disc.seam_left = rec.seam_left;
            disc.seam_right = rec.seam_right;
            disc.ideal_decay = ideal[static_cast<std::size_t>(k)];
            res.component_discs.push_back(std::move(disc));
            res.diagnostics.inserted += static_cast<int>(rec.inserted.size());
            sphere = rec.merged;
            return 0;
        });
    }

    // (4) topology
    if (!complex::is_sphere(sphere)) fail(Errc::not_sphere_after_welds, "welded complex is not a sphere");

    // (5) sphere packing, puncture at the deepest Ω vertex
    res.puncture = deepest;
    const auto sol = detail::stage("sphere", [&] { return label::solve_sphere(sphere, deepest, opt); });
    res.reports["sphere"] = sol.report;
    if (!sol.report.converged) fail(Errc::unconverged_label, "stage sphere: packing did not converge");
    const Packing& raw = sol.packing;

    // (7) diagnostics in the chart where the puncture sits at infinity
    for (auto& c : res.component_discs) {
        c.fitted = geom::fit_circle(detail::seam_points(raw, c));
        res.diagnostics.roundness.push_back(c.fitted.roundness);
    }
    if (res.component_discs.size() == 2)
        res.diagnostics.modulus = detail::ring_modulus(res.component_discs[0].fitted.circle, res.component_discs[1].fitted.circle);
    res.diagnostics.max_angle_residual = sol.report.final_residual;
    res.diagnostics.tangency_residual = layout::tangency_residual(raw);
    res.diagnostics.vertex_count = sphere.vertex_count();
    res.diagnostics.max_degree = sphere.max_degree();

    // (6) normalization
    std::array<cplx, 3> pts;
    if (cfg.marked) {
        pts = *cfg.marked;
    } else {
        const cplx p = res.cutout.embedding[static_cast<std::size_t>(deepest)];
        const double d = 0.5 * detail::domain_distance(domain, p);
        pts = {p, p + d, p + cplx(0.0, d)};
    }
    for (std::size_t k = 0; k < 3; ++k) res.marked_vertices[k] = detail::nearest_vertex(res.cutout.embedding, pts[k]);
    res.sphere_packing = detail::stage("normalize", [&] {
        return layout::normalize_three_points(raw, res.marked_vertices[0], res.marked_vertices[1], res.marked_vertices[2], cfg.targets);
    });
    return res;
}

// ---------------------------------------------------------------------------
// Dilatation of the cut-out to sphere map
// ---------------------------------------------------------------------------

struct DepthStats {
    int depth = 0;  // faces whose vertices all have boundary depth >= depth
    int faces = 0;
    double max = 1.0;
    double median = 1.0;
};

struct DilatationReport {
    std::vector<DepthStats> by_depth;
    double interior_median = 1.0;  // depth >= 1
    double trend_slope = 0.0;      // least-squares slope of medians against depth
};

inline double median_of(std::vector<double> v)
{
    if (v.empty()) return 1.0;
    const std::size_t m = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m), v.end());
    const double hi = v[m];
    if (v.size() % 2) return hi;
    return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m)));
}

// Per-face dilatations of a carrier map, stratified by the minimum boundary
// depth of each face in `t`.
inline DilatationReport dilatation_report(const Triangulation& t, const layout::CarrierMap& cm)
{
    const auto depth = complex::boundary_depth(t);
    std::vector<std::pair<int, double>> faces;
    int deepest = 0;
    for (const auto& m : cm.faces) {
        int d = std::numeric_limits<int>::max();
        for (int v : m.face) d = std::min(d, depth[static_cast<std::size_t>(v)]);
        faces.emplace_back(d, layout::dilatation(m));
        deepest = std::max(deepest, d);
    }
    DilatationReport rep;
    for (int d = 0; d <= deepest; ++d) {
        std::vector<double> k;
        for (auto [fd, kd] : faces)
            if (fd >= d) k.push_back(kd);
        if (k.empty()) break;
        rep.by_depth.push_back({d, static_cast<int>(k.size()), *std::max_element(k.begin(), k.end()), median_of(k)});
    }
    if (rep.by_depth.size() > 1) rep.interior_median = rep.by_depth[1].median;
    else if (!rep.by_depth.empty()) rep.interior_median = rep.by_depth[0].median;
    if (rep.by_depth.size() > 1) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double n = static_cast<double>(rep.by_depth.size());
        for (const auto& s : rep.by_depth) {
            sx += s.depth;
            sy += s.median;
            sxx += static_cast<double>(s.depth) * s.depth;
            sxy += s.depth * s.median;
        }
        rep.trend_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    }
    return rep;
}

// Carrier map from the planar cut-out to the Ω part of the sphere packing.
inline layout::CarrierMap omega_carrier_map(const IntrinsicResult& r)
{
    const auto& t = r.cutout.complex;
    Packing src;
    src.complex = t;
    src.model = geom::Model::plane;
    for (auto z : r.cutout.embedding) src.centers.push_back(layout::to_vec(z));
    src.radii.assign(src.centers.size(), r.mesh);
    Packing dst;
    dst.complex = t;
    dst.model = geom::Model::sphere;
    for (int v = 0; v < t.vertex_count(); ++v) {
        for (int u : t.flower(v))
            if (!r.sphere_packing.complex.adjacent(v, u)) fail(Errc::mismatched_complexes, "Ω is not a subcomplex of the sphere complex");
        dst.centers.push_back(r.sphere_packing.centers[static_cast<std::size_t>(v)]);
        dst.radii.push_back(r.sphere_packing.radii[static_cast<std::size_t>(v)]);
    }
    return layout::carrier_map(src, dst);
}

inline DilatationReport dilatation_report(const IntrinsicResult& r)
{
    return dilatation_report(r.cutout.complex, omega_carrier_map(r));
}

// Image on the sphere of a plane point of the cut-out carrier.
inline std::optional<Vec3> map_point(const IntrinsicResult& r, cplx z) { return layout::map_point(omega_carrier_map(r), z); }

// ---------------------------------------------------------------------------
// Intrinsic-disc certification
// ---------------------------------------------------------------------------

namespace detail {

// Max deviation between realized seam angles and welded positions after
// removing the best common rotation; both directions of reading the angles
// are tried.
inline double phase_free_residual(const std::vector<double>& realized, const std::vector<double>& welded)
{
    double best = std::numeric_limits<double>::infinity();
    for (int sign : {1, -1}) {
        std::vector<double> delta;
        double sc = 0.0, ss = 0.0;
        for (std::size_t k = 0; k < realized.size(); ++k) {
            const double d = weld::circular_diff(sign * realized[k], welded[k]);
            delta.push_back(d);
            sc += std::cos(geom::two_pi * d);
            ss += std::sin(geom::two_pi * d);
        }
        const double phase = std::atan2(ss, sc) / geom::two_pi;
        double worst = 0.0;
        for (double d : delta) worst = std::max(worst, std::abs(weld::circular_diff(d, phase)));
        best = std::min(best, worst);
    }
    return best;
}

// Seam vertices of a component with their reference positions: welded
// positions on the Ω side and for inserted vertices, the cap's own param
// (read as the right chain of the weld) for cap vertices.
inline std::vector<weld::SeamVertex> seam_vertices(const ComponentDisc& c)
{
    std::map<int, double> native;
    for (const auto& e : c.cap_native.entries) native[e.vertex] = weld::frac(-c.cap_native.orientation * e.t);
    std::vector<weld::SeamVertex> out = c.seam_left;
    for (auto s : c.seam_right) {
        if (const auto it = native.find(s.vertex); it != native.end()) s.s = it->second;
        out.push_back(s);
    }
    return out;
}

} // namespace detail

// Re-solves Ω ∪ L for one complementary component and measures how far the
// angular positions of the seam vertices around L's hyperbolic center are
// from the Ω-side param and from the cap's own param. For several components the other boundaries carry
// horocycles; for a disc the sphere packing is read from inside L.
inline double verify_intrinsic(const IntrinsicResult& r, int component)
{
    const auto it = std::find_if(r.component_discs.begin(), r.component_discs.end(), [&](const auto& c) { return c.component == component; });
    if (it == r.component_discs.end()) fail(Errc::missing_component, "no cap for component " + std::to_string(component));
    const ComponentDisc& c = *it;
    const auto seam = detail::seam_vertices(c);
    const int n_omega = static_cast<int>(r.omega_vertices.size());
    const label::SolveOptions opt{r.tol, 1'000'000, true, 0.0};

    std::vector<double> realized, welded;
    if (r.component_discs.size() == 1) {
        const auto rot = geom::rotation_to(r.sphere_packing.centers[static_cast<std::size_t>(c.cap_center)]).inverse();
        const auto p = layout::apply_mobius(r.sphere_packing, rot);
        const auto fit = geom::fit_circle(detail::seam_points(p, c));
        const auto chart = [&](int v) {
            const auto img = geom::plane_circle_from_cap(p.cap(v));
            return geom::Circle{(img.circle.center - fit.circle.center) / fit.circle.radius, img.circle.radius / fit.circle.radius};
        };
        const auto to0 = geom::disc_to_origin(layout::detail::hyperbolic_center(chart(r.puncture)));
        for (const auto& s : seam) {
            realized.push_back(std::arg(geom::mobius_apply(to0, chart(s.vertex)).center) / geom::two_pi);
            welded.push_back(s.s);
        }
        return detail::phase_free_residual(realized, welded);
    }

    const auto& t = r.sphere_packing.complex;
    std::vector<char> keep(static_cast<std::size_t>(t.vertex_count()), 0);
    for (int v = 0; v < n_omega; ++v) keep[static_cast<std::size_t>(v)] = 1;
    for (int v : c.cap_vertices) keep[static_cast<std::size_t>(v)] = 1;
    const auto sub = complex::induced_subcomplex(t, keep);
    const auto& x = sub.complex;
    const auto sol = label::solve_max_hyperbolic(x, opt);
    if (!sol.report.converged) fail(Errc::unconverged_label, "Ω ∪ L packing did not converge");
    const int center = sub.old_to_new[static_cast<std::size_t>(c.cap_center)];
    const auto p = layout::layout(x, sol.label, {center, x.flower(center).front()}, {std::max(1e-8, 10 * r.tol), false});
    const auto id = [&](int v) { return sub.old_to_new[static_cast<std::size_t>(v)]; };

    std::vector<cplx> pts;
    for (auto [u, w] : detail::seam_edges(t, c)) {
        const auto a = p.plane_circle(id(u)), b = p.plane_circle(id(w));
        pts.push_back(a.center + a.radius * (b.center - a.center) / std::abs(b.center - a.center));
    }
    const auto fit = geom::fit_circle(pts);
    const auto to0 = geom::disc_to_origin(layout::detail::hyperbolic_center(fit.circle));
    for (const auto& s : seam) {
        realized.push_back(std::arg(geom::mobius_apply(to0, p.plane_circle(id(s.vertex))).center) / geom::two_pi);
        welded.push_back(s.s);
    }
    return detail::phase_free_residual(realized, welded);
}

// Circle map used by the negative control: a smooth reparametrization far
// from the identity.
inline double shuffle_warp(double t) { return t + 0.95 * std::sin(geom::two_pi * t) / geom::two_pi; }

} // namespace icd::pipeline
