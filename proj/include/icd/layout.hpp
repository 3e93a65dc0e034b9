#pragma once

// Laying out solved labels: breadth-first face traversal in the plane
// (Euclidean labels) or in the unit disc (hyperbolic labels, stored as
// Euclidean circles), Möbius normalization of sphere packings, and the
// piecewise-affine carrier maps between packings of one complex.

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "icd/complex.hpp"
#include "icd/error.hpp"
#include "icd/geom.hpp"
#include "icd/label.hpp"

namespace icd::layout {

using complex::Triangulation;
using geom::cplx;
using geom::Model;
using geom::Vec3;

struct Packing {
    Triangulation complex;
    Model model = Model::plane;
    // plane/disc: (x, y, 0); sphere: unit vector
    std::vector<Vec3> centers;
    // Euclidean radius in plane/disc, angular radius on the sphere
    std::vector<double> radii;
    // Per-vertex marker that moves as a point under Möbius maps (cap centers
    // do not). Starts at the circle center; empty means "use centers".
    std::vector<Vec3> points;
    std::optional<label::PackingLabel> label;

    [[nodiscard]] int size() const noexcept { return static_cast<int>(centers.size()); }

    [[nodiscard]] geom::Circle3 circle(int v) const
    {
        return {centers.at(static_cast<std::size_t>(v)), radii.at(static_cast<std::size_t>(v)), model};
    }

    [[nodiscard]] geom::Circle plane_circle(int v) const
    {
        const auto& c = centers.at(static_cast<std::size_t>(v));
        return {cplx(c.x(), c.y()), radii.at(static_cast<std::size_t>(v))};
    }

    [[nodiscard]] const Vec3& point(int v) const
    {
        return points.empty() ? centers.at(static_cast<std::size_t>(v)) : points.at(static_cast<std::size_t>(v));
    }

    [[nodiscard]] geom::Cap cap(int v) const { return {centers.at(static_cast<std::size_t>(v)), radii.at(static_cast<std::size_t>(v))}; }
};

struct LayoutOptions {
    // Labels with residual above this are rejected unless allow_unconverged.
    double residual_limit = 1e-8;
    bool allow_unconverged = false;
};

inline Vec3 to_vec(cplx z) { return Vec3(z.real(), z.imag(), 0.0); }
inline cplx to_cplx(const Vec3& p) { return {p.x(), p.y()}; }

// Max relative tangency defect over edges, measured in the model metric
// (Euclidean in plane and disc, angular on the sphere).
inline double tangency_residual(const Packing& p)
{
    double worst = 0.0;
    for (int v = 0; v < p.complex.vertex_count(); ++v) {
        for (int u : p.complex.flower(v)) {
            if (u < v) continue;
            const double want = p.radii[static_cast<std::size_t>(u)] + p.radii[static_cast<std::size_t>(v)];
            double got;
            if (p.model == Model::sphere)
                got = geom::sphere_distance(p.centers[static_cast<std::size_t>(u)], p.centers[static_cast<std::size_t>(v)]);
            else
                got = (p.centers[static_cast<std::size_t>(u)] - p.centers[static_cast<std::size_t>(v)]).norm();
            worst = std::max(worst, std::abs(got - want) / want);
        }
    }
    return worst;
}

namespace detail {

// Hyperbolic center of a circle in the unit disc (Euclidean representation).
inline cplx hyperbolic_center(const geom::Circle& c)
{
    const double m = std::abs(c.center);
    if (m == 0.0) return 0.0;
    const double x1 = m - c.radius, x2 = m + c.radius;
    const double a = std::sqrt((1.0 + x1) * (1.0 + x2));
    const double b = std::sqrt((1.0 - x1) * (1.0 - x2));
    return (a - b) / (a + b) * (c.center / m);
}

// Circle of decay dw tangent to the circle of decay du centered at the
// origin, with hyperbolic center on the ray at angle theta.
inline geom::Circle ray_circle(double du, double dw, double theta)
{
    const double inner = geom::disc_radius_at_origin(du);
    const double outer = dw > 0.0 ? std::tanh(0.5 * (geom::radius_from_decay(du) + geom::radius_from_decay(dw))) : 1.0;
    return {0.5 * (inner + outer) * std::polar(1.0, theta), 0.5 * (outer - inner)};
}

// Hyperbolic translations taking z0 to the origin and back.
inline cplx to_origin(cplx z0, cplx z) { return (z - z0) / (1.0 - std::conj(z0) * z); }
inline cplx from_origin(cplx z0, cplx z) { return (z + z0) / (1.0 + std::conj(z0) * z); }

// Euclidean circle of the hyperbolic circle with center z and radius h.
inline geom::Circle circle_at(cplx z, double h)
{
    const double t = std::tanh(0.5 * h);
    const double c = std::cosh(0.5 * h);
    const double rho = std::abs(z);
    const double one_minus_rho2 = (1.0 - rho) * (1.0 + rho);
    const double den = one_minus_rho2 + rho * rho / (c * c);  // 1 - rho^2 t^2
    return {z / (c * c * den), t * one_minus_rho2 / den};
}

// Places w in the positively oriented face (u, v, w) of a hyperbolic packing.
// Finite circles carry hyperbolic centers (z); horocycles only their
// Euclidean circle. Returns w's circle and, when finite, its center.
struct HypPlacement {
    geom::Circle circle;
    cplx center;
};

inline HypPlacement place_hyperbolic(const geom::Circle& cu, const cplx* zu, double du, const geom::Circle& cv, const cplx* zv, double dv,
                                     double dw)
{
    const auto finish = [&](cplx base, double db, double dir) {
        if (dw == 0.0) {
            const auto back = geom::disc_to_origin(base).inverse();
            return HypPlacement{geom::mobius_apply(back, ray_circle(db, 0.0, dir)), 0.0};
        }
        const double hw = geom::radius_from_decay(dw);
        const cplx z = from_origin(base, std::polar(std::tanh(0.5 * (geom::radius_from_decay(db) + hw)), dir));
        return HypPlacement{circle_at(z, hw), z};
    };
    const auto direction = [](cplx base, const geom::Circle& c, const cplx* z) {
        return z ? std::arg(to_origin(base, *z)) : std::arg(geom::mobius_apply(geom::disc_to_origin(base), c).center);
    };
    if (du > 0.0) return finish(*zu, du, direction(*zu, cv, zv) + geom::hyperbolic_angle(du, dv, dw));
    if (dv > 0.0) return finish(*zv, dv, direction(*zv, cu, zu) - geom::hyperbolic_angle(dv, du, dw));
    // Both horocycles: send u's tangency point to infinity of the upper half
    // plane, u to the line Im = 1 and v to the horocycle at 0.
    const cplx pu = cu.center / std::abs(cu.center);
    const cplx pv = cv.center / std::abs(cv.center);
    const double y = (1.0 - cu.radius) / cu.radius;
    const cplx i(0.0, 1.0);
    const geom::Mobius cayley{i, i * pu, -1.0, pu};  // i (pu + z) / (pu - z)
    const double b = cayley(pv).real();
    const geom::Mobius shift{1.0 / y, -b / y, 0.0, 1.0};
    const auto n = (shift * cayley);
    const geom::Circle w{cplx(std::sqrt(1.0 - dw), 0.5 * (1.0 + dw)), 0.5 * (1.0 - dw)};
    const auto c = geom::mobius_apply(n.inverse(), w);
    return {c, dw > 0.0 ? hyperbolic_center(c) : cplx(0.0)};
}

} // namespace detail

// Deepest interior vertex (smallest id among ties) and its first neighbor, or
// the first face's edge when there is no interior vertex. A deep anchor keeps
// hyperbolic layouts away from the unit circle, where positions lose digits.
inline std::pair<int, int> default_anchor(const Triangulation& t)
{
    if (t.interior_count() == 0) return {0, t.flower(0).front()};
    const auto depth = complex::boundary_depth(t);
    int best = -1;
    for (int v = 0; v < t.vertex_count(); ++v)
        if (t.is_interior(v) && (best < 0 || depth[static_cast<std::size_t>(v)] > depth[static_cast<std::size_t>(best)])) best = v;
    return {best, t.flower(best).front()};
}

// Lays out a solved label. Euclidean labels go to the plane with the anchor's
// first vertex at the origin and the second on the positive real axis;
// hyperbolic labels go to the unit disc the same way (an all-horocycle label
// instead starts from a symmetric triple of horocycles).
inline Packing layout(const Triangulation& t, const label::PackingLabel& l, std::pair<int, int> anchor = {-1, -1},
                      const LayoutOptions& opt = {})
{
    if (l.radii.size() != static_cast<std::size_t>(t.vertex_count()))
        fail(Errc::mismatched_complexes, "label size differs from vertex count");
    if (t.interior_count() > 0 && !opt.allow_unconverged) {
        const double res = label::max_residual(t, l);
        if (!(res <= opt.residual_limit)) fail(Errc::unconverged_label, "label residual " + std::to_string(res));
    }
    if (anchor.first < 0) anchor = default_anchor(t);
    const complex::FaceIndex fi(t);
    int f0 = fi.face_of(anchor.first, anchor.second);
    if (f0 < 0) f0 = fi.face_of(anchor.second, anchor.first);
    if (f0 < 0) fail(Errc::degenerate_face, "anchor is not an edge of the complex");

    const bool hyp = l.geometry == label::Geometry::hyperbolic;
    const auto n = static_cast<std::size_t>(t.vertex_count());
    std::vector<geom::Circle> circ(n);
    std::vector<cplx> hc(n);  // hyperbolic centers of finite circles
    std::vector<char> placed(n, 0);
    const auto rad = [&](int v) { return l.radii[static_cast<std::size_t>(v)]; };

    const int a = anchor.first, b = anchor.second;
    if (!hyp) {
        circ[static_cast<std::size_t>(a)] = {0.0, rad(a)};
        circ[static_cast<std::size_t>(b)] = {rad(a) + rad(b), rad(b)};
        placed[static_cast<std::size_t>(a)] = placed[static_cast<std::size_t>(b)] = 1;
    } else if (rad(a) > 0.0) {
        circ[static_cast<std::size_t>(a)] = {0.0, geom::disc_radius_at_origin(rad(a))};
        hc[static_cast<std::size_t>(a)] = 0.0;
        if (rad(b) > 0.0) {
            const double hb = geom::radius_from_decay(rad(b));
            hc[static_cast<std::size_t>(b)] = std::tanh(0.5 * (geom::radius_from_decay(rad(a)) + hb));
            circ[static_cast<std::size_t>(b)] = detail::circle_at(hc[static_cast<std::size_t>(b)], hb);
        } else {
            circ[static_cast<std::size_t>(b)] = detail::ray_circle(rad(a), 0.0, 0.0);
        }
        placed[static_cast<std::size_t>(a)] = placed[static_cast<std::size_t>(b)] = 1;
    } else {
        // three mutually tangent horocycles at the cube roots of unity
        const auto& f = fi.faces()[static_cast<std::size_t>(f0)];
        const double r = 2.0 * std::sqrt(3.0) - 3.0;
        for (int k = 0; k < 3; ++k) {
            const int v = f[static_cast<std::size_t>(k)];
            if (rad(v) != 0.0) fail(Errc::unconverged_label, "mixed horocycle anchor face");
            circ[static_cast<std::size_t>(v)] = {(1.0 - r) * std::polar(1.0, 2.0 * geom::pi * k / 3.0), r};
            placed[static_cast<std::size_t>(v)] = 1;
        }
    }

    std::vector<char> visited(fi.faces().size(), 0);
    std::deque<int> queue{f0};
    visited[static_cast<std::size_t>(f0)] = 1;
    while (!queue.empty()) {
        const int fid = queue.front();
        queue.pop_front();
        const auto& f = fi.faces()[static_cast<std::size_t>(fid)];
        for (int k = 0; k < 3; ++k) {
            const int u = f[static_cast<std::size_t>(k)];
            const int v = f[static_cast<std::size_t>((k + 1) % 3)];
            const int w = f[static_cast<std::size_t>((k + 2) % 3)];
            if (!placed[static_cast<std::size_t>(u)] || !placed[static_cast<std::size_t>(v)] || placed[static_cast<std::size_t>(w)]) continue;
            const auto& cu = circ[static_cast<std::size_t>(u)];
            const auto& cv = circ[static_cast<std::size_t>(v)];
            if (!hyp) {
                const double alpha = geom::euclidean_angle(rad(u), rad(v), rad(w));
                const double dir = std::arg(cv.center - cu.center) + alpha;
                circ[static_cast<std::size_t>(w)] = {cu.center + (rad(u) + rad(w)) * std::polar(1.0, dir), rad(w)};
            } else {
                const auto* zu = rad(u) > 0.0 ? &hc[static_cast<std::size_t>(u)] : nullptr;
                const auto* zv = rad(v) > 0.0 ? &hc[static_cast<std::size_t>(v)] : nullptr;
                const auto pl = detail::place_hyperbolic(cu, zu, rad(u), cv, zv, rad(v), rad(w));
                circ[static_cast<std::size_t>(w)] = pl.circle;
                hc[static_cast<std::size_t>(w)] = pl.center;
            }
            placed[static_cast<std::size_t>(w)] = 1;
            break;
        }
        for (int k = 0; k < 3; ++k) {
            const int g = fi.face_of(f[static_cast<std::size_t>((k + 1) % 3)], f[static_cast<std::size_t>(k)]);
            if (g >= 0 && !visited[static_cast<std::size_t>(g)]) {
                visited[static_cast<std::size_t>(g)] = 1;
                queue.push_back(g);
            }
        }
    }

    Packing p;
    p.complex = t;
    p.model = hyp ? Model::disc : Model::plane;
    p.label = l;
    p.centers.reserve(n);
    p.radii.reserve(n);
    for (std::size_t v = 0; v < n; ++v) {
        if (!placed[v]) fail(Errc::degenerate_face, "vertex " + std::to_string(v) + " unreachable by face traversal");
        p.centers.push_back(to_vec(circ[v].center));
        p.radii.push_back(circ[v].radius);
    }
    return p;
}

// ---------------------------------------------------------------------------
// Möbius normalization on the sphere
// ---------------------------------------------------------------------------

inline Packing apply_mobius(const Packing& p, const geom::Mobius& m)
{
    if (p.model != Model::sphere) fail(Errc::mismatched_complexes, "Möbius normalization expects a sphere packing");
    Packing out = p;
    out.points.resize(p.centers.size());
    for (int v = 0; v < p.size(); ++v) {
        const auto cap = m.apply_cap(p.cap(v));
        out.centers[static_cast<std::size_t>(v)] = cap.center;
        out.radii[static_cast<std::size_t>(v)] = cap.radius;
        out.points[static_cast<std::size_t>(v)] = m.apply_sphere(p.point(v));
    }
    return out;
}

// Map sending three source sphere points to three targets, applied to every
// cap and tracked point.
inline Packing normalize_points(const Packing& p, const std::array<Vec3, 3>& sources, const std::array<Vec3, 3>& targets)
{
    const auto m = geom::three_point_map(sources[0], sources[1], sources[2], targets[0], targets[1], targets[2]);
    return apply_mobius(p, m);
}

// Sends the tracked points of v1, v2, v3 (initially their centers) to the targets.
inline Packing normalize_three_points(const Packing& p, int v1, int v2, int v3, const std::array<Vec3, 3>& targets)
{
    if (v1 == v2 || v2 == v3 || v1 == v3) fail(Errc::degenerate_triple, "marked vertices must be distinct");
    return normalize_points(p, {p.point(v1), p.point(v2), p.point(v3)}, targets);
}

// Möbius-normalizes a sphere packing so that the cap centers have zero mean.
// Returns the applied map through `applied` when given.
inline Packing center_sphere_packing(const Packing& p, geom::Mobius* applied = nullptr)
{
    if (p.model != Model::sphere) fail(Errc::mismatched_complexes, "centering expects a sphere packing");
    const auto mean_after = [&](const Vec3& b) {
        const auto m = geom::boost(b);
        Vec3 s = Vec3::Zero();
        for (int v = 0; v < p.size(); ++v) s += m.apply_cap(p.cap(v)).center;
        return Vec3(s / p.size());
    };
    Vec3 b = Vec3::Zero();
    Vec3 f = mean_after(b);
    for (int it = 0; it < 100 && f.norm() > 1e-15; ++it) {
        Eigen::Matrix3d j;
        const double h = 1e-7;
        for (int k = 0; k < 3; ++k) {
            Vec3 e = Vec3::Zero();
            e(k) = h;
            j.col(k) = (mean_after(b + e) - mean_after(b - e)) / (2 * h);
        }
        Vec3 step = j.colPivHouseholderQr().solve(-f);
        if (!step.allFinite()) step = -1.5 * f;
        double lambda = 1.0;
        Vec3 nb = b + step, nf = mean_after(nb);
        while (nf.norm() >= f.norm() && lambda > 1e-6) {
            lambda *= 0.5;
            nb = b + lambda * step;
            nf = mean_after(nb);
        }
        if (nf.norm() >= f.norm()) break;
        b = nb;
        f = nf;
    }
    const auto m = geom::boost(b);
    if (applied) *applied = m;
    return apply_mobius(p, m);
}

// ---------------------------------------------------------------------------
// Carrier maps
// ---------------------------------------------------------------------------

struct FaceMap {
    complex::Face face{};
    std::array<Vec3, 3> src{};
    std::array<Vec3, 3> dst{};
    Eigen::Matrix2d linear = Eigen::Matrix2d::Identity();  // in local oriented frames
    bool project_to_sphere = false;
};

struct CarrierMap {
    std::vector<FaceMap> faces;
};

namespace detail {

// Orthonormal frame of a triangle: e1 along p1 - p0, normal +z in the plane,
// away from the origin on the sphere.
inline std::pair<Vec3, Vec3> triangle_frame(const std::array<Vec3, 3>& p, bool sphere)
{
    const Vec3 e1 = (p[1] - p[0]).normalized();
    Vec3 n = sphere ? Vec3(p[0] + p[1] + p[2]) : Vec3(0, 0, 1);
    n -= n.dot(e1) * e1;
    n.normalize();
    return {e1, n.cross(e1)};
}

inline Eigen::Matrix2d edge_matrix(const std::array<Vec3, 3>& p, bool sphere)
{
    const auto [e1, e2] = triangle_frame(p, sphere);
    Eigen::Matrix2d m;
    const Vec3 a = p[1] - p[0], b = p[2] - p[0];
    m << a.dot(e1), b.dot(e1), a.dot(e2), b.dot(e2);
    return m;
}

} // namespace detail

// Per-face affine maps between the carriers of two packings of one complex.
// Sphere targets use the inscribed polyhedron followed by radial projection.
inline CarrierMap carrier_map(const Packing& src, const Packing& dst)
{
    if (!(src.complex == dst.complex)) fail(Errc::mismatched_complexes, "packings have different complexes");
    CarrierMap out;
    for (const auto& f : src.complex.faces()) {
        FaceMap m;
        m.face = f;
        for (int k = 0; k < 3; ++k) {
            m.src[static_cast<std::size_t>(k)] = src.centers[static_cast<std::size_t>(f[static_cast<std::size_t>(k)])];
            m.dst[static_cast<std::size_t>(k)] = dst.centers[static_cast<std::size_t>(f[static_cast<std::size_t>(k)])];
        }
        const Eigen::Matrix2d s = detail::edge_matrix(m.src, src.model == Model::sphere);
        const Eigen::Matrix2d d = detail::edge_matrix(m.dst, dst.model == Model::sphere);
        const double scale = std::max(s.cwiseAbs().maxCoeff(), 1e-300);
        if (std::abs(s.determinant()) <= 1e-14 * scale * scale) fail(Errc::degenerate_face, "source face has no area");
        m.linear = d * s.inverse();
        m.project_to_sphere = dst.model == Model::sphere;
        out.faces.push_back(m);
    }
    return out;
}

// Ratio of the larger to the smaller singular value of a face map.
inline double dilatation(const FaceMap& m)
{
    Eigen::JacobiSVD<Eigen::Matrix2d> svd(m.linear);
    const auto sv = svd.singularValues();
    if (!(sv(1) > 1e-300 * std::max(1.0, sv(0)))) fail(Errc::degenerate_face, "face map collapses the triangle");
    return sv(0) / sv(1);
}

// Image of the point with barycentric coordinates (l0, l1, l2) in the face.
inline Vec3 evaluate(const FaceMap& m, const Vec3& bary)
{
    Vec3 q = bary(0) * m.dst[0] + bary(1) * m.dst[1] + bary(2) * m.dst[2];
    if (m.project_to_sphere) q.normalize();
    return q;
}

// Barycentric coordinates of a plane point in a plane triangle.
inline Vec3 barycentric(const std::array<Vec3, 3>& tri, cplx z)
{
    const cplx a = to_cplx(tri[0]), b = to_cplx(tri[1]), c = to_cplx(tri[2]);
    const auto cross = [](cplx x, cplx y) { return x.real() * y.imag() - x.imag() * y.real(); };
    const double area = cross(b - a, c - a);
    const double l1 = cross(z - a, c - a) / area;
    const double l2 = cross(b - a, z - a) / area;
    return Vec3(1.0 - l1 - l2, l1, l2);
}

// Image of a plane point under a carrier map whose source is planar; the
// point must lie in the source carrier.
inline std::optional<Vec3> map_point(const CarrierMap& cm, cplx z)
{
    const FaceMap* best = nullptr;
    double best_min = -1e300;
    Vec3 best_bary;
    for (const auto& m : cm.faces) {
        const Vec3 l = barycentric(m.src, z);
        const double lo = l.minCoeff();
        if (lo > best_min) {
            best_min = lo;
            best = &m;
            best_bary = l;
        }
    }
    if (!best || best_min < -1e-9) return std::nullopt;
    return evaluate(*best, best_bary);
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json to_json(const Packing& p)
{
    nlohmann::ordered_json j;
    j["model"] = std::string(geom::to_string(p.model));
    auto circles = nlohmann::ordered_json::array();
    for (int v = 0; v < p.size(); ++v) {
        const auto& c = p.centers[static_cast<std::size_t>(v)];
        nlohmann::ordered_json e;
        e["vertex"] = v;
        if (p.model == Model::sphere)
            e["center"] = {c.x(), c.y(), c.z()};
        else
            e["center"] = {c.x(), c.y()};
        e["radius"] = p.radii[static_cast<std::size_t>(v)];
        circles.push_back(std::move(e));
    }
    j["circles"] = std::move(circles);
    j["complex"] = complex::to_text(p.complex);
    return j;
}

inline Packing packing_from_json(const nlohmann::json& j)
{
    try {
        Packing p;
        const auto model = j.at("model").get<std::string>();
        if (model == "plane") p.model = Model::plane;
        else if (model == "disc") p.model = Model::disc;
        else if (model == "sphere") p.model = Model::sphere;
        else fail(Errc::parse_error, "unknown model " + model);
        p.complex = complex::from_text(j.at("complex").get<std::string>());
        const auto& circles = j.at("circles");
        if (circles.size() != static_cast<std::size_t>(p.complex.vertex_count())) fail(Errc::parse_error, "circle count differs from vertex count");
        p.centers.resize(circles.size());
        p.radii.resize(circles.size());
        for (const auto& e : circles) {
            const int v = (e.contains("id") ? e.at("id") : e.at("vertex")).get<int>();
            if (v < 0 || v >= p.complex.vertex_count()) fail(Errc::parse_error, "circle vertex out of range");
            const auto& c = e.at("center");
            p.centers[static_cast<std::size_t>(v)] = Vec3(c.at(0).get<double>(), c.at(1).get<double>(), c.size() > 2 ? c.at(2).get<double>() : 0.0);
            p.radii[static_cast<std::size_t>(v)] = e.at("radius").get<double>();
        }
        return p;
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::parse_error, e.what());
    }
}

} // namespace icd::layout
