#pragma once

// Geometric primitives: tangency-triangle angles in the three geometries,
// stereographic projection, Möbius maps acting on points, plane circles and
// sphere caps, and least-squares circle fitting.
//
// Hyperbolic radii are carried as decay = exp(-2h), so 0 encodes a horocycle.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "icd/error.hpp"

namespace icd::geom {

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

enum class Model { plane, disc, sphere };

constexpr std::string_view to_string(Model m) noexcept
{
    switch (m) {
    case Model::plane: return "plane";
    case Model::disc: return "disc";
    case Model::sphere: return "sphere";
    }
    return "plane";
}

// Plane (or unit-disc) circle in Euclidean coordinates.
struct Circle {
    cplx center;
    double radius = 0.0;
};

// Spherical cap: unit center and angular radius in (0, pi).
struct Cap {
    Vec3 center = Vec3(0, 0, -1);
    double radius = 0.0;
};

// Model-tagged circle; plane/disc circles use the xy components of center.
struct Circle3 {
    Vec3 center = Vec3::Zero();
    double radius = 0.0;
    Model model = Model::plane;
};

// ---------------------------------------------------------------------------
// Hyperbolic radius encoding
// ---------------------------------------------------------------------------

inline double decay_from_radius(double h) { return h == std::numeric_limits<double>::infinity() ? 0.0 : std::exp(-2.0 * h); }
inline double radius_from_decay(double d) { return d <= 0.0 ? std::numeric_limits<double>::infinity() : -0.5 * std::log(d); }

// Euclidean radius of a hyperbolic circle centered at the disc origin.
inline double disc_radius_at_origin(double decay)
{
    // tanh(h/2); (1 - sqrt(d)) / (1 + sqrt(d)) cancels for small h
    return std::tanh(-0.25 * std::log(decay));
}

// ---------------------------------------------------------------------------
// Tangency-triangle angles
// ---------------------------------------------------------------------------

// Angle at v in the Euclidean triangle formed by three mutually tangent circles.
inline double euclidean_angle(double rv, double ru, double rw)
{
    if (!(rv > 0.0) || !(ru > 0.0) || !(rw > 0.0) || !std::isfinite(rv) || !std::isfinite(ru) || !std::isfinite(rw))
        fail(Errc::non_positive_radius, "Euclidean radii must be finite and positive");
    return 2.0 * std::atan2(std::sqrt(ru * rw), std::sqrt(rv * (rv + ru + rw)));
}

namespace detail {
inline void check_decay(double d)
{
    if (!(d >= 0.0) || !(d < 1.0)) fail(Errc::non_positive_radius, "hyperbolic decay must lie in [0,1)");
}
} // namespace detail

// Angle at v for hyperbolic circles given by decays; u and w may be horocycles.
inline double hyperbolic_angle(double dv, double du, double dw)
{
    detail::check_decay(dv);
    detail::check_decay(du);
    detail::check_decay(dw);
    if (dv == 0.0) fail(Errc::infinite_apex_radius, "apex circle is a horocycle");
    // 1 - dv du dw summed from exact differences keeps digits for small circles
    const double one_minus = (1.0 - dv) + dv * (1.0 - du) + dv * du * (1.0 - dw);
    const double num = std::sqrt(dv * (1.0 - du) * (1.0 - dw));
    const double den = std::sqrt((1.0 - dv) * one_minus);
    return 2.0 * std::atan2(num, den);
}

// Angle at v for spherical caps with angular radii in (0, pi).
inline double spherical_angle(double rv, double ru, double rw)
{
    for (double r : {rv, ru, rw})
        if (!(r > 0.0) || !(r < pi)) fail(Errc::non_positive_radius, "spherical radii must lie in (0, pi)");
    const double s = rv + ru + rw;
    if (s >= pi) fail(Errc::triangle_too_large, "radius sum reaches pi; no spherical triangle");
    return 2.0 * std::atan2(std::sqrt(std::sin(ru) * std::sin(rw)), std::sqrt(std::sin(s) * std::sin(rv)));
}

// ---------------------------------------------------------------------------
// Sphere helpers
// ---------------------------------------------------------------------------

inline double sphere_distance(const Vec3& a, const Vec3& b)
{
    return std::atan2(a.cross(b).norm(), a.dot(b));
}

// Plane to unit sphere: 0 -> south pole, unit circle -> equator.
inline Vec3 stereographic(cplx z)
{
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return Vec3(0, 0, 1);
    const double n2 = std::norm(z);
    return Vec3(2.0 * z.real(), 2.0 * z.imag(), n2 - 1.0) / (n2 + 1.0);
}

// Unit sphere to plane; the north pole maps to complex infinity.
inline cplx inverse_stereographic(const Vec3& p)
{
    const double xy2 = p.x() * p.x() + p.y() * p.y();
    const double one_minus_z = p.z() > 0.0 ? xy2 / (1.0 + p.z()) : 1.0 - p.z();
    if (one_minus_z == 0.0) {
        const double inf = std::numeric_limits<double>::infinity();
        return {inf, inf};
    }
    return cplx(p.x(), p.y()) / one_minus_z;
}

// Cap bounded by the image of a plane circle; interior or exterior of the disc.
inline Cap cap_from_plane_disc(const Circle& c, bool exterior = false)
{
    if (!(c.radius > 0.0)) fail(Errc::non_positive_radius, "circle radius must be positive");
    const double k = (std::abs(c.center) - c.radius) * (std::abs(c.center) + c.radius);
    Vec3 n(2.0 * c.center.real(), 2.0 * c.center.imag(), k - 1.0);
    double t = k + 1.0;
    if (exterior) {
        n = -n;
        t = -t;
    }
    const double len = n.norm();
    return {n / len, std::atan2(2.0 * c.radius, t)};
}

struct PlaneImage {
    Circle circle;
    bool exterior = false;  // cap is the outside of the circle
};

// Boundary circle of a cap in the plane. Throws ImageIsLine if the boundary
// passes through the north pole.
inline PlaneImage plane_circle_from_cap(const Cap& cap)
{
    const double gap = std::cos(cap.radius) - cap.center.z();
    if (std::abs(gap) <= 1e-14) fail(Errc::image_is_line, "cap boundary passes through the north pole");
    PlaneImage out;
    out.circle.center = cplx(cap.center.x(), cap.center.y()) / gap;
    out.circle.radius = std::sin(cap.radius) / std::abs(gap);
    out.exterior = gap < 0.0;
    return out;
}

inline bool cap_contains(const Cap& cap, const Vec3& p) { return sphere_distance(cap.center, p) <= cap.radius; }

// ---------------------------------------------------------------------------
// Möbius maps
// ---------------------------------------------------------------------------

namespace detail {
// Homogeneous coordinates of a sphere point; z = u0 / u1.
struct Spinor {
    cplx u0, u1;
};

inline Spinor spinor_of(const Vec3& p)
{
    if (p.z() <= 0.0) return {cplx(p.x(), p.y()) / (1.0 - p.z()), 1.0};
    return {1.0, cplx(p.x(), -p.y()) / (1.0 + p.z())};
}

inline Vec3 point_of(const Spinor& s)
{
    const double a = std::norm(s.u0);
    const double b = std::norm(s.u1);
    const cplx m = s.u0 * std::conj(s.u1);
    const double n = a + b;
    return Vec3(2.0 * m.real() / n, 2.0 * m.imag() / n, (a - b) / n);
}

inline cplx bracket(const Spinor& x, const Spinor& y) { return x.u0 * y.u1 - x.u1 * y.u0; }
} // namespace detail

struct Mobius {
    cplx a{1.0}, b{0.0}, c{0.0}, d{1.0};

    static Mobius identity() { return {}; }

    [[nodiscard]] cplx det() const { return a * d - b * c; }

    // Scales to determinant one with a fixed sign convention (first nonzero of
    // a, c has nonnegative real part) so equal maps compare equal.
    [[nodiscard]] Mobius normalized() const
    {
        const cplx det_v = det();
        if (std::abs(det_v) == 0.0) fail(Errc::degenerate_input, "singular Möbius matrix");
        const cplx s = std::sqrt(det_v);
        Mobius m{a / s, b / s, c / s, d / s};
        const cplx lead = std::abs(m.a) > 1e-300 ? m.a : m.c;
        if (lead.real() < 0.0 || (lead.real() == 0.0 && lead.imag() < 0.0)) m = {-m.a, -m.b, -m.c, -m.d};
        return m;
    }

    [[nodiscard]] Mobius inverse() const { return Mobius{d, -b, -c, a}.normalized(); }

    friend Mobius operator*(const Mobius& x, const Mobius& y)
    {
        return Mobius{x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d}.normalized();
    }

    // Plane point; infinity is represented by non-finite components.
    [[nodiscard]] cplx operator()(cplx z) const
    {
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
            if (c == 0.0) return {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
            return a / c;
        }
        const cplx den = c * z + d;
        if (den == 0.0) return {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
        return (a * z + b) / den;
    }

    [[nodiscard]] Vec3 apply_sphere(const Vec3& p) const
    {
        const auto s = detail::spinor_of(p);
        return detail::point_of({a * s.u0 + b * s.u1, c * s.u0 + d * s.u1});
    }

    // Lorentz action on the Hermitian matrix of a cap's space-like vector.
    [[nodiscard]] Cap apply_cap(const Cap& cap) const
    {
        const Mobius m = normalized();
        const double t = std::cos(cap.radius);
        const Vec3& n = cap.center;
        // H = [[t+z, x+iy], [x-iy, t-z]]
        const cplx h00 = t + n.z(), h01(n.x(), n.y()), h11 = t - n.z();
        const cplx h10 = std::conj(h01);
        // A H
        const cplx p00 = m.a * h00 + m.b * h10, p01 = m.a * h01 + m.b * h11;
        const cplx p10 = m.c * h00 + m.d * h10, p11 = m.c * h01 + m.d * h11;
        // (A H) A^dagger
        const cplx q00 = p00 * std::conj(m.a) + p01 * std::conj(m.b);
        const cplx q01 = p00 * std::conj(m.c) + p01 * std::conj(m.d);
        const cplx q11 = p10 * std::conj(m.c) + p11 * std::conj(m.d);
        const double t2 = 0.5 * (q00.real() + q11.real());
        const Vec3 n2(q01.real(), q01.imag(), 0.5 * (q00.real() - q11.real()));
        return {n2 / n2.norm(), std::atan2(std::sin(cap.radius), t2)};
    }
};

// Image of a plane circle; exact via inversion. Throws ImageIsLine if the pole
// of the map lies on the circle.
inline Circle mobius_apply(const Mobius& m, const Circle& circ)
{
    if (!(circ.radius > 0.0)) fail(Errc::non_positive_radius, "circle radius must be positive");
    if (m.c == 0.0) {
        const cplx k = m.a / m.d;
        return {k * circ.center + m.b / m.d, std::abs(k) * circ.radius};
    }
    // M(z) = a/c - det / (c^2 (z + d/c))
    const cplx q = circ.center + m.d / m.c;
    const double qa = std::abs(q);
    const double gap = (qa - circ.radius) * (qa + circ.radius);
    if (std::abs(qa - circ.radius) <= 1e-14 * std::max(1.0, circ.radius))
        fail(Errc::image_is_line, "circle passes through the pole of the map");
    const cplx inv_center = std::conj(q) / gap;
    const double inv_radius = circ.radius / std::abs(gap);
    const cplx scale = -m.det() / (m.c * m.c);
    return {scale * inv_center + m.a / m.c, std::abs(scale) * inv_radius};
}

inline Circle3 mobius_apply(const Mobius& m, const Circle3& c)
{
    if (c.model == Model::sphere) {
        const Cap cap = m.apply_cap({c.center, c.radius});
        return {cap.center, cap.radius, Model::sphere};
    }
    const Circle out = mobius_apply(m, Circle{cplx(c.center.x(), c.center.y()), c.radius});
    return {Vec3(out.center.real(), out.center.imag(), 0.0), out.radius, c.model};
}

// Map sending sphere points p1, p2, p3 to 0, 1, infinity.
inline Mobius to_zero_one_infinity(const Vec3& p1, const Vec3& p2, const Vec3& p3)
{
    const auto u1 = detail::spinor_of(p1);
    const auto u2 = detail::spinor_of(p2);
    const auto u3 = detail::spinor_of(p3);
    const cplx k1 = detail::bracket(u2, u3);
    const cplx k3 = detail::bracket(u2, u1);
    const cplx k13 = detail::bracket(u1, u3);
    if (std::abs(k1) < 1e-12 || std::abs(k3) < 1e-12 || std::abs(k13) < 1e-12)
        fail(Errc::degenerate_triple, "points are not distinct");
    return Mobius{k1 * u1.u1, -k1 * u1.u0, k3 * u3.u1, -k3 * u3.u0}.normalized();
}

// Unique map with p_i -> q_i.
inline Mobius three_point_map(const Vec3& p1, const Vec3& p2, const Vec3& p3, const Vec3& q1, const Vec3& q2, const Vec3& q3)
{
    return to_zero_one_infinity(q1, q2, q3).inverse() * to_zero_one_infinity(p1, p2, p3);
}

// Rotation of the sphere taking the north pole to n.
inline Mobius rotation_to(const Vec3& n)
{
    auto s = detail::spinor_of(n.normalized());
    const double len = std::sqrt(std::norm(s.u0) + std::norm(s.u1));
    s.u0 /= len;
    s.u1 /= len;
    return Mobius{s.u0, -std::conj(s.u1), s.u1, std::conj(s.u0)};
}

// Hyperbolic boost pushing points toward direction b by rapidity |b|.
inline Mobius boost(const Vec3& b)
{
    const double beta = b.norm();
    if (beta == 0.0) return Mobius::identity();
    const Mobius r = rotation_to(b / beta);
    const Mobius scale{std::exp(0.5 * beta), 0.0, 0.0, std::exp(-0.5 * beta)};
    return r * scale * r.inverse();
}

// Disc automorphism sending p to 0.
inline Mobius disc_to_origin(cplx p) { return Mobius{1.0, -p, -std::conj(p), 1.0}.normalized(); }

// Cross-ratio (z1, z2; z3, z4) of plane points.
inline cplx cross_ratio(cplx z1, cplx z2, cplx z3, cplx z4)
{
    return ((z1 - z3) * (z2 - z4)) / ((z2 - z3) * (z1 - z4));
}

// Cross-ratio of sphere points via spinor brackets; invariant under Möbius maps.
inline cplx cross_ratio(const Vec3& p1, const Vec3& p2, const Vec3& p3, const Vec3& p4)
{
    const auto u1 = detail::spinor_of(p1), u2 = detail::spinor_of(p2), u3 = detail::spinor_of(p3), u4 = detail::spinor_of(p4);
    return (detail::bracket(u1, u3) * detail::bracket(u2, u4)) / (detail::bracket(u2, u3) * detail::bracket(u1, u4));
}

// ---------------------------------------------------------------------------
// Circle fitting
// ---------------------------------------------------------------------------

struct CircleFit {
    Circle circle;
    double roundness = 0.0;  // (max d - min d) / radius
};

// Least-squares circle: algebraic fit refined by Gauss-Newton on geometric
// distances. Three points give their circumcircle with roundness exactly 0.
inline CircleFit fit_circle(std::span<const cplx> pts)
{
    const auto n = pts.size();
    if (n < 3) fail(Errc::degenerate_input, "need at least three points");
    cplx mean = 0.0;
    for (auto p : pts) mean += p;
    mean /= static_cast<double>(n);
    double scale = 0.0;
    for (auto p : pts) scale = std::max(scale, std::abs(p - mean));
    if (scale == 0.0) fail(Errc::degenerate_input, "points coincide");

    if (n == 3) {
        const cplx a = pts[0] - mean, b = pts[1] - mean, c = pts[2] - mean;
        const double dd = 2.0 * (a.real() * (b.imag() - c.imag()) + b.real() * (c.imag() - a.imag()) + c.real() * (a.imag() - b.imag()));
        if (std::abs(dd) <= 1e-12 * scale * scale) fail(Errc::degenerate_input, "points are collinear");
        const double ux = (std::norm(a) * (b.imag() - c.imag()) + std::norm(b) * (c.imag() - a.imag()) + std::norm(c) * (a.imag() - b.imag())) / dd;
        const double uy = (std::norm(a) * (c.real() - b.real()) + std::norm(b) * (a.real() - c.real()) + std::norm(c) * (b.real() - a.real())) / dd;
        const cplx center = cplx(ux, uy) + mean;
        return {{center, std::abs(pts[0] - center)}, 0.0};
    }

    // Algebraic fit: x^2 + y^2 + D x + E y + F = 0 in centered, scaled coordinates.
    Eigen::MatrixXd a(static_cast<Eigen::Index>(n), 3);
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const cplx q = (pts[i] - mean) / scale;
        const auto row = static_cast<Eigen::Index>(i);
        a(row, 0) = q.real();
        a(row, 1) = q.imag();
        a(row, 2) = 1.0;
        rhs(row) = -std::norm(q);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto sv = svd.singularValues();
    if (sv(2) <= 1e-10 * sv(0)) fail(Errc::degenerate_input, "points are collinear");
    const Eigen::Vector3d sol = svd.solve(rhs);
    cplx c(-0.5 * sol(0), -0.5 * sol(1));
    double r = std::sqrt(std::max(0.0, std::norm(c) - sol(2)));

    // Gauss-Newton on sum (|p - c| - r)^2.
    for (int it = 0; it < 50; ++it) {
        Eigen::MatrixXd j(static_cast<Eigen::Index>(n), 3);
        Eigen::VectorXd res(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            const cplx q = (pts[i] - mean) / scale;
            const cplx diff = q - c;
            const double dist = std::abs(diff);
            const auto row = static_cast<Eigen::Index>(i);
            res(row) = dist - r;
            if (dist > 0.0) {
                j(row, 0) = -diff.real() / dist;
                j(row, 1) = -diff.imag() / dist;
            } else {
                j(row, 0) = j(row, 1) = 0.0;
            }
            j(row, 2) = -1.0;
        }
        const Eigen::Vector3d step = j.colPivHouseholderQr().solve(-res);
        c += cplx(step(0), step(1));
        r += step(2);
        if (step.norm() <= 1e-15 * std::max(1.0, r)) break;
    }
    const cplx center = c * scale + mean;
    const double radius = std::abs(r) * scale;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (auto p : pts) {
        const double dist = std::abs(p - center);
        lo = std::min(lo, dist);
        hi = std::max(hi, dist);
    }
    return {{center, radius}, (hi - lo) / radius};
}

inline CircleFit fit_circle(const std::vector<cplx>& pts) { return fit_circle(std::span<const cplx>(pts)); }

} // namespace icd::geom
