#pragma once

// Combinatorial welding of discs along boundary cycles.
//
// A boundary parametrization assigns each vertex of a cycle a position t in
// [0,1). Two complexes are joined by a strip of triangles whose order follows
// the positions, after inserting extra vertices wherever one edge would face
// three or more vertices of the other side.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "icd/complex.hpp"
#include "icd/cookie.hpp"
#include "icd/error.hpp"
#include "icd/geom.hpp"
#include "icd/label.hpp"
#include "icd/layout.hpp"

namespace icd::weld {

using complex::Face;
using complex::Triangulation;
using geom::cplx;

// ---------------------------------------------------------------------------
// Boundary parametrizations
// ---------------------------------------------------------------------------

struct ParamEntry {
    int vertex = -1;
    double t = 0.0;
};

// Entries listed with strictly increasing t. orientation is +1 when that
// order follows the cycle direction v -> flower(v).front() of the complex
// being welded and -1 when it runs against it.
struct BoundaryParam {
    std::vector<ParamEntry> entries;
    int orientation = 1;

    [[nodiscard]] std::size_t size() const noexcept { return entries.size(); }
};

inline double frac(double x) { return x - std::floor(x); }

// Signed distance a - b folded into [-1/2, 1/2).
inline double circular_diff(double a, double b) { return frac(a - b + 0.5) - 0.5; }

inline std::vector<double> gaps(const BoundaryParam& p)
{
    std::vector<double> g;
    const std::size_t n = p.size();
    for (std::size_t k = 0; k < n; ++k) {
        const double next = k + 1 < n ? p.entries[k + 1].t : p.entries[0].t + 1.0;
        g.push_back(next - p.entries[k].t);
    }
    return g;
}

inline double median_gap(const BoundaryParam& p)
{
    auto g = gaps(p);
    if (g.empty()) fail(Errc::empty_param, "parametrization has no entries");
    std::sort(g.begin(), g.end());
    const std::size_t m = g.size() / 2;
    return g.size() % 2 ? g[m] : 0.5 * (g[m - 1] + g[m]);
}

inline void check_param(const BoundaryParam& p)
{
    if (p.entries.empty()) fail(Errc::empty_param, "parametrization has no entries");
    if (p.orientation != 1 && p.orientation != -1) fail(Errc::incompatible_orientation, "orientation must be +1 or -1");
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double t = p.entries[k].t;
        if (!(t >= 0.0 && t < 1.0)) fail(Errc::domain_error, "parameter outside [0,1)");
        if (k > 0 && !(t > p.entries[k - 1].t)) fail(Errc::domain_error, "parameters must increase strictly");
    }
}

// CSV lines "vertex,t".
inline std::string to_csv(const BoundaryParam& p)
{
    std::ostringstream out;
    out.precision(17);
    for (const auto& e : p.entries) out << e.vertex << ',' << e.t << '\n';
    return out.str();
}

// Applies a circle map t -> f(t) mod 1 (f increasing with f(t+1) = f(t)+1)
// and restores cyclic order from the smallest new parameter.
inline BoundaryParam remap(const BoundaryParam& p, const std::function<double(double)>& f)
{
    BoundaryParam out = p;
    for (auto& e : out.entries) e.t = frac(f(e.t));
    const auto lo = std::min_element(out.entries.begin(), out.entries.end(), [](auto a, auto b) { return a.t < b.t; });
    std::rotate(out.entries.begin(), lo, out.entries.end());
    check_param(out);
    return out;
}

// Same param with t = 0 moved to `vertex`.
inline BoundaryParam anchor_at(const BoundaryParam& p, int vertex)
{
    const auto it = std::find_if(p.entries.begin(), p.entries.end(), [&](auto e) { return e.vertex == vertex; });
    if (it == p.entries.end()) fail(Errc::not_a_boundary_cycle, "anchor vertex is not in the parametrization");
    const double t0 = it->t;
    return remap(p, [t0](double t) { return t - t0; });
}

// Positions of the neighbors of the ideal vertex v_B along its circle in the
// hyperbolic packing, read off from the apex angles at v_B (no layout). The
// tangency point of petal k sits at the sum of the angles of the faces before
// it. Entries follow the flower of v_B, which runs against the boundary cycle
// that v_B caps, hence orientation -1.
inline BoundaryParam fuchsian_boundary_param(const Triangulation& capped, const label::PackingLabel& l, int vb, double tol = 1e-10)
{
    if (vb < 0 || vb >= capped.vertex_count() || !capped.is_interior(vb))
        fail(Errc::boundary_vertex, "ideal vertex must be interior in the capped complex");
    if (l.geometry != label::Geometry::hyperbolic) fail(Errc::unconverged_label, "expected a hyperbolic label");
    const auto& f = capped.flower(vb);
    std::vector<double> alpha(f.size());
    double total = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
        alpha[k] = label::face_angle(l, vb, f[k], f[(k + 1) % f.size()]);
        total += alpha[k];
    }
    if (std::abs(total - geom::two_pi) > 10.0 * tol)
        fail(Errc::angle_sum_not_2pi, "angle sum at the ideal vertex is off by " + std::to_string(total - geom::two_pi));
    if (const double res = label::max_residual(capped, l); res > 10.0 * tol)
        fail(Errc::unconverged_label, "label residual " + std::to_string(res));
    BoundaryParam p;
    p.orientation = -1;
    double acc = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
        p.entries.push_back({f[k], acc / total});
        acc += alpha[k];
    }
    return p;
}

// Parametrization of the sole boundary cycle of a disc complex by the
// positions of its horocycles in the maximal packing, with `center`'s circle
// moved to the origin. Starts at the cycle's first vertex; orientation +1.
inline BoundaryParam disc_boundary_param(const Triangulation& t, int center, const label::SolveOptions& opt = {},
                                         label::SolveReport* report = nullptr)
{
    const auto cycles = complex::boundary_cycles(t);
    if (cycles.size() != 1) fail(Errc::not_a_boundary_cycle, "disc parametrization needs exactly one boundary cycle");
    if (center < 0 || center >= t.vertex_count() || !t.is_interior(center)) fail(Errc::boundary_vertex, "center must be an interior vertex");
    const auto sol = label::solve_max_hyperbolic(t, opt);
    if (!sol.report.converged) fail(Errc::unconverged_label, "maximal packing did not converge");
    if (report) *report = sol.report;
    const auto p = layout::layout(t, sol.label, {center, t.flower(center).front()}, {std::max(1e-8, 10 * opt.tol), false});
    const auto to0 = geom::disc_to_origin(layout::detail::hyperbolic_center(p.plane_circle(center)));
    BoundaryParam out;
    out.orientation = 1;
    double first = 0.0;
    for (std::size_t k = 0; k < cycles[0].vertices.size(); ++k) {
        const int v = cycles[0].vertices[k];
        const double a = std::arg(geom::mobius_apply(to0, p.plane_circle(v)).center) / geom::two_pi;
        if (k == 0) first = a;
        out.entries.push_back({v, k == 0 ? 0.0 : frac(a - first)});
    }
    check_param(out);
    return out;
}

// ---------------------------------------------------------------------------
// Caps
// ---------------------------------------------------------------------------

struct Cap {
    Triangulation complex;
    BoundaryParam param;
    int center = -1;  // -1 for the single-triangle cap
};

namespace detail {

// Round section of the unit-spacing hex lattice: points with i^2+ij+j^2 <= n.
inline cookie::CutoutResult round_hex(int n)
{
    cookie::DomainSpec d{{cookie::circle_component(0.0, std::sqrt(static_cast<double>(n)) + 0.5 + 1e-6)}, 0};
    return cookie::hex_cutout(d, 0.5);
}

inline std::vector<int> loeschian_numbers(int limit)
{
    std::vector<char> hit(static_cast<std::size_t>(limit) + 1, 0);
    for (int i = 0; i * i <= limit; ++i)
        for (int j = 0; i * i + i * j + j * j <= limit; ++j) hit[static_cast<std::size_t>(i * i + i * j + j * j)] = 1;
    std::vector<int> out;
    for (int k = 1; k <= limit; ++k)
        if (hit[static_cast<std::size_t>(k)]) out.push_back(k);
    return out;
}

inline int boundary_length(const Triangulation& t) { return t.boundary_vertex_count(); }

// Boundary length of round_hex(n) without building it: lattice points with
// i^2+ij+j^2 <= n that lie on a triangle edge bordering a missing triangle.
inline int round_hex_boundary(int n)
{
    const auto in = [n](int i, int j) { return i * i + i * j + j * j <= n; };
    const int m = static_cast<int>(std::ceil(2.0 * std::sqrt(static_cast<double>(n)))) + 2;
    int count = 0;
    // the six triangles around (i,j), as neighbor offsets in ccw order
    constexpr std::array<std::array<int, 2>, 6> ring{{{1, 0}, {0, 1}, {-1, 1}, {-1, 0}, {0, -1}, {1, -1}}};
    for (int j = -m; j <= m; ++j)
        for (int i = -m; i <= m; ++i) {
            if (!in(i, j)) continue;
            int present = 0;
            for (std::size_t k = 0; k < 6; ++k) {
                const auto a = ring[k], b = ring[(k + 1) % 6];
                if (in(i + a[0], j + a[1]) && in(i + b[0], j + b[1])) ++present;
            }
            if (present > 0 && present < 6) ++count;
        }
    return count;
}

} // namespace detail

// A closed disc cut from the hexagonal packing whose boundary length matches
// the spacing of `param` (its median gap, or `spacing_hint` when positive).
// The cap's own parametrization comes from its maximal packing centered at
// the lattice origin, so it is exactly uniform only for symmetric caps.
inline Cap make_cap(const BoundaryParam& param, double spacing_hint = 0.0, const label::SolveOptions& opt = {})
{
    check_param(param);
    if (param.size() < 3) fail(Errc::empty_param, "a cap needs at least three boundary entries");
    const double spacing = spacing_hint > 0.0 ? spacing_hint : median_gap(param);
    const int target = std::max(3, static_cast<int>(std::lround(1.0 / spacing)));
    Cap cap;
    if (target < 6) {
        cap.complex = complex::build_from_faces({{0, 1, 2}});
        cap.param.entries = {{0, 0.0}, {1, 1.0 / 3.0}, {2, 2.0 / 3.0}};
    } else {
        // boundary length grows with the radius; bisect on the Löschian list
        const double r_est = target / (2.0 * geom::pi);
        const auto ns = detail::loeschian_numbers(static_cast<int>(std::ceil(4.0 * r_est * r_est)) + 16);
        std::size_t lo = 0, hi = ns.size() - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (detail::round_hex_boundary(ns[mid]) >= target) hi = mid;
            else lo = mid + 1;
        }
        // among radii with equal boundary length take the largest (roundest)
        const int len = detail::round_hex_boundary(ns[lo]);
        std::size_t pick = lo;
        while (pick + 1 < ns.size() && detail::round_hex_boundary(ns[pick + 1]) == len) ++pick;
        if (lo > 0 && std::abs(detail::round_hex_boundary(ns[lo - 1]) - target) < std::abs(len - target)) pick = lo - 1;
        auto best = detail::round_hex(ns[pick]);
        int center = 0;
        for (std::size_t v = 1; v < best.embedding.size(); ++v)
            if (std::abs(best.embedding[v]) < std::abs(best.embedding[static_cast<std::size_t>(center)])) center = static_cast<int>(v);
        cap.complex = std::move(best.complex);
        cap.center = center;
        cap.param = disc_boundary_param(cap.complex, center, opt);
    }
    for (int v = 0; v < cap.complex.vertex_count(); ++v) cap.complex.set_marks(v, complex::mark_cap);
    return cap;
}

// ---------------------------------------------------------------------------
// Welding
// ---------------------------------------------------------------------------

// A seam vertex (merged id) and its position; positions increase along the
// left complex's boundary direction.
struct SeamVertex {
    int vertex = -1;
    double s = 0.0;
};

struct WeldRecord {
    Triangulation merged;
    std::vector<int> inserted;
    std::vector<int> left_map;   // left id -> merged id (identity)
    std::vector<int> right_map;  // right id -> merged id
    std::vector<SeamVertex> seam_left;
    std::vector<SeamVertex> seam_right;
};

namespace detail {

// Walks the param's vertices as a boundary cycle of t. Returns +1 when the
// entry order follows the cycle direction and -1 when it runs against it.
inline int entry_direction(const Triangulation& t, const BoundaryParam& p)
{
    const std::size_t n = p.size();
    bool fwd = true, bwd = true;
    for (std::size_t k = 0; k < n; ++k) {
        const int a = p.entries[k].vertex, b = p.entries[(k + 1) % n].vertex;
        if (a < 0 || a >= t.vertex_count() || t.is_interior(a)) fail(Errc::not_a_boundary_cycle, "param vertex is not on the boundary");
        if (t.flower(a).front() != b) fwd = false;
        if (t.flower(b).front() != a) bwd = false;
    }
    if (fwd) return 1;
    if (bwd) return -1;
    fail(Errc::not_a_boundary_cycle, "param vertices do not trace a boundary cycle");
}

// Chain of (vertex, position) sorted by position, starting at the smallest.
// sign maps t to s = frac(sign * t).
inline std::vector<SeamVertex> chain(const BoundaryParam& p, int sign, int offset)
{
    std::vector<SeamVertex> c;
    for (const auto& e : p.entries) c.push_back({e.vertex + offset, frac(sign * e.t)});
    std::stable_sort(c.begin(), c.end(), [](const SeamVertex& a, const SeamVertex& b) { return a.s < b.s; });
    for (std::size_t k = 1; k < c.size(); ++k)
        if (!(c[k].s > c[k - 1].s)) fail(Errc::domain_error, "seam positions collide");
    return c;
}

// Splits chain edges that face three or more vertices of the other side by
// inserting a vertex between the middle two of them, recursively. `left`
// selects the face orientation: left chains run with their complex, right
// chains against theirs.
inline std::vector<SeamVertex> refine_chain(const std::vector<SeamVertex>& c, const std::vector<SeamVertex>& other, bool left,
                                            int& next_id, std::vector<Face>& faces, std::vector<int>& inserted)
{
    // other positions unrolled over two turns for wrap-around edges
    std::vector<double> pos;
    for (int turn = 0; turn < 2; ++turn)
        for (const auto& o : other) pos.push_back(o.s + turn);
    std::vector<SeamVertex> out;
    const std::size_t n = c.size();
    struct Span {
        SeamVertex a, b;
        double bs;  // unwrapped position of b
    };
    for (std::size_t k = 0; k < n; ++k) {
        const SeamVertex a = c[k];
        const SeamVertex b = c[(k + 1) % n];
        const double bs = k + 1 < n ? b.s : b.s + 1.0;
        std::vector<Span> stack{{a, b, bs}};
        std::vector<SeamVertex> pieces;
        // depth-first, left half first, so pieces come out in order
        while (!stack.empty()) {
            const Span sp = stack.back();
            stack.pop_back();
            auto lo = std::upper_bound(pos.begin(), pos.end(), sp.a.s);
            auto hi = std::lower_bound(pos.begin(), pos.end(), sp.bs);
            const auto count = hi - lo;
            if (count < 3) {
                pieces.push_back(sp.a);
                continue;
            }
            const double mid = 0.5 * (*(lo + count / 2 - 1) + *(lo + count / 2));
            const SeamVertex x{next_id++, mid};
            inserted.push_back(x.vertex);
            if (left) faces.push_back({sp.b.vertex, sp.a.vertex, x.vertex});
            else faces.push_back({sp.a.vertex, sp.b.vertex, x.vertex});
            stack.push_back({x, sp.b, sp.bs});
            stack.push_back({sp.a, x, mid});
        }
        for (auto& pc : pieces) {
            pc.s = frac(pc.s);
            out.push_back(pc);
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const SeamVertex& x, const SeamVertex& y) { return x.s < y.s; });
    return out;
}

} // namespace detail

// Joins the boundary cycle of `left` carrying `lp` to the cycle of `right`
// carrying `rp` under the orientation-reversing identity of parameters:
// positions s = frac(o_l t) along the left cycle and s = frac(-o_r t) along the
// right cycle are matched. Left ids are kept, right ids are shifted by the
// left vertex count, inserted vertices come last and are marked inserted.
inline WeldRecord weld(const Triangulation& left, const BoundaryParam& lp, const Triangulation& right, const BoundaryParam& rp)
{
    check_param(lp);
    check_param(rp);
    if (lp.size() < 3 || rp.size() < 3) fail(Errc::empty_param, "welding needs cycles of length at least 3");
    if (detail::entry_direction(left, lp) != lp.orientation) fail(Errc::incompatible_orientation, "left param orientation does not match its cycle");
    if (detail::entry_direction(right, rp) != rp.orientation) fail(Errc::incompatible_orientation, "right param orientation does not match its cycle");

    const int nl = left.vertex_count(), nr = right.vertex_count();
    WeldRecord rec;
    rec.left_map.resize(static_cast<std::size_t>(nl));
    rec.right_map.resize(static_cast<std::size_t>(nr));
    for (int v = 0; v < nl; ++v) rec.left_map[static_cast<std::size_t>(v)] = v;
    for (int v = 0; v < nr; ++v) rec.right_map[static_cast<std::size_t>(v)] = nl + v;

    std::vector<Face> faces = left.faces();
    for (auto f : right.faces()) {
        for (int& v : f) v += nl;
        faces.push_back(f);
    }
    auto a = detail::chain(lp, lp.orientation, 0);
    auto b = detail::chain(rp, -rp.orientation, nl);
    int next_id = nl + nr;
    a = detail::refine_chain(a, b, true, next_id, faces, rec.inserted);
    b = detail::refine_chain(b, a, false, next_id, faces, rec.inserted);

    // zipper: advance whichever side's next vertex comes first (left on ties)
    const std::size_t m = a.size(), n = b.size();
    std::size_t i = 0, j = 0;
    while (i < m || j < n) {
        const double na = i + 1 < m ? a[i + 1].s : a[0].s + 1.0;
        const double nb = j + 1 < n ? b[j + 1].s : b[0].s + 1.0;
        const bool advance_a = j == n || (i < m && na <= nb);
        if (advance_a) {
            faces.push_back({a[(i + 1) % m].vertex, a[i % m].vertex, b[j % n].vertex});
            ++i;
        } else {
            faces.push_back({b[j % n].vertex, b[(j + 1) % n].vertex, a[i % m].vertex});
            ++j;
        }
    }

    std::vector<std::uint8_t> marks(static_cast<std::size_t>(next_id), complex::mark_inserted | complex::mark_cap);
    for (int v = 0; v < nl; ++v) marks[static_cast<std::size_t>(v)] = left.marks(v);
    for (int v = 0; v < nr; ++v) marks[static_cast<std::size_t>(nl + v)] = right.marks(v);
    rec.merged = complex::build_from_faces(faces, next_id, marks);
    rec.seam_left = std::move(a);
    rec.seam_right = std::move(b);
    return rec;
}

} // namespace icd::weld
