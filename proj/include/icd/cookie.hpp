#pragma once

// Hexagonal cut-out packings of planar domains.
//
// The regular hexagonal packing with circles of radius eps has centers
// eps * (2i + j, sqrt(3) j). A circle survives when its closed disc lies in
// the open domain; the surviving lattice triangles are pruned to one clean
// surface and its boundary cycles are matched to the domain's complementary
// components by winding number.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "icd/complex.hpp"
#include "icd/error.hpp"
#include "icd/geom.hpp"

namespace icd::cookie {

using complex::Face;
using complex::Triangulation;
using geom::cplx;

// ---------------------------------------------------------------------------
// Domains
// ---------------------------------------------------------------------------

// A Jordan curve: a circle when `points` is empty, otherwise a closed polygon.
struct Component {
    cplx center{};
    double radius = 0.0;
    std::vector<cplx> points;

    [[nodiscard]] bool is_circle() const noexcept { return points.empty(); }
};

// Omega is the inside of components[outer] minus the closed insides of all
// other components.
struct DomainSpec {
    std::vector<Component> components;
    int outer = 0;
};

inline Component circle_component(cplx center, double radius) { return {center, radius, {}}; }
inline Component polygon_component(std::vector<cplx> points) { return {{}, 0.0, std::move(points)}; }

namespace detail {

inline double cross(cplx a, cplx b) { return a.real() * b.imag() - a.imag() * b.real(); }

inline double segment_distance(cplx p, cplx a, cplx b)
{
    const cplx ab = b - a;
    const double len2 = std::norm(ab);
    double s = len2 > 0.0 ? ((p - a) * std::conj(ab)).real() / len2 : 0.0;
    s = std::clamp(s, 0.0, 1.0);
    return std::abs(p - (a + s * ab));
}

inline int orient(cplx a, cplx b, cplx c)
{
    const double x = cross(b - a, c - a);
    return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0);
}

inline bool on_segment(cplx a, cplx b, cplx p)
{
    return std::min(a.real(), b.real()) <= p.real() && p.real() <= std::max(a.real(), b.real()) &&
           std::min(a.imag(), b.imag()) <= p.imag() && p.imag() <= std::max(a.imag(), b.imag());
}

// Closed segments [a,b] and [c,d] share a point.
inline bool segments_meet(cplx a, cplx b, cplx c, cplx d)
{
    const int o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(a, b, c)) return true;
    if (o2 == 0 && on_segment(a, b, d)) return true;
    if (o3 == 0 && on_segment(c, d, a)) return true;
    if (o4 == 0 && on_segment(c, d, b)) return true;
    return false;
}

// Winding number of a closed polyline around p (p off the polyline).
inline int winding_number(std::span<const cplx> poly, cplx p)
{
    int w = 0;
    const std::size_t n = poly.size();
    for (std::size_t k = 0; k < n; ++k) {
        const cplx a = poly[k], b = poly[(k + 1) % n];
        if (a.imag() <= p.imag()) {
            if (b.imag() > p.imag() && cross(b - a, p - a) > 0.0) ++w;
        } else if (b.imag() <= p.imag() && cross(b - a, p - a) < 0.0) {
            --w;
        }
    }
    return w;
}

inline double signed_area(std::span<const cplx> poly)
{
    double a = 0.0;
    for (std::size_t k = 0; k < poly.size(); ++k) a += cross(poly[k], poly[(k + 1) % poly.size()]);
    return 0.5 * a;
}

} // namespace detail

inline bool inside(const Component& c, cplx p)
{
    if (c.is_circle()) return std::abs(p - c.center) < c.radius;
    return detail::winding_number(c.points, p) != 0;
}

// Distance from p to the curve itself.
inline double boundary_distance(const Component& c, cplx p)
{
    if (c.is_circle()) return std::abs(std::abs(p - c.center) - c.radius);
    double d = std::numeric_limits<double>::infinity();
    const std::size_t n = c.points.size();
    for (std::size_t k = 0; k < n; ++k) d = std::min(d, detail::segment_distance(p, c.points[k], c.points[(k + 1) % n]));
    return d;
}

// A point of the closed inside of the component.
inline cplx representative_point(const Component& c) { return c.is_circle() ? c.center : c.points.front(); }

// Closed disc (center, r) lies in the open domain. Exact tangency is
// decided as "outside" with a relative margin so rounding cannot flip it.
inline bool disc_inside(const DomainSpec& d, cplx center, double r)
{
    r *= 1.0 + 1e-9;
    for (std::size_t k = 0; k < d.components.size(); ++k) {
        const auto& c = d.components[k];
        const bool is_outer = static_cast<int>(k) == d.outer;
        if (inside(c, center) != is_outer) return false;
        if (!(boundary_distance(c, center) > r)) return false;
    }
    return true;
}

namespace detail {

inline void check_polygon(const Component& c, std::size_t id)
{
    const auto& p = c.points;
    const std::size_t n = p.size();
    if (n < 3) fail(Errc::invalid_domain, "polygon " + std::to_string(id) + " has fewer than 3 points");
    for (const auto& z : p)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) fail(Errc::invalid_domain, "non-finite polygon coordinate");
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
            const cplx a = p[i], b = p[(i + 1) % n], c2 = p[j], d = p[(j + 1) % n];
            if (adjacent) {
                // neighbors share exactly one endpoint; reject overlap along a line
                const cplx shared = j == i + 1 ? b : a;
                const cplx other_i = j == i + 1 ? a : b;
                const cplx other_j = j == i + 1 ? d : c2;
                if (orient(other_i, shared, other_j) == 0 && ((other_j - shared) * std::conj(other_i - shared)).real() > 0.0)
                    fail(Errc::invalid_domain, "polygon " + std::to_string(id) + " folds back on itself");
                continue;
            }
            if (segments_meet(a, b, c2, d)) fail(Errc::invalid_domain, "polygon " + std::to_string(id) + " is self-intersecting");
        }
    }
    if (std::abs(signed_area(p)) <= 0.0) fail(Errc::invalid_domain, "polygon " + std::to_string(id) + " has no area");
}

// The two curves cross or touch.
inline bool curves_meet(const Component& a, const Component& b)
{
    if (a.is_circle() && b.is_circle()) {
        const double d = std::abs(a.center - b.center);
        return d <= a.radius + b.radius && d >= std::abs(a.radius - b.radius);
    }
    if (!a.is_circle() && b.is_circle()) return curves_meet(b, a);
    if (a.is_circle()) {
        const auto& p = b.points;
        double near = std::numeric_limits<double>::infinity(), far = 0.0;
        for (std::size_t k = 0; k < p.size(); ++k) {
            near = std::min(near, segment_distance(a.center, p[k], p[(k + 1) % p.size()]));
            far = std::max(far, std::abs(p[k] - a.center));
        }
        return near <= a.radius && far >= a.radius;
    }
    for (std::size_t i = 0; i < a.points.size(); ++i)
        for (std::size_t j = 0; j < b.points.size(); ++j)
            if (segments_meet(a.points[i], a.points[(i + 1) % a.points.size()], b.points[j], b.points[(j + 1) % b.points.size()]))
                return true;
    return false;
}

} // namespace detail

inline void validate(const DomainSpec& d)
{
    const std::size_t n = d.components.size();
    if (n == 0) fail(Errc::invalid_domain, "domain has no components");
    if (d.outer < 0 || static_cast<std::size_t>(d.outer) >= n) fail(Errc::invalid_domain, "outer component index out of range");
    for (std::size_t k = 0; k < n; ++k) {
        const auto& c = d.components[k];
        if (c.is_circle()) {
            if (!(c.radius > 0.0) || !std::isfinite(c.radius) || !std::isfinite(c.center.real()) || !std::isfinite(c.center.imag()))
                fail(Errc::invalid_domain, "circle " + std::to_string(k) + " needs a finite positive radius");
        } else {
            detail::check_polygon(c, k);
        }
    }
    const auto& outer = d.components[static_cast<std::size_t>(d.outer)];
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j)
            if (detail::curves_meet(d.components[i], d.components[j]))
                fail(Errc::invalid_domain, "components " + std::to_string(i) + " and " + std::to_string(j) + " meet");
        if (static_cast<int>(i) == d.outer) continue;
        const cplx p = representative_point(d.components[i]);
        if (!inside(outer, p)) fail(Errc::invalid_domain, "hole " + std::to_string(i) + " lies outside the outer component");
        for (std::size_t j = 0; j < n; ++j)
            if (j != i && static_cast<int>(j) != d.outer && inside(d.components[j], p))
                fail(Errc::invalid_domain, "hole " + std::to_string(i) + " lies inside hole " + std::to_string(j));
    }
}

// ---------------------------------------------------------------------------
// Domain JSON
// ---------------------------------------------------------------------------
//
//   { "components": [ {"type":"circle","center":[x,y],"radius":r},
//                     {"type":"polygon","points":[[x,y],...]} ],
//     "holes_are_complement": true, "outer": 0 }

inline DomainSpec domain_from_json(const nlohmann::json& j)
{
    DomainSpec d;
    try {
        if (!j.is_object()) fail(Errc::invalid_domain, "domain must be a JSON object");
        if (j.contains("holes_are_complement") && !j.at("holes_are_complement").get<bool>())
            fail(Errc::invalid_domain, "only holes_are_complement = true is supported");
        for (const auto& c : j.at("components")) {
            const auto type = c.at("type").get<std::string>();
            if (type == "circle") {
                const auto& ctr = c.at("center");
                if (ctr.size() != 2) fail(Errc::invalid_domain, "circle center needs two coordinates");
                d.components.push_back(circle_component({ctr.at(0).get<double>(), ctr.at(1).get<double>()}, c.at("radius").get<double>()));
            } else if (type == "polygon") {
                std::vector<cplx> pts;
                for (const auto& p : c.at("points")) {
                    if (p.size() != 2) fail(Errc::invalid_domain, "polygon point needs two coordinates");
                    pts.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
                }
                if (pts.size() > 1 && pts.front() == pts.back()) pts.pop_back();
                d.components.push_back(polygon_component(std::move(pts)));
            } else {
                fail(Errc::invalid_domain, "unknown component type " + type);
            }
        }
        if (j.contains("outer")) d.outer = j.at("outer").get<int>();
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::invalid_domain, e.what());
    }
    validate(d);
    return d;
}

inline nlohmann::ordered_json to_json(const DomainSpec& d)
{
    nlohmann::ordered_json j;
    auto comps = nlohmann::ordered_json::array();
    for (const auto& c : d.components) {
        nlohmann::ordered_json e;
        if (c.is_circle()) {
            e["type"] = "circle";
            e["center"] = {c.center.real(), c.center.imag()};
            e["radius"] = c.radius;
        } else {
            e["type"] = "polygon";
            auto pts = nlohmann::ordered_json::array();
            for (const auto& p : c.points) pts.push_back({p.real(), p.imag()});
            e["points"] = std::move(pts);
        }
        comps.push_back(std::move(e));
    }
    j["components"] = std::move(comps);
    j["holes_are_complement"] = true;
    j["outer"] = d.outer;
    return j;
}

// Image of the domain under z -> a z + b (a != 0).
inline DomainSpec transform(const DomainSpec& d, cplx a, cplx b)
{
    DomainSpec out = d;
    for (auto& c : out.components) {
        c.center = a * c.center + b;
        c.radius *= std::abs(a);
        for (auto& p : c.points) p = a * p + b;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Pruning
// ---------------------------------------------------------------------------

// Faces plus loose edges, possibly disconnected or pinched.
struct RawComplex {
    int vertex_count = 0;
    std::vector<Face> faces;
    std::vector<std::array<int, 2>> edges;
};

struct Pruned {
    Triangulation complex;
    std::vector<cplx> embedding;
    std::vector<int> new_to_old;
};

namespace detail {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x)
    {
        while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
        return x;
    }
    void unite(int a, int b)
    {
        a = find(a);
        b = find(b);
        if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
    }
};

// Ranking of a face group: more faces, then more vertices, then lower min id.
struct GroupRank {
    std::size_t faces = 0;
    std::size_t vertices = 0;
    int min_id = std::numeric_limits<int>::max();

    [[nodiscard]] bool beats(const GroupRank& o) const
    {
        if (faces != o.faces) return faces > o.faces;
        if (vertices != o.vertices) return vertices > o.vertices;
        return min_id < o.min_id;
    }
};

inline GroupRank rank_of(const std::vector<Face>& faces, const std::vector<int>& members)
{
    GroupRank r;
    r.faces = members.size();
    std::vector<int> vs;
    for (int f : members)
        for (int v : faces[static_cast<std::size_t>(f)]) vs.push_back(v);
    std::sort(vs.begin(), vs.end());
    vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
    r.vertices = vs.size();
    r.min_id = vs.empty() ? r.min_id : vs.front();
    return r;
}

// Groups faces joined through shared edges (only edges through `pivot` when
// pivot >= 0), in order of each group's first member.
inline std::vector<std::vector<int>> edge_groups(const std::vector<Face>& faces, const std::vector<int>& subset, int pivot)
{
    UnionFind uf(subset.size());
    std::unordered_map<std::uint64_t, int> first;
    for (std::size_t k = 0; k < subset.size(); ++k) {
        const Face& f = faces[static_cast<std::size_t>(subset[k])];
        for (int e = 0; e < 3; ++e) {
            const int a = f[static_cast<std::size_t>(e)], b = f[static_cast<std::size_t>((e + 1) % 3)];
            if (pivot >= 0 && a != pivot && b != pivot) continue;
            auto [it, fresh] = first.emplace(complex::detail::undirected_key(a, b), static_cast<int>(k));
            if (!fresh) uf.unite(it->second, static_cast<int>(k));
        }
    }
    std::map<int, std::vector<int>> groups;
    for (std::size_t k = 0; k < subset.size(); ++k) groups[uf.find(static_cast<int>(k))].push_back(subset[k]);
    std::vector<std::vector<int>> out;
    for (auto& [root, g] : groups) out.push_back(std::move(g));
    return out;
}

inline std::size_t best_group(const std::vector<Face>& faces, const std::vector<std::vector<int>>& groups)
{
    std::size_t best = 0;
    GroupRank best_rank = rank_of(faces, groups.front());
    for (std::size_t g = 1; g < groups.size(); ++g) {
        const GroupRank r = rank_of(faces, groups[g]);
        if (r.beats(best_rank)) {
            best = g;
            best_rank = r;
        }
    }
    return best;
}

} // namespace detail

// Keeps the best edge-connected face component, then splits every pinch
// vertex by keeping only its best fan, repeating until the result is a
// surface. Loose edges and vertices outside the kept faces are dropped.
inline Pruned prune(const RawComplex& raw, std::span<const cplx> embedding)
{
    if (embedding.size() != static_cast<std::size_t>(raw.vertex_count)) fail(Errc::parse_error, "embedding size differs from vertex count");
    const auto& faces = raw.faces;
    std::vector<int> live(faces.size());
    std::iota(live.begin(), live.end(), 0);
    if (live.empty()) fail(Errc::empty, "no faces to prune");
    for (;;) {
        auto comps = detail::edge_groups(faces, live, -1);
        live = comps[detail::best_group(faces, comps)];
        // faces around each vertex
        std::map<int, std::vector<int>> around;
        for (int f : live)
            for (int v : faces[static_cast<std::size_t>(f)]) around[v].push_back(f);
        std::vector<char> drop(faces.size(), 0);
        bool changed = false;
        for (auto& [v, fs] : around) {
            auto fans = detail::edge_groups(faces, fs, v);
            if (fans.size() < 2) continue;
            const std::size_t keep = detail::best_group(faces, fans);
            for (std::size_t g = 0; g < fans.size(); ++g)
                if (g != keep)
                    for (int f : fans[g]) drop[static_cast<std::size_t>(f)] = 1;
            changed = true;
            break;  // fans elsewhere may change once these faces go
        }
        if (!changed) break;
        std::erase_if(live, [&](int f) { return drop[static_cast<std::size_t>(f)] != 0; });
        if (live.empty()) fail(Errc::empty, "pruning removed every face");
    }
    std::sort(live.begin(), live.end());
    Pruned out;
    std::vector<int> old_to_new(static_cast<std::size_t>(raw.vertex_count), -1);
    for (int f : live)
        for (int v : faces[static_cast<std::size_t>(f)]) old_to_new[static_cast<std::size_t>(v)] = 0;
    for (int v = 0; v < raw.vertex_count; ++v) {
        if (old_to_new[static_cast<std::size_t>(v)] < 0) continue;
        old_to_new[static_cast<std::size_t>(v)] = static_cast<int>(out.new_to_old.size());
        out.new_to_old.push_back(v);
        out.embedding.push_back(embedding[static_cast<std::size_t>(v)]);
    }
    std::vector<Face> kept;
    kept.reserve(live.size());
    for (int f : live) {
        Face g = faces[static_cast<std::size_t>(f)];
        for (int& v : g) v = old_to_new[static_cast<std::size_t>(v)];
        kept.push_back(g);
    }
    out.complex = complex::build_from_faces(kept, static_cast<int>(out.new_to_old.size()));
    return out;
}

// ---------------------------------------------------------------------------
// Cut-out
// ---------------------------------------------------------------------------

struct CutoutResult {
    Triangulation complex;
    std::vector<cplx> embedding;
    double mesh = 0.0;
    // Component index per boundary cycle (boundary_cycles order); -1 for a
    // cycle that encloses no component.
    std::vector<int> cycle_map;
};

inline cplx hex_point(int i, int j, double eps) { return {eps * (2.0 * i + j), eps * std::sqrt(3.0) * j}; }

inline std::vector<cplx> cycle_polygon(const complex::BoundaryCycle& c, std::span<const cplx> embedding)
{
    std::vector<cplx> poly;
    poly.reserve(c.vertices.size());
    for (int v : c.vertices) poly.push_back(embedding[static_cast<std::size_t>(v)]);
    return poly;
}

// Matches boundary cycles to components. The outer cycle runs
// counterclockwise; every other cycle must wind around exactly one hole.
inline std::vector<int> match_cycles(const DomainSpec& d, const Triangulation& t, std::span<const cplx> embedding)
{
    const auto cycles = complex::boundary_cycles(t);
    std::vector<int> map(cycles.size(), -1);
    std::vector<int> owner(d.components.size(), -1);
    int outer_cycle = -1;
    double outer_area = 0.0;
    for (std::size_t k = 0; k < cycles.size(); ++k) {
        const auto poly = cycle_polygon(cycles[k], embedding);
        const double area = detail::signed_area(poly);
        if (area > outer_area) {
            outer_area = area;
            outer_cycle = static_cast<int>(k);
        }
    }
    for (std::size_t k = 0; k < cycles.size(); ++k) {
        if (static_cast<int>(k) == outer_cycle) {
            map[k] = d.outer;
            owner[static_cast<std::size_t>(d.outer)] = static_cast<int>(k);
            continue;
        }
        const auto poly = cycle_polygon(cycles[k], embedding);
        for (std::size_t c = 0; c < d.components.size(); ++c) {
            if (static_cast<int>(c) == d.outer) continue;
            if (detail::winding_number(poly, representative_point(d.components[c])) == 0) continue;
            if (map[k] >= 0)
                fail(Errc::component_not_separated, "component " + std::to_string(c) + " shares a boundary cycle with component " + std::to_string(map[k]));
            map[k] = static_cast<int>(c);
            owner[c] = static_cast<int>(k);
        }
    }
    for (std::size_t c = 0; c < d.components.size(); ++c)
        if (static_cast<int>(c) != d.outer && owner[c] < 0)
            fail(Errc::component_not_separated, "component " + std::to_string(c) + " has no surrounding boundary cycle");
    return map;
}

inline CutoutResult hex_cutout(const DomainSpec& d, double eps)
{
    if (!(eps > 0.0) || !std::isfinite(eps)) fail(Errc::domain_error, "mesh must be positive");
    validate(d);
    const auto& outer = d.components[static_cast<std::size_t>(d.outer)];
    double xmin, xmax, ymin, ymax;
    if (outer.is_circle()) {
        xmin = outer.center.real() - outer.radius;
        xmax = outer.center.real() + outer.radius;
        ymin = outer.center.imag() - outer.radius;
        ymax = outer.center.imag() + outer.radius;
    } else {
        xmin = ymin = std::numeric_limits<double>::infinity();
        xmax = ymax = -xmin;
        for (const auto& p : outer.points) {
            xmin = std::min(xmin, p.real());
            xmax = std::max(xmax, p.real());
            ymin = std::min(ymin, p.imag());
            ymax = std::max(ymax, p.imag());
        }
    }
    const double row = eps * std::sqrt(3.0);
    const int j0 = static_cast<int>(std::floor(ymin / row)) - 1, j1 = static_cast<int>(std::ceil(ymax / row)) + 1;
    if (static_cast<double>(j1 - j0) * (xmax - xmin) / eps > 1e9) fail(Errc::domain_error, "mesh too fine for the domain size");

    // lattice points in row-major order
    std::map<std::pair<int, int>, int> id;
    std::vector<cplx> pts;
    for (int j = j0; j <= j1; ++j) {
        const int i0 = static_cast<int>(std::floor((xmin / eps - j) / 2.0)) - 1;
        const int i1 = static_cast<int>(std::ceil((xmax / eps - j) / 2.0)) + 1;
        for (int i = i0; i <= i1; ++i) {
            const cplx c = hex_point(i, j, eps);
            if (!disc_inside(d, c, eps)) continue;
            id[{i, j}] = static_cast<int>(pts.size());
            pts.push_back(c);
        }
    }
    RawComplex raw;
    raw.vertex_count = static_cast<int>(pts.size());
    auto find = [&](int i, int j) {
        auto it = id.find({i, j});
        return it == id.end() ? -1 : it->second;
    };
    for (const auto& [key, v] : id) {
        const auto [i, j] = key;
        const int a = find(i + 1, j), b = find(i, j + 1), c = find(i + 1, j - 1);
        if (a >= 0 && b >= 0) raw.faces.push_back({v, a, b});
        if (a >= 0 && c >= 0) raw.faces.push_back({v, c, a});
    }
    std::sort(raw.faces.begin(), raw.faces.end());

    if (raw.faces.empty()) {
        for (std::size_t c = 0; c < d.components.size(); ++c)
            if (static_cast<int>(c) != d.outer)
                fail(Errc::component_not_separated, "component " + std::to_string(c) + " has no surrounding boundary cycle");
        fail(Errc::no_interior, "no lattice triangle fits at mesh " + std::to_string(eps));
    }
    auto pruned = prune(raw, pts);
    CutoutResult out;
    out.cycle_map = match_cycles(d, pruned.complex, pruned.embedding);
    out.complex = std::move(pruned.complex);
    out.embedding = std::move(pruned.embedding);
    out.mesh = eps;
    return out;
}

// ---------------------------------------------------------------------------
// Boundary refinement
// ---------------------------------------------------------------------------

namespace detail {

// One layer outside every boundary cycle. For a boundary edge u_i -> u_{i+1}
// new vertices p_i (beside u_i) and q_i (beside the edge) are added with
// triangles (u_{i+1}, u_i, q_i), (u_i, p_i, q_i), (u_{i+1}, q_i, p_{i+1}).
struct Layer {
    std::vector<Face> faces;
    int vertex_count = 0;
    std::vector<cplx> embedding;
    std::vector<int> cycle_of;  // per vertex; -1 for old vertices
};

inline Layer add_layer(const Triangulation& t, std::span<const cplx> embedding)
{
    Layer out;
    out.faces = t.faces();
    const int n = t.vertex_count();
    out.vertex_count = n;
    out.cycle_of.assign(static_cast<std::size_t>(n), -1);
    const bool place = !embedding.empty();
    if (place) out.embedding.assign(embedding.begin(), embedding.end());
    const auto cycles = complex::boundary_cycles(t);
    for (std::size_t c = 0; c < cycles.size(); ++c) {
        const auto& u = cycles[c].vertices;
        const std::size_t m = u.size();
        const int p0 = out.vertex_count;
        const int q0 = p0 + static_cast<int>(m);
        out.vertex_count += 2 * static_cast<int>(m);
        out.cycle_of.resize(static_cast<std::size_t>(out.vertex_count), static_cast<int>(c));
        for (std::size_t i = 0; i < m; ++i) {
            const int ui = u[i], un = u[(i + 1) % m];
            const int pi = p0 + static_cast<int>(i), pn = p0 + static_cast<int>((i + 1) % m);
            const int qi = q0 + static_cast<int>(i);
            out.faces.push_back({un, ui, qi});
            out.faces.push_back({ui, pi, qi});
            out.faces.push_back({un, qi, pn});
        }
        if (!place) continue;
        // outward normals: the complex lies to the left of each boundary edge
        std::vector<cplx> edge_n(m);
        double spacing = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const cplx e = embedding[static_cast<std::size_t>(u[(i + 1) % m])] - embedding[static_cast<std::size_t>(u[i])];
            spacing += std::abs(e);
            edge_n[i] = std::abs(e) > 0.0 ? cplx(e.imag(), -e.real()) / std::abs(e) : cplx(0.0);
        }
        const double h = 0.25 * std::sqrt(3.0) * spacing / static_cast<double>(m);
        for (std::size_t i = 0; i < m; ++i) {
            cplx nv = edge_n[i] + edge_n[(i + m - 1) % m];
            nv = std::abs(nv) > 1e-12 ? nv / std::abs(nv) : edge_n[i];
            out.embedding.push_back(embedding[static_cast<std::size_t>(u[i])] + h * nv);
        }
        for (std::size_t i = 0; i < m; ++i) {
            const cplx a = embedding[static_cast<std::size_t>(u[i])], b = embedding[static_cast<std::size_t>(u[(i + 1) % m])];
            out.embedding.push_back(0.5 * (a + b) + h * edge_n[i]);
        }
    }
    return out;
}

} // namespace detail

// Adds `layers` rings of vertices outside every boundary cycle; each layer
// doubles the cycle length. Old boundary vertices gain three neighbors.
inline Triangulation boundary_refine(const Triangulation& t, int layers)
{
    if (layers < 0) fail(Errc::domain_error, "layers must be non-negative");
    Triangulation cur = t;
    for (int k = 0; k < layers; ++k) {
        const auto layer = detail::add_layer(cur, {});
        cur = complex::build_from_faces(layer.faces, layer.vertex_count);
    }
    return cur;
}

// boundary_refine applied to a cut-out, carrying the embedding and the
// cycle-to-component map along.
inline CutoutResult refine_cutout(const CutoutResult& in, int layers)
{
    if (layers < 0) fail(Errc::domain_error, "layers must be non-negative");
    CutoutResult cur = in;
    for (int k = 0; k < layers; ++k) {
        const auto layer = detail::add_layer(cur.complex, cur.embedding);
        Triangulation next = complex::build_from_faces(layer.faces, layer.vertex_count);
        std::vector<int> map;
        for (const auto& c : complex::boundary_cycles(next))
            map.push_back(cur.cycle_map.at(static_cast<std::size_t>(layer.cycle_of.at(static_cast<std::size_t>(c.vertices.front())))));
        cur.complex = std::move(next);
        cur.embedding = layer.embedding;
        cur.cycle_map = std::move(map);
    }
    return cur;
}

} // namespace icd::cookie
