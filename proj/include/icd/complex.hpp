#pragma once

// Combinatorial triangulations stored as ordered vertex flowers.
//
// A flower lists the neighbors of a vertex in counterclockwise order. For an
// interior vertex it is a closed cycle (first neighbor is not repeated); for a
// boundary vertex it is an open chain whose first and last entries are the
// boundary neighbors. Face (v, f[k], f[k+1]) is positively oriented for every
// consecutive pair. Interior flowers are stored rotated so that the smallest
// neighbor id comes first; boundary flowers have a forced start.

#include <algorithm>
#include <array>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "icd/error.hpp"

namespace icd::complex {

using Face = std::array<int, 3>;

enum Mark : std::uint8_t {
    mark_none = 0,
    mark_original = 1,
    mark_ideal = 2,
    mark_cap = 4,
    mark_inserted = 8,
};

namespace detail {

constexpr std::uint64_t edge_key(int a, int b) noexcept
{
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
}

constexpr std::uint64_t undirected_key(int a, int b) noexcept
{
    return a < b ? edge_key(a, b) : edge_key(b, a);
}

inline void rotate_to_min(std::vector<int>& cycle)
{
    if (cycle.empty()) return;
    auto it = std::min_element(cycle.begin(), cycle.end());
    std::rotate(cycle.begin(), it, cycle.end());
}

} // namespace detail

class Triangulation {
public:
    Triangulation() = default;

    // Takes ownership of raw flower data. Interior flowers are canonicalized;
    // no topological validation is performed here (see validate()).
    Triangulation(std::vector<std::vector<int>> flowers, std::vector<char> interior,
                  std::vector<std::uint8_t> marks = {})
        : flowers_(std::move(flowers)), interior_(std::move(interior)), marks_(std::move(marks))
    {
        if (marks_.empty()) marks_.assign(flowers_.size(), mark_original);
        if (interior_.size() != flowers_.size() || marks_.size() != flowers_.size())
            fail(Errc::parse_error, "flower, interior and mark arrays differ in length");
        for (std::size_t v = 0; v < flowers_.size(); ++v)
            if (interior_[v]) detail::rotate_to_min(flowers_[v]);
    }

    [[nodiscard]] int vertex_count() const noexcept { return static_cast<int>(flowers_.size()); }
    [[nodiscard]] const std::vector<int>& flower(int v) const { return flowers_.at(static_cast<std::size_t>(v)); }
    [[nodiscard]] bool is_interior(int v) const { return interior_.at(static_cast<std::size_t>(v)) != 0; }
    [[nodiscard]] bool is_boundary(int v) const { return !is_interior(v); }
    [[nodiscard]] int degree(int v) const { return static_cast<int>(flower(v).size()); }

    [[nodiscard]] std::uint8_t marks(int v) const { return marks_.at(static_cast<std::size_t>(v)); }
    [[nodiscard]] bool has_mark(int v, Mark m) const { return (marks(v) & m) != 0; }
    void set_marks(int v, std::uint8_t m) { marks_.at(static_cast<std::size_t>(v)) = m; }

    [[nodiscard]] int face_count() const noexcept
    {
        long total = 0;
        for (std::size_t v = 0; v < flowers_.size(); ++v)
            total += static_cast<long>(flowers_[v].size()) - (interior_[v] ? 0 : 1);
        return static_cast<int>(total / 3);
    }

    [[nodiscard]] int edge_count() const noexcept
    {
        long total = 0;
        for (const auto& f : flowers_) total += static_cast<long>(f.size());
        return static_cast<int>(total / 2);
    }

    [[nodiscard]] int boundary_vertex_count() const noexcept
    {
        return static_cast<int>(std::count(interior_.begin(), interior_.end(), char{0}));
    }

    // On a surface each boundary cycle has as many edges as vertices.
    [[nodiscard]] int boundary_edge_count() const noexcept { return boundary_vertex_count(); }

    [[nodiscard]] int euler_characteristic() const noexcept
    {
        return vertex_count() - edge_count() + face_count();
    }

    [[nodiscard]] bool has_boundary() const noexcept { return boundary_vertex_count() > 0; }

    [[nodiscard]] int max_degree() const noexcept
    {
        int d = 0;
        for (const auto& f : flowers_) d = std::max(d, static_cast<int>(f.size()));
        return d;
    }

    [[nodiscard]] int interior_count() const noexcept { return vertex_count() - boundary_vertex_count(); }

    // Index of u in v's flower, or -1.
    [[nodiscard]] int flower_index(int v, int u) const
    {
        const auto& f = flower(v);
        auto it = std::find(f.begin(), f.end(), u);
        return it == f.end() ? -1 : static_cast<int>(it - f.begin());
    }

    [[nodiscard]] bool adjacent(int v, int u) const { return flower_index(v, u) >= 0; }

    // True iff (v, a, b) is a positively oriented face.
    [[nodiscard]] bool has_face(int v, int a, int b) const
    {
        const auto& f = flower(v);
        const int k = flower_index(v, a);
        if (k < 0) return false;
        const auto n = static_cast<int>(f.size());
        if (k + 1 < n) return f[static_cast<std::size_t>(k + 1)] == b;
        return is_interior(v) && f.front() == b;
    }

    // Each face once, listed from its smallest vertex; ordered by that vertex,
    // then by flower position.
    [[nodiscard]] std::vector<Face> faces() const
    {
        std::vector<Face> out;
        out.reserve(static_cast<std::size_t>(face_count()));
        for (int v = 0; v < vertex_count(); ++v) {
            const auto& f = flower(v);
            const auto n = f.size();
            const std::size_t pairs = is_interior(v) ? n : (n == 0 ? 0 : n - 1);
            for (std::size_t k = 0; k < pairs; ++k) {
                const int a = f[k];
                const int b = f[(k + 1) % n];
                if (v < a && v < b) out.push_back({v, a, b});
            }
        }
        return out;
    }

    friend bool operator==(const Triangulation& x, const Triangulation& y)
    {
        return x.flowers_ == y.flowers_ && x.interior_ == y.interior_;
    }

private:
    std::vector<std::vector<int>> flowers_;
    std::vector<char> interior_;
    std::vector<std::uint8_t> marks_;
};

struct BoundaryCycle {
    std::vector<int> vertices;
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace detail {

inline void check_connected(const Triangulation& t)
{
    const int n = t.vertex_count();
    if (n == 0) return;
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::deque<int> queue{0};
    seen[0] = 1;
    int count = 1;
    while (!queue.empty()) {
        const int v = queue.front();
        queue.pop_front();
        for (int u : t.flower(v)) {
            if (!seen[static_cast<std::size_t>(u)]) {
                seen[static_cast<std::size_t>(u)] = 1;
                ++count;
                queue.push_back(u);
            }
        }
    }
    if (count != n) fail(Errc::disconnected, "1-skeleton has " + std::to_string(n - count) + " unreachable vertices");
}

} // namespace detail

// Checks orientation consistency, manifoldness and connectedness of raw
// flower data. Throws on the first violation.
inline void validate(const Triangulation& t)
{
    const int n = t.vertex_count();
    for (int v = 0; v < n; ++v) {
        const auto& f = t.flower(v);
        if (f.empty()) fail(Errc::disconnected, "vertex " + std::to_string(v) + " has no neighbors");
        if (t.is_interior(v) && f.size() < 3)
            fail(Errc::non_manifold, "interior vertex " + std::to_string(v) + " has degree < 3");
        if (!t.is_interior(v) && f.size() < 2)
            fail(Errc::non_manifold, "boundary vertex " + std::to_string(v) + " has degree < 2");
        std::unordered_set<int> distinct(f.begin(), f.end());
        if (distinct.size() != f.size() || distinct.count(v))
            fail(Errc::non_manifold, "flower of " + std::to_string(v) + " repeats a neighbor");
        for (int u : f) {
            if (u < 0 || u >= n) fail(Errc::parse_error, "neighbor id out of range");
            if (!t.adjacent(u, v)) fail(Errc::inconsistent_orientation, "edge " + std::to_string(v) + "-" + std::to_string(u) + " is not symmetric");
        }
        const std::size_t pairs = t.is_interior(v) ? f.size() : f.size() - 1;
        for (std::size_t k = 0; k < pairs; ++k) {
            const int a = f[k];
            const int b = f[(k + 1) % f.size()];
            if (!t.has_face(a, b, v) || !t.has_face(b, v, a))
                fail(Errc::inconsistent_orientation,
                     "face (" + std::to_string(v) + "," + std::to_string(a) + "," + std::to_string(b) + ") is not seen consistently");
        }
    }
    detail::check_connected(t);
}

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

// Builds flowers from positively oriented triangles. vertex_count < 0 means
// "max id + 1"; every id in range must appear in some face.
inline Triangulation build_from_faces(std::span<const Face> faces, int vertex_count = -1,
                                      std::span<const std::uint8_t> marks = {})
{
    int n = vertex_count;
    if (n < 0) {
        n = 0;
        for (const auto& f : faces)
            for (int v : f) n = std::max(n, v + 1);
    }
    std::unordered_map<std::uint64_t, int> undirected;
    std::unordered_set<std::uint64_t> directed;
    undirected.reserve(faces.size() * 3);
    directed.reserve(faces.size() * 3);
    std::vector<std::vector<std::pair<int, int>>> links(static_cast<std::size_t>(n));
    for (const auto& f : faces) {
        for (int v : f)
            if (v < 0 || v >= n) fail(Errc::parse_error, "face vertex id out of range");
        if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) fail(Errc::non_manifold, "degenerate face");
        for (int k = 0; k < 3; ++k) {
            const int a = f[static_cast<std::size_t>(k)];
            const int b = f[static_cast<std::size_t>((k + 1) % 3)];
            const int c = f[static_cast<std::size_t>((k + 2) % 3)];
            if (++undirected[detail::undirected_key(a, b)] > 2)
                fail(Errc::non_manifold, "edge " + std::to_string(a) + "-" + std::to_string(b) + " lies in more than two faces");
            links[static_cast<std::size_t>(a)].emplace_back(b, c);
        }
    }
    for (const auto& f : faces) {
        for (int k = 0; k < 3; ++k) {
            const int a = f[static_cast<std::size_t>(k)];
            const int b = f[static_cast<std::size_t>((k + 1) % 3)];
            if (!directed.insert(detail::edge_key(a, b)).second)
                fail(Errc::inconsistent_orientation, "directed edge " + std::to_string(a) + "->" + std::to_string(b) + " used twice");
        }
    }

    std::vector<std::vector<int>> flowers(static_cast<std::size_t>(n));
    std::vector<char> interior(static_cast<std::size_t>(n), 0);
    for (int v = 0; v < n; ++v) {
        auto& l = links[static_cast<std::size_t>(v)];
        if (l.empty()) fail(Errc::disconnected, "vertex " + std::to_string(v) + " lies in no face");
        std::unordered_map<int, int> next;
        std::unordered_set<int> targets;
        for (auto [a, b] : l) {
            next[a] = b;
            targets.insert(b);
        }
        std::vector<int> starts;
        for (auto [a, b] : l)
            if (!targets.count(a)) starts.push_back(a);
        if (starts.size() > 1) fail(Errc::non_manifold, "vertex " + std::to_string(v) + " is a pinch point");
        auto& flower = flowers[static_cast<std::size_t>(v)];
        if (starts.empty()) {
            int start = std::numeric_limits<int>::max();
            for (auto [a, b] : l) start = std::min(start, a);
            int cur = start;
            do {
                flower.push_back(cur);
                cur = next.at(cur);
            } while (cur != start && flower.size() <= l.size());
            if (flower.size() != l.size()) fail(Errc::non_manifold, "vertex " + std::to_string(v) + " has several fans");
            interior[static_cast<std::size_t>(v)] = 1;
        } else {
            int cur = starts.front();
            flower.push_back(cur);
            while (next.count(cur) && flower.size() <= l.size()) {
                cur = next.at(cur);
                flower.push_back(cur);
            }
            if (flower.size() != l.size() + 1) fail(Errc::non_manifold, "vertex " + std::to_string(v) + " has several fans");
        }
    }
    std::vector<std::uint8_t> m(marks.begin(), marks.end());
    if (m.empty()) m.assign(static_cast<std::size_t>(n), mark_original);
    Triangulation t(std::move(flowers), std::move(interior), std::move(m));
    detail::check_connected(t);
    return t;
}

inline Triangulation build_from_faces(std::initializer_list<Face> faces)
{
    std::vector<Face> f(faces);
    return build_from_faces(std::span<const Face>(f));
}

// ---------------------------------------------------------------------------
// Boundary handling
// ---------------------------------------------------------------------------

// One positively oriented cycle per boundary component, each starting at its
// smallest vertex id; cycles ordered by that id.
inline std::vector<BoundaryCycle> boundary_cycles(const Triangulation& t)
{
    std::vector<BoundaryCycle> out;
    std::vector<char> seen(static_cast<std::size_t>(t.vertex_count()), 0);
    for (int v = 0; v < t.vertex_count(); ++v) {
        if (t.is_interior(v) || seen[static_cast<std::size_t>(v)]) continue;
        BoundaryCycle c;
        int cur = v;
        do {
            seen[static_cast<std::size_t>(cur)] = 1;
            c.vertices.push_back(cur);
            cur = t.flower(cur).front();
        } while (cur != v && c.vertices.size() <= static_cast<std::size_t>(t.vertex_count()));
        out.push_back(std::move(c));
    }
    return out;
}

inline bool is_boundary_cycle(const Triangulation& t, const BoundaryCycle& c)
{
    const auto& vs = c.vertices;
    if (vs.size() < 2) return false;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        const int v = vs[i];
        if (v < 0 || v >= t.vertex_count() || t.is_interior(v)) return false;
        if (t.flower(v).front() != vs[(i + 1) % vs.size()]) return false;
    }
    return true;
}

// Cones the boundary cycle off with a new vertex (id = old vertex count),
// tagged as ideal. Other boundary cycles are untouched.
inline Triangulation add_ideal_vertex(const Triangulation& t, const BoundaryCycle& cycle)
{
    if (!is_boundary_cycle(t, cycle)) fail(Errc::not_a_boundary_cycle, "cycle does not follow the boundary");
    if (cycle.vertices.size() < 3) fail(Errc::not_a_boundary_cycle, "cycle shorter than 3 cannot be capped");
    const int ideal = t.vertex_count();
    std::vector<std::vector<int>> flowers;
    std::vector<char> interior;
    std::vector<std::uint8_t> marks;
    flowers.reserve(static_cast<std::size_t>(ideal + 1));
    for (int v = 0; v < ideal; ++v) {
        flowers.push_back(t.flower(v));
        interior.push_back(t.is_interior(v) ? 1 : 0);
        marks.push_back(t.marks(v));
    }
    for (int v : cycle.vertices) {
        flowers[static_cast<std::size_t>(v)].push_back(ideal);
        interior[static_cast<std::size_t>(v)] = 1;
    }
    flowers.emplace_back(cycle.vertices.rbegin(), cycle.vertices.rend());
    interior.push_back(1);
    marks.push_back(mark_ideal);
    return Triangulation(std::move(flowers), std::move(interior), std::move(marks));
}

inline bool is_sphere(const Triangulation& t)
{
    return t.vertex_count() > 0 && !t.has_boundary() && t.euler_characteristic() == 2;
}

// ---------------------------------------------------------------------------
// Subcomplexes
// ---------------------------------------------------------------------------

struct Subcomplex {
    Triangulation complex;
    std::vector<int> old_to_new;  // -1 for dropped vertices
    std::vector<int> new_to_old;
};

// Complex spanned by the faces whose three vertices are all kept; ids are
// compacted in ascending old order. Kept vertices that lose every face are
// dropped as well.
inline Subcomplex induced_subcomplex(const Triangulation& t, std::span<const char> keep)
{
    const auto all = t.faces();
    std::vector<Face> kept;
    std::vector<char> used(static_cast<std::size_t>(t.vertex_count()), 0);
    for (const auto& f : all) {
        if (keep[static_cast<std::size_t>(f[0])] && keep[static_cast<std::size_t>(f[1])] && keep[static_cast<std::size_t>(f[2])]) {
            kept.push_back(f);
            for (int v : f) used[static_cast<std::size_t>(v)] = 1;
        }
    }
    Subcomplex out;
    out.old_to_new.assign(static_cast<std::size_t>(t.vertex_count()), -1);
    for (int v = 0; v < t.vertex_count(); ++v) {
        if (used[static_cast<std::size_t>(v)]) {
            out.old_to_new[static_cast<std::size_t>(v)] = static_cast<int>(out.new_to_old.size());
            out.new_to_old.push_back(v);
        }
    }
    if (out.new_to_old.empty()) fail(Errc::empty, "subcomplex has no faces");
    for (auto& f : kept)
        for (int& v : f) v = out.old_to_new[static_cast<std::size_t>(v)];
    std::vector<std::uint8_t> marks;
    for (int v : out.new_to_old) marks.push_back(t.marks(v));
    out.complex = build_from_faces(kept, static_cast<int>(out.new_to_old.size()), marks);
    return out;
}

inline Subcomplex remove_vertices(const Triangulation& t, std::span<const int> removed)
{
    std::vector<char> keep(static_cast<std::size_t>(t.vertex_count()), 1);
    for (int v : removed) keep.at(static_cast<std::size_t>(v)) = 0;
    return induced_subcomplex(t, keep);
}

// Graph distance from the nearest source vertex; -1 where unreachable.
inline std::vector<int> graph_distance(const Triangulation& t, std::span<const int> sources)
{
    std::vector<int> dist(static_cast<std::size_t>(t.vertex_count()), -1);
    std::deque<int> queue;
    for (int s : sources) {
        if (dist[static_cast<std::size_t>(s)] < 0) {
            dist[static_cast<std::size_t>(s)] = 0;
            queue.push_back(s);
        }
    }
    while (!queue.empty()) {
        const int v = queue.front();
        queue.pop_front();
        for (int u : t.flower(v)) {
            if (dist[static_cast<std::size_t>(u)] < 0) {
                dist[static_cast<std::size_t>(u)] = dist[static_cast<std::size_t>(v)] + 1;
                queue.push_back(u);
            }
        }
    }
    return dist;
}

// Combinatorial depth from the boundary (boundary vertices have depth 0).
inline std::vector<int> boundary_depth(const Triangulation& t)
{
    std::vector<int> sources;
    for (int v = 0; v < t.vertex_count(); ++v)
        if (t.is_boundary(v)) sources.push_back(v);
    return graph_distance(t, sources);
}

// ---------------------------------------------------------------------------
// Directed-edge lookup for face traversal
// ---------------------------------------------------------------------------

class FaceIndex {
public:
    explicit FaceIndex(const Triangulation& t) : faces_(t.faces())
    {
        by_edge_.reserve(faces_.size() * 3);
        for (std::size_t i = 0; i < faces_.size(); ++i) {
            const auto& f = faces_[i];
            for (int k = 0; k < 3; ++k)
                by_edge_[detail::edge_key(f[static_cast<std::size_t>(k)], f[static_cast<std::size_t>((k + 1) % 3)])] = static_cast<int>(i);
        }
    }

    [[nodiscard]] const std::vector<Face>& faces() const noexcept { return faces_; }

    // Face containing the directed edge a->b, or -1.
    [[nodiscard]] int face_of(int a, int b) const
    {
        auto it = by_edge_.find(detail::edge_key(a, b));
        return it == by_edge_.end() ? -1 : it->second;
    }

private:
    std::vector<Face> faces_;
    std::unordered_map<std::uint64_t, int> by_edge_;
};

// ---------------------------------------------------------------------------
// Text serialization
// ---------------------------------------------------------------------------
//
//   V <n>
//   F <id> <interior|boundary> <neighbor ids in flower order>

inline std::string to_text(const Triangulation& t)
{
    std::string out = "V " + std::to_string(t.vertex_count()) + "\n";
    for (int v = 0; v < t.vertex_count(); ++v) {
        out += "F " + std::to_string(v) + (t.is_interior(v) ? " interior" : " boundary");
        for (int u : t.flower(v)) out += " " + std::to_string(u);
        out += "\n";
    }
    return out;
}

inline Triangulation from_text(const std::string& text)
{
    std::istringstream in(text);
    std::string tag;
    int n = -1;
    if (!(in >> tag >> n) || tag != "V" || n < 0) fail(Errc::parse_error, "expected 'V <n>' header");
    std::vector<std::vector<int>> flowers(static_cast<std::size_t>(n));
    std::vector<char> interior(static_cast<std::size_t>(n), 0);
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        int id = -1;
        std::string kind;
        if (!(ls >> tag >> id >> kind) || tag != "F" || id < 0 || id >= n)
            fail(Errc::parse_error, "bad flower line: " + line);
        if (kind != "interior" && kind != "boundary") fail(Errc::parse_error, "bad vertex kind: " + kind);
        if (seen[static_cast<std::size_t>(id)]) fail(Errc::parse_error, "duplicate flower for vertex " + std::to_string(id));
        seen[static_cast<std::size_t>(id)] = 1;
        interior[static_cast<std::size_t>(id)] = kind == "interior" ? 1 : 0;
        int u = 0;
        while (ls >> u) flowers[static_cast<std::size_t>(id)].push_back(u);
        if (!ls.eof()) fail(Errc::parse_error, "non-integer neighbor in: " + line);
    }
    if (std::find(seen.begin(), seen.end(), char{0}) != seen.end()) fail(Errc::parse_error, "missing flower lines");
    for (int v = 0; v < n; ++v) {
        if (!interior[static_cast<std::size_t>(v)]) continue;
        auto& f = flowers[static_cast<std::size_t>(v)];
        if (!f.empty() && f.front() != *std::min_element(f.begin(), f.end()))
            fail(Errc::parse_error, "interior flower of " + std::to_string(v) + " is not in canonical rotation");
    }
    Triangulation t(std::move(flowers), std::move(interior));
    validate(t);
    return t;
}

} // namespace icd::complex
