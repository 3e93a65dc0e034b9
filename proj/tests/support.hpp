#pragma once

// Small complexes used across the test suite.

#include <cmath>
#include <map>
#include <random>
#include <utility>
#include <vector>

#include "icd/complex.hpp"

namespace icd::test {

using complex::Face;
using complex::Triangulation;

// Hub 0 with petals 1..n.
inline Triangulation n_flower(int n)
{
    std::vector<Face> f;
    for (int k = 1; k <= n; ++k) f.push_back({0, k, k % n + 1});
    return complex::build_from_faces(f);
}

inline Triangulation single_triangle() { return complex::build_from_faces({{0, 1, 2}}); }

inline Triangulation tetrahedron() { return complex::build_from_faces({{0, 1, 2}, {0, 2, 3}, {0, 3, 1}, {1, 3, 2}}); }

// Vertices +x,-x,+y,-y,+z,-z = 0..5, faces oriented outward.
inline Triangulation octahedron()
{
    std::vector<Face> f;
    for (int sx : {1, -1})
        for (int sy : {1, -1})
            for (int sz : {1, -1}) {
                const int x = sx > 0 ? 0 : 1, y = sy > 0 ? 2 : 3, z = sz > 0 ? 4 : 5;
                // (x,y,z) is outward-ccw when sx*sy*sz > 0
                if (sx * sy * sz > 0) f.push_back({x, y, z});
                else f.push_back({x, z, y});
            }
    return complex::build_from_faces(f);
}

// Hex lattice disc: lattice points within hex distance `rings` of the origin,
// ids assigned ring by ring (hub 0, first ring 1..6, ...).
inline Triangulation hex_disc(int rings)
{
    auto hex_dist = [](int i, int j) { return (std::abs(i) + std::abs(j) + std::abs(i + j)) / 2; };
    std::map<std::pair<int, int>, int> id;
    std::vector<std::pair<int, int>> pts;
    for (int ring = 0; ring <= rings; ++ring)
        for (int j = -rings; j <= rings; ++j)
            for (int i = -rings; i <= rings; ++i)
                if (hex_dist(i, j) == ring) pts.emplace_back(i, j);
    // order each ring by angle for readable ids
    std::stable_sort(pts.begin(), pts.end(), [&](auto a, auto b) {
        const int ra = hex_dist(a.first, a.second), rb = hex_dist(b.first, b.second);
        if (ra != rb) return ra < rb;
        const double ta = std::atan2(std::sqrt(3.0) * a.second, 2.0 * a.first + a.second);
        const double tb = std::atan2(std::sqrt(3.0) * b.second, 2.0 * b.first + b.second);
        return ta < tb;
    });
    for (std::size_t k = 0; k < pts.size(); ++k) id[pts[k]] = static_cast<int>(k);
    std::vector<Face> faces;
    auto has = [&](int a, int b) { return id.count({a, b}) > 0; };
    for (int j = -rings - 1; j <= rings; ++j)
        for (int i = -rings - 1; i <= rings; ++i) {
            if (has(i, j) && has(i + 1, j) && has(i, j + 1)) faces.push_back({id[{i, j}], id[{i + 1, j}], id[{i, j + 1}]});
            if (has(i + 1, j) && has(i + 1, j + 1) && has(i, j + 1))
                faces.push_back({id[{i + 1, j}], id[{i + 1, j + 1}], id[{i, j + 1}]});
        }
    return complex::build_from_faces(faces);
}

// Hex disc with its hub removed: an annulus with boundary cycles 6 and 6*rings.
inline Triangulation hex_band(int rings)
{
    const auto d = hex_disc(rings);
    const std::vector<int> hub{0};
    return complex::remove_vertices(d, hub).complex;
}

// Random disc complex grown from one triangle by face splits and boundary ears.
inline Triangulation random_disc(std::mt19937& rng, int steps)
{
    std::vector<Face> faces{{0, 1, 2}};
    int n = 3;
    for (int s = 0; s < steps; ++s) {
        const auto t = complex::build_from_faces(faces);
        std::uniform_int_distribution<int> pick(0, 2);
        const int kind = pick(rng);
        if (kind == 0) {
            std::uniform_int_distribution<std::size_t> fp(0, faces.size() - 1);
            const std::size_t k = fp(rng);
            const Face f = faces[k];
            faces[k] = {f[0], f[1], n};
            faces.push_back({f[1], f[2], n});
            faces.push_back({f[2], f[0], n});
            ++n;
        } else {
            const auto cycles = complex::boundary_cycles(t);
            const auto& c = cycles.front().vertices;
            std::uniform_int_distribution<std::size_t> ep(0, c.size() - 1);
            const std::size_t k = ep(rng);
            const int a = c[k], b = c[(k + 1) % c.size()];
            // the boundary edge a->b is traversed b->a by its face; the ear uses a->b
            faces.push_back({a, n, b});
            ++n;
        }
    }
    return complex::build_from_faces(faces);
}

} // namespace icd::test
