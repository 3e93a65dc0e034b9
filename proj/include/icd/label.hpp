#pragma once

// Packing-label solvers: Gauss-Seidel radius iteration with the
// uniform-neighbor update, Euclidean and hyperbolic, plus an optional
// Newton accelerator.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "icd/complex.hpp"
#include "icd/error.hpp"
#include "icd/geom.hpp"

namespace icd::label {

using complex::Triangulation;

enum class Geometry { euclidean, hyperbolic };

// Euclidean radii, or hyperbolic decays exp(-2h) (0 = horocycle).
struct PackingLabel {
    Geometry geometry = Geometry::euclidean;
    std::vector<double> radii;
};

struct SolveReport {
    long iterations = 0;
    double final_residual = 0.0;
    bool converged = false;
};

struct SolveOptions {
    double tol = 1e-10;
    long max_iter = 1'000'000;
    // Newton steps on log-radii after a short warm-up; falls back to sweeps.
    bool accelerate = false;
    // Initial value for interior vertices; <= 0 selects the default.
    double initial = 0.0;
};

struct Solution {
    PackingLabel label;
    SolveReport report;
};

inline double face_angle(const PackingLabel& l, int v, int u, int w)
{
    const auto& r = l.radii;
    const auto at = [&](int i) { return r[static_cast<std::size_t>(i)]; };
    if (l.geometry == Geometry::euclidean) return geom::euclidean_angle(at(v), at(u), at(w));
    return geom::hyperbolic_angle(at(v), at(u), at(w));
}

namespace detail {

inline double flower_angle_sum(const Triangulation& t, const PackingLabel& l, int v)
{
    const auto& f = t.flower(v);
    const std::size_t n = f.size();
    double sum = 0.0;
    if (l.geometry == Geometry::euclidean) {
        const double rv = l.radii[static_cast<std::size_t>(v)];
        for (std::size_t k = 0; k < n; ++k) {
            const double ru = l.radii[static_cast<std::size_t>(f[k])];
            const double rw = l.radii[static_cast<std::size_t>(f[(k + 1) % n])];
            sum += 2.0 * std::atan2(std::sqrt(ru * rw), std::sqrt(rv * (rv + ru + rw)));
        }
    } else {
        const double dv = l.radii[static_cast<std::size_t>(v)];
        for (std::size_t k = 0; k < n; ++k) {
            const double du = l.radii[static_cast<std::size_t>(f[k])];
            const double dw = l.radii[static_cast<std::size_t>(f[(k + 1) % n])];
            sum += 2.0 * std::atan2(std::sqrt(dv * (1.0 - du) * (1.0 - dw)), std::sqrt((1.0 - dv) * (1.0 - dv * du * dw)));
        }
    }
    return sum;
}

} // namespace detail

// Sum of apex angles around an interior vertex.
inline double angle_sum(const Triangulation& t, const PackingLabel& l, int v)
{
    if (!t.is_interior(v)) fail(Errc::boundary_vertex, "angle sum requested at boundary vertex " + std::to_string(v));
    const auto& f = t.flower(v);
    double sum = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) sum += face_angle(l, v, f[k], f[(k + 1) % f.size()]);
    return sum;
}

// max |angle_sum - 2 pi| over interior vertices.
inline double max_residual(const Triangulation& t, const PackingLabel& l)
{
    double res = 0.0;
    for (int v = 0; v < t.vertex_count(); ++v)
        if (t.is_interior(v)) res = std::max(res, std::abs(detail::flower_angle_sum(t, l, v) - geom::two_pi));
    return res;
}

namespace detail {

// Uniform-neighbor update: the radius at which a k-flower of equal petals,
// chosen to reproduce the current angle sum, would close up exactly.
inline double uniform_update(Geometry g, double current, double theta, int k)
{
    const double beta = std::sin(theta / (2.0 * k));
    const double delta = std::sin(geom::pi / k);
    if (g == Geometry::euclidean) {
        const double petal = beta * current / (1.0 - beta);
        return petal * (1.0 - delta) / delta;
    }
    const double s = std::sqrt(current);
    const double x = std::max(0.0, (s - beta) / (s * (1.0 - beta * s)));
    const double s_new = 2.0 * delta / ((1.0 - x) + std::sqrt((1.0 - x) * (1.0 - x) + 4.0 * delta * delta * x));
    return s_new * s_new;
}

// One ascending Gauss-Seidel sweep; returns max residual seen before updates.
inline double sweep(const Triangulation& t, PackingLabel& l, std::span<const int> interior)
{
    double seen = 0.0;
    for (int v : interior) {
        const double theta = flower_angle_sum(t, l, v);
        seen = std::max(seen, std::abs(theta - geom::two_pi));
        auto& r = l.radii[static_cast<std::size_t>(v)];
        const double next = uniform_update(l.geometry, r, theta, t.degree(v));
        if (l.geometry == Geometry::hyperbolic) {
            // keep strictly inside (0,1) so later angle evaluations stay defined
            r = std::clamp(next, std::numeric_limits<double>::min(), 1.0 - 1e-16);
        } else {
            r = next;
        }
    }
    return seen;
}

// Log-coordinates: x = ln r (Euclidean) or x = ln decay (hyperbolic). Angles
// satisfy d alpha = sin(alpha) d ln tan(alpha / 2).
struct NewtonSystem {
    Eigen::VectorXd residual;
    Eigen::SparseMatrix<double> jacobian;
};

inline NewtonSystem newton_system(const Triangulation& t, const PackingLabel& l, std::span<const int> interior,
                                  std::span<const int> slot)
{
    const auto n = static_cast<Eigen::Index>(interior.size());
    NewtonSystem sys;
    sys.residual = Eigen::VectorXd::Zero(n);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(interior.size() * 13);
    const auto& r = l.radii;
    const auto rad = [&](int i) { return r[static_cast<std::size_t>(i)]; };
    for (Eigen::Index row = 0; row < n; ++row) {
        const int v = interior[static_cast<std::size_t>(row)];
        const auto& f = t.flower(v);
        const std::size_t k = f.size();
        double diag = 0.0;
        double sum = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            const int u = f[i];
            const int w = f[(i + 1) % k];
            double alpha, dv, du, dw;
            if (l.geometry == Geometry::euclidean) {
                const double rv = rad(v), ru = rad(u), rw = rad(w);
                const double s = rv + ru + rw;
                alpha = 2.0 * std::atan2(std::sqrt(ru * rw), std::sqrt(rv * s));
                dv = 0.5 * (-1.0 - rv / s);
                du = 0.5 * (1.0 - ru / s);
                dw = 0.5 * (1.0 - rw / s);
            } else {
                const double xv = rad(v), xu = rad(u), xw = rad(w);
                const double p = xv * xu * xw;
                alpha = 2.0 * std::atan2(std::sqrt(xv * (1.0 - xu) * (1.0 - xw)), std::sqrt((1.0 - xv) * (1.0 - p)));
                const double q = p / (1.0 - p);
                dv = 0.5 * (1.0 / (1.0 - xv) + q);
                du = 0.5 * (-xu / (1.0 - xu) + q);
                dw = 0.5 * (-xw / (1.0 - xw) + q);
            }
            sum += alpha;
            const double sa = std::sin(alpha);
            diag += sa * dv;
            if (const int cu = slot[static_cast<std::size_t>(u)]; cu >= 0) trip.emplace_back(row, cu, sa * du);
            if (const int cw = slot[static_cast<std::size_t>(w)]; cw >= 0) trip.emplace_back(row, cw, sa * dw);
        }
        trip.emplace_back(row, row, diag);
        sys.residual(row) = sum - geom::two_pi;
    }
    sys.jacobian.resize(n, n);
    sys.jacobian.setFromTriplets(trip.begin(), trip.end());
    return sys;
}

// Newton direction in log-coordinates. With s = ln tanh(h/2) in place of
// ln decay (Euclidean: s = ln r) the Jacobian J D is symmetric negative
// definite, D = dx/ds, so a sparse Cholesky factorization applies; LU is the
// fallback.
class NewtonDirection {
public:
    std::optional<Eigen::VectorXd> solve(const NewtonSystem& sys, const PackingLabel& l, std::span<const int> interior)
    {
        const auto n = static_cast<Eigen::Index>(interior.size());
        Eigen::VectorXd d = Eigen::VectorXd::Ones(n);
        if (l.geometry == Geometry::hyperbolic)
            for (Eigen::Index i = 0; i < n; ++i) {
                const double x = l.radii[static_cast<std::size_t>(interior[static_cast<std::size_t>(i)])];
                d(i) = -(1.0 / std::sqrt(x) - std::sqrt(x));  // -2 sinh(h)
            }
        Eigen::SparseMatrix<double> m = -(sys.jacobian * d.asDiagonal());
        if (!llt_failed_) {
            if (!llt_analyzed_) {
                llt_.analyzePattern(m);
                llt_analyzed_ = true;
            }
            llt_.factorize(m);
            if (llt_.info() == Eigen::Success) {
                Eigen::VectorXd ds = llt_.solve(sys.residual);
                if (llt_.info() == Eigen::Success && ds.allFinite()) return Eigen::VectorXd(d.cwiseProduct(ds));
            }
            llt_failed_ = true;
        }
        if (!lu_analyzed_) {
            lu_.analyzePattern(sys.jacobian);
            lu_analyzed_ = true;
        }
        lu_.factorize(sys.jacobian);
        if (lu_.info() != Eigen::Success) return std::nullopt;
        Eigen::VectorXd dx = lu_.solve(-sys.residual);
        if (lu_.info() != Eigen::Success || !dx.allFinite()) return std::nullopt;
        return dx;
    }

private:
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> llt_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
    bool llt_analyzed_ = false, llt_failed_ = false, lu_analyzed_ = false;
};

// Newton iteration with an Armijo backtracking on the residual norm. Returns
// false if it stalls; the label is then left at the best point found.
inline bool newton_solve(const Triangulation& t, PackingLabel& l, std::span<const int> interior, double tol,
                         long& iterations, long max_iter)
{
    std::vector<int> slot(static_cast<std::size_t>(t.vertex_count()), -1);
    for (std::size_t i = 0; i < interior.size(); ++i) slot[static_cast<std::size_t>(interior[i])] = static_cast<int>(i);
    const bool hyp = l.geometry == Geometry::hyperbolic;
    NewtonDirection direction;
    // Steps taken after reaching tol. Residual defects of one sign add up
    // over large regions at layout time, so they are pushed toward roundoff.
    constexpr int polish_steps = 2;
    int polished = 0;
    for (int step = 0; step < 60 + polish_steps && iterations < max_iter; ++step) {
        auto sys = newton_system(t, l, interior, slot);
        const double res0 = sys.residual.cwiseAbs().maxCoeff();
        const bool polishing = res0 <= tol;
        if (polishing && polished++ == polish_steps) return true;
        const auto dir = direction.solve(sys, l, interior);
        if (!dir) return polishing;
        const Eigen::VectorXd& dx = *dir;
        ++iterations;
        const double norm0 = sys.residual.norm();
        std::vector<double> saved(interior.size());
        for (std::size_t i = 0; i < interior.size(); ++i) saved[i] = l.radii[static_cast<std::size_t>(interior[i])];
        double lambda = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 30; ++ls, lambda *= 0.5) {
            bool ok = true;
            for (std::size_t i = 0; i < interior.size(); ++i) {
                const double x = std::log(saved[i]) + lambda * dx(static_cast<Eigen::Index>(i));
                double val = std::exp(x);
                if (hyp && !(val < 1.0)) ok = false;
                if (!(val > 0.0) || !std::isfinite(val)) ok = false;
                l.radii[static_cast<std::size_t>(interior[i])] = val;
            }
            if (ok) {
                // Armijo condition on the Euclidean norm of the residual
                double sq = 0.0, worst = 0.0;
                for (int v : interior) {
                    const double e = flower_angle_sum(t, l, v) - geom::two_pi;
                    sq += e * e;
                    worst = std::max(worst, std::abs(e));
                }
                const double norm = std::sqrt(sq);
                if (std::isfinite(norm) && norm <= (1.0 - 1e-4 * lambda) * norm0 && (!polishing || worst <= res0)) {
                    accepted = true;
                    break;
                }
            }
        }
        if (!accepted) {
            for (std::size_t i = 0; i < interior.size(); ++i) l.radii[static_cast<std::size_t>(interior[i])] = saved[i];
            return polishing;
        }
    }
    return max_residual(t, l) <= tol;
}

inline Solution iterate(const Triangulation& t, PackingLabel label, const SolveOptions& opt)
{
    std::vector<int> interior;
    for (int v = 0; v < t.vertex_count(); ++v)
        if (t.is_interior(v)) interior.push_back(v);
    if (interior.empty()) fail(Errc::no_interior_vertices, "complex has no interior vertices");

    SolveReport rep;
    if (opt.accelerate) {
        constexpr long warmup = 20;
        for (long i = 0; i < warmup && rep.iterations < opt.max_iter; ++i, ++rep.iterations) sweep(t, label, interior);
        if (newton_solve(t, label, interior, opt.tol, rep.iterations, opt.max_iter)) {
            rep.final_residual = max_residual(t, label);
            rep.converged = rep.final_residual <= opt.tol;
            return {std::move(label), rep};
        }
    }
    while (rep.iterations < opt.max_iter) {
        const double seen = sweep(t, label, interior);
        ++rep.iterations;
        if (seen <= opt.tol) {
            const double now = max_residual(t, label);
            if (now <= opt.tol) break;
        }
    }
    rep.final_residual = max_residual(t, label);
    rep.converged = rep.final_residual <= opt.tol;
    return {std::move(label), rep};
}

} // namespace detail

// Euclidean label with prescribed boundary radii. boundary_radii is indexed by
// vertex id; entries at interior vertices are ignored.
inline Solution solve_euclidean(const Triangulation& t, std::span<const double> boundary_radii, const SolveOptions& opt = {})
{
    if (!t.has_boundary()) fail(Errc::no_interior_vertices, "Euclidean solve needs a boundary");
    if (boundary_radii.size() != static_cast<std::size_t>(t.vertex_count()))
        fail(Errc::non_positive_radius, "boundary radius table has the wrong length");
    PackingLabel l{Geometry::euclidean, std::vector<double>(static_cast<std::size_t>(t.vertex_count()), 0.0)};
    double mean = 0.0;
    int nb = 0;
    for (int v = 0; v < t.vertex_count(); ++v) {
        if (t.is_interior(v)) continue;
        const double r = boundary_radii[static_cast<std::size_t>(v)];
        if (!(r > 0.0) || !std::isfinite(r)) fail(Errc::non_positive_radius, "boundary radius must be positive");
        l.radii[static_cast<std::size_t>(v)] = r;
        mean += r;
        ++nb;
    }
    mean /= nb;
    const double init = opt.initial > 0.0 ? opt.initial : mean;
    for (int v = 0; v < t.vertex_count(); ++v)
        if (t.is_interior(v)) l.radii[static_cast<std::size_t>(v)] = init;
    return detail::iterate(t, std::move(l), opt);
}

inline Solution solve_euclidean(const Triangulation& t, double boundary_radius, const SolveOptions& opt = {})
{
    std::vector<double> r(static_cast<std::size_t>(t.vertex_count()), boundary_radius);
    return solve_euclidean(t, r, opt);
}

// Hyperbolic label with prescribed boundary decays (0 = horocycle), indexed by vertex id.
inline Solution solve_hyperbolic(const Triangulation& t, std::span<const double> boundary_decays, const SolveOptions& opt = {})
{
    if (!t.has_boundary()) fail(Errc::no_interior_vertices, "hyperbolic solve needs a boundary");
    if (boundary_decays.size() != static_cast<std::size_t>(t.vertex_count()))
        fail(Errc::non_positive_radius, "boundary decay table has the wrong length");
    const double init = opt.initial > 0.0 && opt.initial < 1.0 ? opt.initial : 0.5;
    PackingLabel l{Geometry::hyperbolic, std::vector<double>(static_cast<std::size_t>(t.vertex_count()), init)};
    for (int v = 0; v < t.vertex_count(); ++v) {
        if (t.is_interior(v)) continue;
        const double d = boundary_decays[static_cast<std::size_t>(v)];
        if (!(d >= 0.0) || !(d < 1.0)) fail(Errc::non_positive_radius, "boundary decay must lie in [0,1)");
        l.radii[static_cast<std::size_t>(v)] = d;
    }
    return detail::iterate(t, std::move(l), opt);
}

// Maximal packing label: every boundary circle is a horocycle.
inline Solution solve_max_hyperbolic(const Triangulation& t, const SolveOptions& opt = {})
{
    std::vector<double> zeros(static_cast<std::size_t>(t.vertex_count()), 0.0);
    return solve_hyperbolic(t, zeros, opt);
}

} // namespace icd::label
