#pragma once

// Command-line front end: argument parsing, result JSON, SVG rendering of
// planar and stereographically projected packings, and the four subcommands.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "CLI11.hpp"

#include "icd/cookie.hpp"
#include "icd/error.hpp"
#include "icd/geom.hpp"
#include "icd/layout.hpp"
#include "icd/pipeline.hpp"
#include "icd/weld.hpp"

namespace icd::cli {

using geom::cplx;
using geom::Vec3;
using layout::Packing;

inline constexpr const char* version = "1.0.0";

enum class View { plane, north, south };

struct CliInvocation {
    std::string subcommand;
    std::string input;
    double mesh = 0.03125;
    double tol = 1e-10;
    int refine = 1;
    std::optional<std::array<cplx, 3>> normalize;
    std::string out;
    std::string format = "json";
    bool dump_weld = false;
    View view = View::north;
    bool help = false;
    std::string help_text;
};

// ---------------------------------------------------------------------------
// Arguments
// ---------------------------------------------------------------------------

namespace detail {

inline std::array<cplx, 3> parse_triple(const std::string& s)
{
    std::vector<double> v;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        std::size_t used = 0;
        double x = 0.0;
        try {
            x = std::stod(item, &used);
        } catch (const std::exception&) {
            fail(Errc::usage, "--normalize: bad number '" + item + "'");
        }
        if (used != item.size() || !std::isfinite(x)) fail(Errc::usage, "--normalize: bad number '" + item + "'");
        v.push_back(x);
    }
    if (v.size() != 6) fail(Errc::usage, "--normalize expects x1,y1,x2,y2,x3,y3");
    return {cplx(v[0], v[1]), cplx(v[2], v[3]), cplx(v[4], v[5])};
}

} // namespace detail

// Throws Error(Usage) on any parse or validation failure; --help sets `help`.
inline CliInvocation parse_args(const std::vector<std::string>& args)
{
    CliInvocation inv;
    std::string normalize;
    std::string view = "north";

    CLI::App app{"Intrinsic circle domains by circle packing", "icd"};
    app.require_subcommand(1);
    const auto add_common = [&](CLI::App* sub, bool pipeline_flags) {
        sub->add_option("input", inv.input, "input file")->required();
        sub->add_option("--out", inv.out, "output path (stem when --format both)");
        sub->add_option("--format", inv.format, "json|svg|both")->check(CLI::IsMember({"json", "svg", "both"}));
        sub->add_option("--view", view, "plane|north|south")->check(CLI::IsMember({"plane", "north", "south"}));
        if (!pipeline_flags) return;
        sub->add_option("--mesh", inv.mesh, "hex lattice circle radius")->check(CLI::PositiveNumber);
        sub->add_option("--tol", inv.tol, "angle-sum tolerance")->check(CLI::PositiveNumber);
        sub->add_option("--refine", inv.refine, "boundary refinement layers")->check(CLI::NonNegativeNumber);
        sub->add_option("--normalize", normalize, "x1,y1,x2,y2,x3,y3 sent to the standard targets");
        sub->add_flag("--dump-weld", inv.dump_weld, "write weld params as CSV");
    };
    add_common(app.add_subcommand("pack", "pack a domain onto the sphere"), true);
    add_common(app.add_subcommand("verify", "pack and certify each component disc"), true);
    add_common(app.add_subcommand("cutout", "hex cut-out of a domain as a plane packing"), true);
    add_common(app.add_subcommand("render", "render a packing JSON as SVG"), false);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        inv.help = true;
        inv.help_text = app.help();
        return inv;
    } catch (const CLI::ParseError& e) {
        fail(Errc::usage, e.what());
    }
    inv.subcommand = app.get_subcommands().front()->get_name();
    if (!normalize.empty()) inv.normalize = detail::parse_triple(normalize);
    inv.view = view == "plane" ? View::plane : view == "south" ? View::south : View::north;
    if (inv.format == "both" && inv.out.empty()) fail(Errc::usage, "--format both needs --out");
    if (inv.subcommand == "render" && inv.format != "svg") inv.format = "svg";
    return inv;
}

inline CliInvocation parse_args(int argc, const char* const* argv)
{
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return parse_args(args);
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::ordered_json vec_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

inline nlohmann::ordered_json report_json(const label::SolveReport& r)
{
    nlohmann::ordered_json j;
    j["iterations"] = r.iterations;
    j["final_residual"] = r.final_residual;
    j["converged"] = r.converged;
    return j;
}

} // namespace detail

inline nlohmann::ordered_json emit_json(const pipeline::IntrinsicResult& r)
{
    using nlohmann::ordered_json;
    const Packing& p = r.sphere_packing;
    ordered_json j;
    j["schema"] = 1;
    j["meta"] = {
        {"mesh", r.mesh},
        {"tol", r.tol},
        {"versions",
         {{"icd", version},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." + std::to_string(EIGEN_MINOR_VERSION)},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}}};
    j["model"] = std::string(geom::to_string(p.model));

    std::vector<const char*> role(static_cast<std::size_t>(p.size()), "omega");
    for (const auto& c : r.component_discs)
        for (int v : c.cap_vertices) role[static_cast<std::size_t>(v)] = "cap";
    auto circles = ordered_json::array();
    for (int v = 0; v < p.size(); ++v) {
        ordered_json e;
        e["id"] = v;
        e["role"] = role[static_cast<std::size_t>(v)];
        e["center"] = detail::vec_json(p.centers[static_cast<std::size_t>(v)]);
        e["radius"] = p.radii[static_cast<std::size_t>(v)];
        circles.push_back(std::move(e));
    }
    j["circles"] = std::move(circles);

    auto comps = ordered_json::array();
    for (std::size_t k = 0; k < r.component_discs.size(); ++k) {
        const auto& c = r.component_discs[k];
        ordered_json e;
        e["component"] = c.component;
        e["cycle"] = c.cycle;
        e["cap_center"] = c.cap_center;
        e["cap_vertex_count"] = c.cap_vertices.size();
        e["seam_length"] = c.param.size();
        if (c.ideal_decay >= 0.0)
            e["ideal_decay"] = c.ideal_decay;
        else
            e["ideal_decay"] = nullptr;
        e["seam_circle"] = {{"center", {c.fitted.circle.center.real(), c.fitted.circle.center.imag()}},
                            {"radius", c.fitted.circle.radius},
                            {"roundness", c.fitted.roundness}};
        comps.push_back(std::move(e));
    }
    j["components"] = std::move(comps);

    ordered_json reports = ordered_json::object();
    for (const auto& [name, rep] : r.reports) reports[name] = detail::report_json(rep);
    j["reports"] = std::move(reports);

    const auto& d = r.diagnostics;
    const auto dil = pipeline::dilatation_report(r);
    auto strata = ordered_json::array();
    for (const auto& s : dil.by_depth) strata.push_back({{"depth", s.depth}, {"faces", s.faces}, {"median", s.median}, {"max", s.max}});
    ordered_json diag;
    diag["roundness"] = d.roundness;
    if (d.modulus)
        diag["modulus"] = *d.modulus;
    else
        diag["modulus"] = nullptr;
    diag["max_angle_residual"] = d.max_angle_residual;
    diag["tangency_residual"] = d.tangency_residual;
    diag["vertex_count"] = d.vertex_count;
    diag["max_degree"] = d.max_degree;
    diag["inserted"] = d.inserted;
    diag["puncture"] = r.puncture;
    diag["marked_vertices"] = r.marked_vertices;
    diag["dilatation"] = {{"interior_median", dil.interior_median}, {"trend_slope", dil.trend_slope}, {"by_depth", std::move(strata)}};
    j["diagnostics"] = std::move(diag);
    j["complex"] = complex::to_text(p.complex);
    return j;
}

inline std::string dump(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// SVG
// ---------------------------------------------------------------------------
// Plane and disc packings are drawn as given. Sphere packings are projected
// from the north pole (north view) or after the half-turn (x,y,z) -> (x,-y,-z)
// (south view); plane view equals north view for sphere packings. A cap whose
// boundary passes within 1e-9 (in cosine) of the projection pole becomes a
// <line class="clipped"> segment spanning the view box; a cap containing the
// pole becomes <circle class="exterior">. The image y axis points up.

namespace detail {

inline std::string num(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", x == 0.0 ? 0.0 : x);
    return buf;
}

struct SvgShape {
    int vertex = 0;
    bool line = false;
    bool exterior = false;
    cplx center;  // circle center, or foot of the line
    double radius = 0.0;
    cplx direction;  // unit direction of the line
};

inline SvgShape project(const Packing& p, int v, View view)
{
    SvgShape s;
    s.vertex = v;
    if (p.model != geom::Model::sphere) {
        const auto c = p.plane_circle(v);
        s.center = c.center;
        s.radius = c.radius;
        return s;
    }
    Vec3 n = p.centers[static_cast<std::size_t>(v)];
    if (view == View::south) n = Vec3(n.x(), -n.y(), -n.z());
    const double r = p.radii[static_cast<std::size_t>(v)];
    const double gap = std::cos(r) - n.z();
    if (std::abs(gap) <= 1e-9) {
        // boundary through the pole: n_x x + n_y y = n_z
        const cplx normal(n.x(), n.y());
        const double len = std::abs(normal);
        s.line = true;
        s.center = normal * (n.z() / (len * len));
        s.direction = cplx(-normal.imag(), normal.real()) / len;
        return s;
    }
    const auto img = geom::plane_circle_from_cap({n, r});
    s.center = img.circle.center;
    s.radius = img.circle.radius;
    s.exterior = img.exterior;
    return s;
}

} // namespace detail

inline std::string render_svg(const Packing& p, View view = View::north)
{
    std::vector<detail::SvgShape> shapes;
    shapes.reserve(static_cast<std::size_t>(p.size()));
    for (int v = 0; v < p.size(); ++v) shapes.push_back(detail::project(p, v, view));

    double x0 = -1.0, x1 = 1.0, y0 = -1.0, y1 = 1.0;
    bool any = false;
    for (const auto& s : shapes) {
        if (s.line) continue;
        const double a = s.center.real() - s.radius, b = s.center.real() + s.radius;
        const double c = -s.center.imag() - s.radius, d = -s.center.imag() + s.radius;
        if (!any) {
            x0 = a, x1 = b, y0 = c, y1 = d;
            any = true;
        } else {
            x0 = std::min(x0, a), x1 = std::max(x1, b), y0 = std::min(y0, c), y1 = std::max(y1, d);
        }
    }
    const double margin = 0.05 * std::max(x1 - x0, y1 - y0);
    x0 -= margin, x1 += margin, y0 -= margin, y1 += margin;
    const double span = std::hypot(x1 - x0, y1 - y0);

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << detail::num(x0) << ' ' << detail::num(y0) << ' '
        << detail::num(x1 - x0) << ' ' << detail::num(y1 - y0) << "\">\n";
    out << "<g fill=\"none\" stroke=\"black\" stroke-width=\"" << detail::num(1e-3 * span) << "\">\n";
    for (const auto& s : shapes) {
        if (s.line) {
            const cplx a = s.center - span * s.direction, b = s.center + span * s.direction;
            out << "<line class=\"clipped\" data-vertex=\"" << s.vertex << "\" x1=\"" << detail::num(a.real()) << "\" y1=\""
                << detail::num(-a.imag()) << "\" x2=\"" << detail::num(b.real()) << "\" y2=\"" << detail::num(-b.imag()) << "\"/>\n";
            continue;
        }
        out << "<circle ";
        if (s.exterior) out << "class=\"exterior\" ";
        out << "data-vertex=\"" << s.vertex << "\" cx=\"" << detail::num(s.center.real()) << "\" cy=\"" << detail::num(-s.center.imag())
            << "\" r=\"" << detail::num(s.radius) << "\"/>\n";
    }
    out << "</g>\n</svg>\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::json read_json(const std::string& path)
{
    std::ifstream in(path);
    if (!in) fail(Errc::parse_error, "cannot open " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::parse_error, path + ": " + e.what());
    }
}

inline std::string stem_of(const std::string& path)
{
    const auto slash = path.find_last_of('/');
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path;
    return path.substr(0, dot);
}

inline void write_file(const std::string& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) fail(Errc::parse_error, "cannot write " + path);
    f << text;
}

// json/svg go to --out (or stdout); `both` writes <stem>.json and <stem>.svg.
inline void emit(const CliInvocation& inv, const std::string& json, const std::string& svg, std::ostream& out)
{
    if (inv.format == "both") {
        const auto stem = stem_of(inv.out);
        write_file(stem + ".json", json);
        write_file(stem + ".svg", svg);
        return;
    }
    const std::string& text = inv.format == "svg" ? svg : json;
    if (inv.out.empty())
        out << text;
    else
        write_file(inv.out, text);
}

inline void dump_weld(const CliInvocation& inv, const pipeline::IntrinsicResult& r, std::ostream& err)
{
    for (std::size_t k = 0; k < r.component_discs.size(); ++k) {
        const auto& c = r.component_discs[k];
        const auto omega = weld::to_csv(c.param), cap = weld::to_csv(c.cap_param);
        if (inv.out.empty()) {
            err << "# weld " << k << " omega\n" << omega << "# weld " << k << " cap\n" << cap;
        } else {
            const auto stem = stem_of(inv.out) + ".weld" + std::to_string(k);
            write_file(stem + ".omega.csv", omega);
            write_file(stem + ".cap.csv", cap);
        }
    }
}

inline pipeline::PipelineConfig config_of(const CliInvocation& inv)
{
    pipeline::PipelineConfig cfg;
    cfg.epsilon = inv.mesh;
    cfg.tol = inv.tol;
    cfg.refine_layers = inv.refine;
    cfg.marked = inv.normalize;
    return cfg;
}

// Plane packing of the cut-out; radius is half the shortest incident edge.
inline Packing cutout_packing(const cookie::CutoutResult& c)
{
    Packing p;
    p.complex = c.complex;
    p.model = geom::Model::plane;
    for (int v = 0; v < c.complex.vertex_count(); ++v) {
        const cplx z = c.embedding[static_cast<std::size_t>(v)];
        double r = std::numeric_limits<double>::infinity();
        for (int u : c.complex.flower(v)) r = std::min(r, 0.5 * std::abs(z - c.embedding[static_cast<std::size_t>(u)]));
        p.centers.push_back(layout::to_vec(z));
        p.radii.push_back(r);
    }
    return p;
}

inline bool all_converged(const pipeline::IntrinsicResult& r)
{
    return std::all_of(r.reports.begin(), r.reports.end(), [](const auto& kv) { return kv.second.converged; });
}

} // namespace detail

// Exit codes: 0 success, 1 runtime failure or unconverged solve, 2 usage.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CliInvocation inv;
    try {
        inv = parse_args(args);
    } catch (const Error& e) {
        err << e.what() << "\n";
        return 2;
    }
    if (inv.help) {
        out << inv.help_text;
        return 0;
    }
    try {
        if (inv.subcommand == "render") {
            const auto p = layout::packing_from_json(detail::read_json(inv.input));
            detail::emit(inv, "", render_svg(p, inv.view), out);
            return 0;
        }
        const auto domain = cookie::domain_from_json(detail::read_json(inv.input));
        if (inv.subcommand == "cutout") {
            const auto c = cookie::refine_cutout(cookie::hex_cutout(domain, inv.mesh), inv.refine);
            const auto p = detail::cutout_packing(c);
            detail::emit(inv, dump(layout::to_json(p)), render_svg(p, View::plane), out);
            return 0;
        }
        const auto result = pipeline::run(domain, detail::config_of(inv));
        auto j = emit_json(result);
        if (inv.subcommand == "verify") {
            auto v = nlohmann::ordered_json::array();
            for (const auto& c : result.component_discs) {
                nlohmann::ordered_json e{{"cycle", c.cycle}, {"component", c.component}};
                if (c.component >= 0)
                    e["residual"] = pipeline::verify_intrinsic(result, c.component);
                else
                    e["residual"] = nullptr;
                v.push_back(std::move(e));
            }
            j["verify"] = std::move(v);
        }
        if (inv.dump_weld) detail::dump_weld(inv, result, err);
        detail::emit(inv, dump(j), inv.format == "json" ? "" : render_svg(result.sphere_packing, inv.view), out);
        return detail::all_converged(result) ? 0 : 1;
    } catch (const std::exception& e) {
        err << e.what() << "\n";
        return 1;
    }
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args, out, err);
}

} // namespace icd::cli
