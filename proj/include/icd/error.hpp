#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace icd {

enum class Errc {
    // complex
    non_manifold,
    inconsistent_orientation,
    disconnected,
    not_a_boundary_cycle,
    parse_error,
    // geom
    non_positive_radius,
    infinite_apex_radius,
    triangle_too_large,
    domain_error,
    image_is_line,
    degenerate_input,
    // label
    boundary_vertex,
    no_interior_vertices,
    max_iter_exceeded,
    not_a_sphere,
    // layout
    unconverged_label,
    degenerate_triple,
    mismatched_complexes,
    degenerate_face,
    // cookie
    no_interior,
    component_not_separated,
    empty,
    invalid_domain,
    // weld
    angle_sum_not_2pi,
    incompatible_orientation,
    empty_param,
    // pipeline
    not_sphere_after_welds,
    missing_component,
    // cli
    usage,
};

constexpr std::string_view to_string(Errc code) noexcept
{
    switch (code) {
    case Errc::non_manifold: return "NonManifold";
    case Errc::inconsistent_orientation: return "InconsistentOrientation";
    case Errc::disconnected: return "Disconnected";
    case Errc::not_a_boundary_cycle: return "NotABoundaryCycle";
    case Errc::parse_error: return "ParseError";
    case Errc::non_positive_radius: return "NonPositiveRadius";
    case Errc::infinite_apex_radius: return "InfiniteApexRadius";
    case Errc::triangle_too_large: return "TriangleTooLarge";
    case Errc::domain_error: return "DomainError";
    case Errc::image_is_line: return "ImageIsLine";
    case Errc::degenerate_input: return "DegenerateInput";
    case Errc::boundary_vertex: return "BoundaryVertex";
    case Errc::no_interior_vertices: return "NoInteriorVertices";
    case Errc::max_iter_exceeded: return "MaxIterExceeded";
    case Errc::not_a_sphere: return "NotASphere";
    case Errc::unconverged_label: return "UnconvergedLabel";
    case Errc::degenerate_triple: return "DegenerateTriple";
    case Errc::mismatched_complexes: return "MismatchedComplexes";
    case Errc::degenerate_face: return "DegenerateFace";
    case Errc::no_interior: return "NoInterior";
    case Errc::component_not_separated: return "ComponentNotSeparated";
    case Errc::empty: return "Empty";
    case Errc::invalid_domain: return "InvalidDomain";
    case Errc::angle_sum_not_2pi: return "AngleSumNot2Pi";
    case Errc::incompatible_orientation: return "IncompatibleOrientation";
    case Errc::empty_param: return "EmptyParam";
    case Errc::not_sphere_after_welds: return "NotSphereAfterWelds";
    case Errc::missing_component: return "MissingComponent";
    case Errc::usage: return "Usage";
    }
    return "Unknown";
}

// All library failures are reported through this exception; `code()` is the
// machine-readable kind, `what()` carries the detail.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& detail)
        : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code)
    {
    }

    [[nodiscard]] Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& detail) { throw Error(code, detail); }

} // namespace icd
