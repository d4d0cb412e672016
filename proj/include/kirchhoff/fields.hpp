#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "kirchhoff/grid.hpp"

namespace kirchhoff {

namespace field {

struct Constant {
    double value = 0.0;
};

/// Σ c_k r^k with r = |x| (Euclidean).
struct RadialPolynomial {
    std::vector<double> coeffs;
};

/// offset + amplitude · exp(-|x - center|² / (2 width²)).
struct GaussianBump {
    double amplitude = 1.0;
    double width = 1.0;
    double offset = 0.0;
    std::array<double, 2> center{0.0, 0.0};
};

/// `inside` where |x| <= radius, `outside` elsewhere.
struct PiecewiseRadius {
    double radius = 1.0;
    double inside = 0.0;
    double outside = 0.0;
};

}  // namespace field

/// Named analytic primitive used to sample f and Q.
using FieldSpec = std::variant<field::Constant, field::RadialPolynomial, field::GaussianBump,
                               field::PiecewiseRadius>;

/// Parses "const:1", "poly:1,0,-2", "gauss:amp,width[,offset[,cx[,cy]]]",
/// "piecewise:radius,inside,outside".
FieldSpec parse_field_spec(const std::string& text);
std::string format_field_spec(const FieldSpec& spec);
double evaluate(const FieldSpec& spec, std::array<double, 2> x, int dim);
GridFunction sample(const FieldSpec& spec, const Grid& grid);

/// Potential, weights and the zero set of the potential.
struct CoefficientFields {
    GridFunction V;
    GridFunction f;
    GridFunction Q;
    std::vector<std::uint8_t> omega_mask;  // 1 where V == 0
    double omega_radius = 0.0;
    double ramp_power = 2.0;
};

/// V = 0 on the cube |x|_∞ <= omega_radius and (distance to the cube)^ramp_power outside.
/// Throws DomainError if f or Q has no positive value on the cube.
CoefficientFields make_well_fields(const Grid& grid, double omega_radius, double ramp_power,
                                   const FieldSpec& f_spec, const FieldSpec& Q_spec);

/// Assembles fields from explicit nodal values and checks the sign hypotheses.
CoefficientFields make_fields(GridFunction V, GridFunction f, GridFunction Q);

/// Nodes of the cube's interior: in the mask, off the box boundary, and with every
/// stencil neighbour in the mask. These carry the Dirichlet problem on Ω.
std::vector<std::uint8_t> omega_interior(const Grid& grid, const std::vector<std::uint8_t>& mask);

/// Nodes that are not on the box boundary.
std::vector<std::uint8_t> box_interior(const Grid& grid);

/// Optional bookkeeping for the decay condition; never checked numerically.
struct DecayMeta {
    double c_star = 0.0;
    double r_star = 0.0;
};

/// A full instance of the Kirchhoff problem with b = 1.
struct ProblemData {
    Grid grid;
    CoefficientFields fields;
    double a = 0.0;
    double p = 4.0;
    double lambda = 0.0;
    double mu = 1.0;
    std::optional<DecayMeta> meta;

    /// Enforces a >= 0, 2 < p < 6, mu > 0 and field sizes.
    void validate() const;
};

}  // namespace kirchhoff
