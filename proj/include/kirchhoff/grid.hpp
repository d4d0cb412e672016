#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace kirchhoff {

/// Thrown for malformed inputs: bad grids, field specs that break the sign
/// hypotheses, size mismatches.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Uniform tensor grid on a box in 1 or 2 dimensions.
///
/// Nodes are numbered x-fastest: index = i + nx * j. The outermost layer of
/// nodes is the box boundary where zero Dirichlet data is imposed.
class Grid {
public:
    static Grid build(int dim, std::span<const std::array<double, 2>> extents,
                      std::span<const std::size_t> points_per_axis);
    static Grid line(double lo, double hi, std::size_t points);
    static Grid square(double lo, double hi, std::size_t points);

    int dim() const { return dim_; }
    std::size_t points(int axis) const { return n_[axis]; }
    double lower(int axis) const { return lo_[axis]; }
    double upper(int axis) const { return hi_[axis]; }
    double spacing(int axis) const { return h_[axis]; }
    std::size_t size() const { return n_[0] * n_[1]; }

    /// Coordinate of node `idx` along `axis`.
    double coord(std::size_t idx, int axis) const;
    std::array<std::size_t, 2> ij(std::size_t idx) const { return {idx % n_[0], idx / n_[0]}; }
    std::size_t index(std::size_t i, std::size_t j = 0) const { return i + n_[0] * j; }

    bool is_boundary(std::size_t idx) const;
    std::vector<std::size_t> boundary_nodes() const;
    std::size_t boundary_count() const;

    /// Volume of one interior cell (product of spacings).
    double cell_volume() const { return h_[0] * h_[1]; }
    /// Tensor-trapezoidal weight of node `idx`.
    double weight(std::size_t idx) const;

    bool operator==(const Grid&) const = default;

private:
    int dim_ = 1;
    std::array<double, 2> lo_{0.0, 0.0};
    std::array<double, 2> hi_{0.0, 0.0};
    std::array<std::size_t, 2> n_{1, 1};
    std::array<double, 2> h_{1.0, 1.0};
};

/// Real values sampled at every node of a grid.
struct GridFunction {
    Grid grid;
    std::vector<double> values;

    GridFunction() = default;
    explicit GridFunction(const Grid& g, double fill = 0.0) : grid(g), values(g.size(), fill) {}
    GridFunction(const Grid& g, std::vector<double> v);

    std::size_t size() const { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
};

/// Tensor-trapezoidal quadrature; exact for affine integrands.
double integrate(const Grid& grid, std::span<const double> values);
inline double integrate(const GridFunction& u) { return integrate(u.grid, u.values); }

/// Discrete -Δu with the centered second-order stencil. Boundary rows are zero.
/// Throws DomainError if `u` is nonzero on the box boundary.
GridFunction apply_laplacian(const Grid& grid, std::span<const double> u);
inline GridFunction apply_laplacian(const GridFunction& u) { return apply_laplacian(u.grid, u.values); }

/// Edge-based form Σ h^{d} ∇u·∇v; equals integrate(u · (-Δv)) for boundary-zero u, v.
double gradient_dot(const Grid& grid, std::span<const double> u, std::span<const double> v);

double sup_norm(std::span<const double> v);

void require_same_size(const Grid& grid, std::size_t n, const char* what);
void require_boundary_zero(const Grid& grid, std::span<const double> u, const char* what);

}  // namespace kirchhoff
