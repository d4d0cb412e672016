#include "kirchhoff/grid.hpp"

#include <algorithm>
#include <cmath>

namespace kirchhoff {

Grid Grid::build(int dim, std::span<const std::array<double, 2>> extents,
                 std::span<const std::size_t> points_per_axis) {
    if (dim != 1 && dim != 2) {
        throw DomainError("grid dimension must be 1 or 2");
    }
    if (extents.size() != static_cast<std::size_t>(dim) ||
        points_per_axis.size() != static_cast<std::size_t>(dim)) {
        throw DomainError("grid needs one extent and one point count per axis");
    }
    Grid g;
    g.dim_ = dim;
    for (int ax = 0; ax < dim; ++ax) {
        const auto [lo, hi] = extents[ax];
        if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
            throw DomainError("grid extent must be a finite interval with positive length");
        }
        if (points_per_axis[ax] < 3) {
            throw DomainError("grid needs at least 3 points per axis");
        }
        g.lo_[ax] = lo;
        g.hi_[ax] = hi;
        g.n_[ax] = points_per_axis[ax];
        g.h_[ax] = (hi - lo) / static_cast<double>(points_per_axis[ax] - 1);
    }
    return g;
}

Grid Grid::line(double lo, double hi, std::size_t points) {
    const std::array<std::array<double, 2>, 1> ext{{{lo, hi}}};
    const std::array<std::size_t, 1> n{points};
    return build(1, ext, n);
}

Grid Grid::square(double lo, double hi, std::size_t points) {
    const std::array<std::array<double, 2>, 2> ext{{{lo, hi}, {lo, hi}}};
    const std::array<std::size_t, 2> n{points, points};
    return build(2, ext, n);
}

double Grid::coord(std::size_t idx, int axis) const {
    const auto k = ij(idx)[axis];
    if (k + 1 == n_[axis]) {
        return hi_[axis];
    }
    return lo_[axis] + static_cast<double>(k) * h_[axis];
}

bool Grid::is_boundary(std::size_t idx) const {
    const auto [i, j] = ij(idx);
    if (i == 0 || i + 1 == n_[0]) {
        return true;
    }
    return dim_ == 2 && (j == 0 || j + 1 == n_[1]);
}

std::vector<std::size_t> Grid::boundary_nodes() const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < size(); ++k) {
        if (is_boundary(k)) {
            out.push_back(k);
        }
    }
    return out;
}

std::size_t Grid::boundary_count() const {
    if (dim_ == 1) {
        return 2;
    }
    return 2 * n_[0] + 2 * n_[1] - 4;
}

double Grid::weight(std::size_t idx) const {
    const auto [i, j] = ij(idx);
    double w = h_[0];
    if (i == 0 || i + 1 == n_[0]) {
        w *= 0.5;
    }
    if (dim_ == 2) {
        w *= h_[1];
        if (j == 0 || j + 1 == n_[1]) {
            w *= 0.5;
        }
    }
    return w;
}

GridFunction::GridFunction(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
    require_same_size(grid, values.size(), "grid function");
}

void require_same_size(const Grid& grid, std::size_t n, const char* what) {
    if (n != grid.size()) {
        throw DomainError(std::string(what) + ": expected " + std::to_string(grid.size()) +
                          " nodal values, got " + std::to_string(n));
    }
}

void require_boundary_zero(const Grid& grid, std::span<const double> u, const char* what) {
    require_same_size(grid, u.size(), what);
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (grid.is_boundary(k) && u[k] != 0.0) {
            throw DomainError(std::string(what) + ": nonzero value on the box boundary");
        }
    }
}

double integrate(const Grid& grid, std::span<const double> values) {
    require_same_size(grid, values.size(), "integrate");
    double sum = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
        sum += grid.weight(k) * values[k];
    }
    return sum;
}

GridFunction apply_laplacian(const Grid& grid, std::span<const double> u) {
    require_boundary_zero(grid, u, "apply_laplacian");
    GridFunction out(grid);
    const std::size_t nx = grid.points(0);
    const double ihx2 = 1.0 / (grid.spacing(0) * grid.spacing(0));
    const double ihy2 = grid.dim() == 2 ? 1.0 / (grid.spacing(1) * grid.spacing(1)) : 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (grid.is_boundary(k)) {
            continue;
        }
        double v = (2.0 * u[k] - u[k - 1] - u[k + 1]) * ihx2;
        if (grid.dim() == 2) {
            v += (2.0 * u[k] - u[k - nx] - u[k + nx]) * ihy2;
        }
        out.values[k] = v;
    }
    return out;
}

double gradient_dot(const Grid& grid, std::span<const double> u, std::span<const double> v) {
    require_same_size(grid, u.size(), "gradient_dot");
    require_same_size(grid, v.size(), "gradient_dot");
    const std::size_t nx = grid.points(0);
    const std::size_t ny = grid.points(1);
    const double hx = grid.spacing(0);
    double sum = 0.0;
    if (grid.dim() == 1) {
        for (std::size_t i = 0; i + 1 < nx; ++i) {
            sum += (u[i + 1] - u[i]) * (v[i + 1] - v[i]);
        }
        return sum / hx;
    }
    // Edges are weighted by the transverse trapezoid weight, which matches the
    // five-point stencil against the nodal quadrature for boundary-zero data.
    const double hy = grid.spacing(1);
    double sx = 0.0;
    double sy = 0.0;
    for (std::size_t j = 0; j < ny; ++j) {
        const double wy = (j == 0 || j + 1 == ny) ? 0.5 : 1.0;
        for (std::size_t i = 0; i + 1 < nx; ++i) {
            const auto k = grid.index(i, j);
            sx += wy * (u[k + 1] - u[k]) * (v[k + 1] - v[k]);
        }
    }
    for (std::size_t j = 0; j + 1 < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            const double wx = (i == 0 || i + 1 == nx) ? 0.5 : 1.0;
            const auto k = grid.index(i, j);
            sy += wx * (u[k + nx] - u[k]) * (v[k + nx] - v[k]);
        }
    }
    return sx * hy / hx + sy * hx / hy;
}

double sup_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) {
        m = std::max(m, std::abs(x));
    }
    return m;
}

}  // namespace kirchhoff
