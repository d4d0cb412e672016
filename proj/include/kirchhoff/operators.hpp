#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Sparse>

#include "kirchhoff/grid.hpp"

namespace kirchhoff {

/// A subset of grid nodes carrying unknowns, with the rest pinned to zero.
class ActiveSet {
public:
    ActiveSet(const Grid& grid, const std::vector<std::uint8_t>& mask);

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return nodes_.size(); }
    std::span<const std::size_t> nodes() const { return nodes_; }
    bool contains(std::size_t node) const { return slot_[node] >= 0; }
    const std::vector<std::uint8_t>& mask() const { return mask_; }

    Eigen::VectorXd gather(std::span<const double> full) const;
    std::vector<double> scatter(const Eigen::VectorXd& reduced) const;

    /// Matrix of -Δ on the active nodes (Dirichlet outside) plus diag(extra_diag[node]).
    /// Unscaled by quadrature weights: xᵀ K x · cell_volume = ∫|∇x|² + ∫ extra x².
    Eigen::SparseMatrix<double> stiffness(std::span<const double> extra_diag, double scale = 1.0) const;

private:
    Grid grid_;
    std::vector<std::uint8_t> mask_;
    std::vector<std::size_t> nodes_;
    std::vector<long> slot_;
};

}  // namespace kirchhoff
