#include "kirchhoff/operators.hpp"

namespace kirchhoff {

ActiveSet::ActiveSet(const Grid& grid, const std::vector<std::uint8_t>& mask)
    : grid_(grid), mask_(mask), slot_(grid.size(), -1) {
    require_same_size(grid, mask.size(), "active mask");
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (mask[k] && !grid.is_boundary(k)) {
            slot_[k] = static_cast<long>(nodes_.size());
            nodes_.push_back(k);
        } else {
            mask_[k] = 0;
        }
    }
    if (nodes_.empty()) {
        throw DomainError("active node set is empty");
    }
}

Eigen::VectorXd ActiveSet::gather(std::span<const double> full) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(nodes_.size()));
    for (std::size_t s = 0; s < nodes_.size(); ++s) {
        out[static_cast<Eigen::Index>(s)] = full[nodes_[s]];
    }
    return out;
}

std::vector<double> ActiveSet::scatter(const Eigen::VectorXd& reduced) const {
    std::vector<double> out(grid_.size(), 0.0);
    for (std::size_t s = 0; s < nodes_.size(); ++s) {
        out[nodes_[s]] = reduced[static_cast<Eigen::Index>(s)];
    }
    return out;
}

Eigen::SparseMatrix<double> ActiveSet::stiffness(std::span<const double> extra_diag, double scale) const {
    const std::size_t nx = grid_.points(0);
    const double ihx2 = scale / (grid_.spacing(0) * grid_.spacing(0));
    const double ihy2 = grid_.dim() == 2 ? scale / (grid_.spacing(1) * grid_.spacing(1)) : 0.0;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(nodes_.size() * (grid_.dim() == 2 ? 5 : 3));
    auto couple = [&](long row, std::size_t nb, double w) {
        if (slot_[nb] >= 0) {
            trip.emplace_back(row, slot_[nb], -w);
        }
    };
    for (std::size_t s = 0; s < nodes_.size(); ++s) {
        const auto k = nodes_[s];
        const auto row = static_cast<long>(s);
        double diag = 2.0 * ihx2 + 2.0 * ihy2;
        if (!extra_diag.empty()) {
            diag += extra_diag[k];
        }
        trip.emplace_back(row, row, diag);
        couple(row, k - 1, ihx2);
        couple(row, k + 1, ihx2);
        if (grid_.dim() == 2) {
            couple(row, k - nx, ihy2);
            couple(row, k + nx, ihy2);
        }
    }
    const auto n = static_cast<Eigen::Index>(nodes_.size());
    Eigen::SparseMatrix<double> K(n, n);
    K.setFromTriplets(trip.begin(), trip.end());
    return K;
}

}  // namespace kirchhoff
