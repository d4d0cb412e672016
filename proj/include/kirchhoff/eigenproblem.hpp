#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kirchhoff/fields.hpp"
#include "kirchhoff/grid.hpp"

namespace kirchhoff {

class EigenError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct EigenOptions {
    double tol = 1e-10;
    int max_iterations = 10000;
};

/// Principal eigenpair of a weighted Dirichlet problem.
struct EigenResult {
    double eigenvalue = 0.0;
    GridFunction eigenfunction;  ///< positive, zero off the active nodes, ∫fφ² = 1
    double residual = 0.0;       ///< ‖Kφ − λFφ‖∞ / max(1, ‖Kφ‖∞)
    int iterations = 0;
    double dirichlet_norm_sq = 0.0;
};

/// Smallest positive λ with (−Δ + potential)φ = λ weight φ on the active nodes.
///
/// The shift σ is first pushed up to just below λ by bisection on the inertia of
/// K − σF (positive definite exactly when σ < λ), then shifted inverse
/// iteration converges on the principal mode. Throws EigenError when the weight
/// has no positive node or the iteration stalls.
EigenResult principal_weighted_eig(const Grid& grid, const std::vector<std::uint8_t>& active,
                                   std::span<const double> potential, const GridFunction& weight,
                                   const EigenOptions& opts = {});

/// λ₁(f_Ω) and φ₁ for −Δu = λ f u on the zero set of V with Dirichlet data.
EigenResult principal_eig_omega(const CoefficientFields& fields, const Grid& grid,
                                const EigenOptions& opts = {});

/// λ̃_{1,μ}(f) = inf ‖u‖²_μ / ∫f u² over the whole box.
EigenResult principal_eig_full(const ProblemData& problem, const EigenOptions& opts = {});

struct WellSweepRow {
    double mu = 0.0;
    double lambda_tilde = 0.0;
    double l2_gap = 0.0;
    int iterations = 0;
    double residual = 0.0;
};

struct WellSweep {
    std::vector<WellSweepRow> rows;
    double lambda1 = 0.0;
    bool monotone = true;        ///< λ̃ nondecreasing down the rows
    bool below_limit = true;     ///< λ̃ < λ₁(f_Ω) on every row
};

/// λ̃_{1,μ} and ‖φ_μ − φ₁‖_{L²} along an increasing list of μ. Rows run as
/// independent tasks.
WellSweep well_convergence_sweep(const ProblemData& problem, std::span<const double> mu_list,
                                 const EigenOptions& opts = {});

std::string to_csv(const WellSweep& sweep);

}  // namespace kirchhoff
