#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kirchhoff/fibering.hpp"
#include "kirchhoff/fields.hpp"
#include "kirchhoff/functionals.hpp"

namespace kirchhoff {

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SolverOptions {
    double tol_grad = 1e-6;     ///< sup-norm of the nodal gradient
    double tol_nehari = 1e-9;   ///< relative Nehari identity residual
    int max_iterations = 50000;
    double armijo = 1e-4;
    double min_step = 1e-12;
};

/// Outcome of one constrained minimization.
struct SolveReport {
    GridFunction solution;
    Branch branch = Branch::minus;
    EnergyBreakdown energy;
    double grad_residual = 0.0;
    double nehari_residual = 0.0;
    double positivity_min = 0.0;  ///< min over Ω-interior nodes
    double h_second = 0.0;        ///< h″(1) at the solution
    double mu_norm = 0.0;         ///< ‖u‖_μ
    int iterations = 0;
    bool converged = false;
    std::string seed;
    std::string message;
};

/// Minimizes J on the requested Nehari branch starting from u_init.
///
/// Each step takes the H¹_μ-preconditioned gradient s = H⁻¹ J′(u) with
/// H = (a‖u‖²_D + 1)(−Δ) + μV + I, truncates (u − ηs) to its positive part and
/// rescales onto the branch; η is halved until Armijo decrease holds. Nodes
/// outside `active` (default: box interior) are pinned to zero. If u_init has
/// no multiple on the branch, the default seeds are tried instead.
SolveReport minimize_on_branch(const ProblemData& problem, Branch branch, const GridFunction& u_init,
                               const SolverOptions& opts = {},
                               const std::vector<std::uint8_t>* active = nullptr);

struct NamedSeed {
    std::string name;
    GridFunction u;
};

/// Seeds: phi1 (principal eigenfunction on Ω), phi_mu (on the box), limit
/// (ground state of the limit problem, when 2 < p < 4 and λ < λ₁), and
/// Gaussian bumps of three widths centred in Ω.
std::vector<NamedSeed> default_seeds(const ProblemData& problem);
std::vector<std::string> seed_names();
NamedSeed make_seed(const ProblemData& problem, const std::string& name);

/// Runs minimize_on_branch from every seed whose ray meets the branch and keeps
/// the converged run of lowest energy (or the closest failed run).
SolveReport solve_multistart(const ProblemData& problem, Branch branch, const std::vector<NamedSeed>& seeds,
                             const SolverOptions& opts = {});

/// Certificate checks on a report.
bool certify(const SolveReport& r, const SolverOptions& opts);

std::string to_json(const SolveReport& r);

/// Ground state of −Δw = λ f w + Q w^{p−1} on Ω with zero Dirichlet data.
struct LimitGroundState {
    GridFunction w;
    double alpha_infty = 0.0;
    double identity_residual = 0.0;
    double gradient_term = 0.0;  ///< ∫|∇w|² − λ∫f w²
    double q_term = 0.0;         ///< ∫Q w^p
    SolveReport report;
};

LimitGroundState solve_limit_problem(const CoefficientFields& fields, const Grid& grid, double p, double lambda,
                                     const SolverOptions& opts = {});

/// Nehari scalings of the ground state under the full problem.
struct GroundStateScalings {
    double t_minus = 0.0;
    double t_plus = 0.0;
    double pivot = 0.0;        ///< (2/(4−p))^{1/(p−2)}
    double a_degenerate = 0.0; ///< a(w)
    double t_degenerate = 0.0; ///< t(w)
};

/// Throws BranchAbsent when problem.a >= a(w).
GroundStateScalings t_scalings_of_ground_state(const GridFunction& w, const ProblemData& problem);

}  // namespace kirchhoff
