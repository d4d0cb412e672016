#include "kirchhoff/nehari_solver.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <sstream>

#include <Eigen/SparseCholesky>

#include "json.hpp"
#include "kirchhoff/eigenproblem.hpp"
#include "kirchhoff/operators.hpp"

namespace kirchhoff {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

double min_on(const GridFunction& u, const std::vector<std::uint8_t>& mask) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (mask[k]) {
            m = std::min(m, u.values[k]);
        }
    }
    return m;
}

void clamp_to_active(GridFunction& u, const ActiveSet& set) {
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (!set.contains(k) || !(u.values[k] > 0.0)) {
            u.values[k] = 0.0;
        }
    }
}

void fill_report(SolveReport& r, const ProblemData& problem, const ActiveSet& set,
                 const std::vector<std::uint8_t>& omega_inner) {
    r.energy = energy(r.solution, problem);
    const GridFunction g = energy_gradient(r.solution, problem);
    double res = 0.0;
    for (std::size_t k : set.nodes()) {
        res = std::max(res, std::abs(g.values[k]));
    }
    r.grad_residual = res;
    const FiberingCoefficients c = fibering_coeffs(r.solution, problem);
    r.nehari_residual = nehari_residual(c);
    r.h_second = h_second(c, 1.0);
    r.positivity_min = min_on(r.solution, omega_inner);
    r.mu_norm = std::sqrt(c.munorm2);
}

double energy_scale(const EnergyBreakdown& e, const ProblemData& problem) {
    return std::abs(0.25 * problem.a * e.dnorm4) + std::abs(0.5 * e.munorm2) + std::abs(e.q_term / problem.p) +
           std::abs(0.5 * problem.lambda * e.f_term);
}

double residual_on(const GridFunction& g, const ActiveSet& set) {
    double res = 0.0;
    for (std::size_t k : set.nodes()) {
        res = std::max(res, std::abs(g.values[k]));
    }
    return res;
}

// Core descent; throws BranchAbsent if the starting ray misses the branch.
SolveReport descend(const ProblemData& problem, Branch branch, const GridFunction& u_init, const SolverOptions& opts,
                    const ActiveSet& set) {
    problem.validate();
    const auto omega_inner = omega_interior(problem.grid, problem.fields.omega_mask);
    const double w = problem.grid.cell_volume();

    GridFunction u = u_init;
    clamp_to_active(u, set);
    NehariProjection proj = project_to_nehari(u, problem, branch);
    u = std::move(proj.u);
    double J = energy(u, problem).J;

    std::vector<double> mass(problem.grid.size());
    for (std::size_t k = 0; k < mass.size(); ++k) {
        mass[k] = problem.mu * problem.fields.V.values[k] + 1.0;
    }

    SolveReport rep;
    rep.branch = branch;
    double eta = 1.0;
    int it = 0;
    for (;; ++it) {
        const GridFunction g = energy_gradient(u, problem);
        const double res = residual_on(g, set);
        if (res <= opts.tol_grad) {
            break;
        }
        if (it >= opts.max_iterations) {
            rep.message = "max iterations reached";
            break;
        }
        const double kirchhoff = problem.a * dirichlet_norm_sq(u) + 1.0;
        // (kL + μV + I) with the Laplacian scaled by the current Kirchhoff factor.
        std::vector<double> diag(mass);
        SpMat H = set.stiffness({}, kirchhoff);
        for (std::size_t s = 0; s < set.size(); ++s) {
            H.coeffRef(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s)) += diag[set.nodes()[s]];
        }
        Eigen::SimplicialLDLT<SpMat> ldlt(H);
        if (ldlt.info() != Eigen::Success) {
            throw SolverError("preconditioner factorization failed");
        }
        const Eigen::VectorXd gr = set.gather(g.values);
        const Eigen::VectorXd sr = ldlt.solve(gr);
        const double slope = w * gr.dot(sr);
        const std::vector<double> s = set.scatter(sr);

        eta = std::min(1.0, 2.0 * eta);
        bool accepted = false;
        std::string last_failure;
        while (eta >= opts.min_step) {
            GridFunction trial = u;
            for (std::size_t k : set.nodes()) {
                trial.values[k] = u.values[k] - eta * s[k];
            }
            clamp_to_active(trial, set);
            try {
                NehariProjection tp = project_to_nehari(trial, problem, branch);
                const EnergyBreakdown et = energy(tp.u, problem);
                const double Jt = et.J;
                // J is a difference of terms much larger than itself near large
                // solutions; changes below this size are rounding.
                const double noise = 64.0 * std::numeric_limits<double>::epsilon() * energy_scale(et, problem);
                bool ok = J - Jt > noise && Jt <= J - opts.armijo * eta * slope;
                if (!ok && Jt <= J + noise) {
                    ok = residual_on(energy_gradient(tp.u, problem), set) < res;
                }
                if (ok) {
                    u = std::move(tp.u);
                    J = Jt;
                    accepted = true;
                    break;
                }
            } catch (const FiberingError& e) {
                last_failure = e.what();
            }
            eta *= 0.5;
        }
        if (!accepted) {
            rep.message = last_failure.empty() ? "step-size collapse" : "branch vanished: " + last_failure;
            break;
        }
    }
    rep.solution = std::move(u);
    rep.iterations = it;
    fill_report(rep, problem, set, omega_inner);
    rep.converged = certify(rep, opts);
    if (rep.converged) {
        rep.message = "converged";
    } else if (rep.message.empty()) {
        rep.message = "certificate failed";
    }
    return rep;
}

std::vector<std::uint8_t> default_active(const ProblemData& problem, const std::vector<std::uint8_t>* active) {
    return active ? *active : box_interior(problem.grid);
}

GridFunction gaussian_in_omega(const ProblemData& problem, double width) {
    GridFunction u(problem.grid);
    const auto inner = box_interior(problem.grid);
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (!inner[k]) continue;
        double r2 = 0.0;
        for (int ax = 0; ax < problem.grid.dim(); ++ax) {
            const double x = problem.grid.coord(k, ax);
            r2 += x * x;
        }
        u.values[k] = std::exp(-r2 / (2.0 * width * width));
    }
    return u;
}

}  // namespace

bool certify(const SolveReport& r, const SolverOptions& opts) {
    const bool branch_ok = r.branch == Branch::minus ? r.h_second < 0.0 : r.h_second > 0.0;
    return r.grad_residual <= opts.tol_grad && r.nehari_residual <= opts.tol_nehari && r.positivity_min > 0.0 &&
           branch_ok;
}

SolveReport minimize_on_branch(const ProblemData& problem, Branch branch, const GridFunction& u_init,
                               const SolverOptions& opts, const std::vector<std::uint8_t>* active) {
    const ActiveSet set(problem.grid, default_active(problem, active));
    try {
        SolveReport r = descend(problem, branch, u_init, opts, set);
        r.seed = "given";
        return r;
    } catch (const BranchAbsent&) {
        if (active) {
            throw;
        }
    }
    return solve_multistart(problem, branch, default_seeds(problem), opts);
}

std::vector<std::string> seed_names() { return {"phi1", "phi_mu", "limit", "bump", "bump_narrow", "bump_tight"}; }

NamedSeed make_seed(const ProblemData& problem, const std::string& name) {
    const double r = problem.fields.omega_radius > 0.0 ? problem.fields.omega_radius : 1.0;
    if (name == "phi1") {
        return {name, principal_eig_omega(problem.fields, problem.grid).eigenfunction};
    }
    if (name == "phi_mu") {
        return {name, principal_eig_full(problem).eigenfunction};
    }
    if (name == "limit") {
        return {name, solve_limit_problem(problem.fields, problem.grid, problem.p, problem.lambda).w};
    }
    if (name == "bump") return {name, gaussian_in_omega(problem, 0.5 * r)};
    if (name == "bump_narrow") return {name, gaussian_in_omega(problem, 0.25 * r)};
    if (name == "bump_tight") return {name, gaussian_in_omega(problem, 0.125 * r)};
    throw DomainError("unknown seed '" + name + "'");
}

std::vector<NamedSeed> default_seeds(const ProblemData& problem) {
    std::vector<NamedSeed> out;
    for (const auto& name : seed_names()) {
        if (name == "limit") {
            if (!(problem.p > 2.0 && problem.p < 4.0) || problem.lambda < 0.0) {
                continue;
            }
            try {
                out.push_back(make_seed(problem, name));
            } catch (const std::exception&) {
                // λ at or above λ₁(f_Ω): the limit problem has no ground state.
            }
            continue;
        }
        out.push_back(make_seed(problem, name));
    }
    return out;
}

SolveReport solve_multistart(const ProblemData& problem, Branch branch, const std::vector<NamedSeed>& seeds,
                             const SolverOptions& opts) {
    const ActiveSet set(problem.grid, box_interior(problem.grid));
    std::vector<std::future<std::optional<SolveReport>>> tasks;
    for (const auto& seed : seeds) {
        tasks.push_back(std::async(std::launch::async, [&, seed]() -> std::optional<SolveReport> {
            try {
                SolveReport r = descend(problem, branch, seed.u, opts, set);
                r.seed = seed.name;
                return r;
            } catch (const FiberingError&) {
                return std::nullopt;
            }
        }));
    }
    std::optional<SolveReport> best;
    std::vector<std::string> skipped;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        auto r = tasks[i].get();
        if (!r) {
            skipped.push_back(seeds[i].name);
            continue;
        }
        if (!best) {
            best = std::move(r);
            continue;
        }
        const bool better = r->converged != best->converged
                                ? r->converged
                                : (r->converged ? r->energy.J < best->energy.J : r->grad_residual < best->grad_residual);
        if (better) {
            best = std::move(r);
        }
    }
    if (!best) {
        std::ostringstream os;
        os << "no seed has a multiple on the " << to_string(branch) << " branch";
        throw BranchAbsent(os.str());
    }
    return *best;
}

std::string to_json(const SolveReport& r) {
    nlohmann::ordered_json j;
    j["branch"] = to_string(r.branch);
    j["seed"] = r.seed;
    j["converged"] = r.converged;
    j["message"] = r.message;
    j["iterations"] = r.iterations;
    j["energy"] = nlohmann::ordered_json::parse(to_json(r.energy));
    j["grad_residual"] = r.grad_residual;
    j["nehari_residual"] = r.nehari_residual;
    j["positivity_min"] = r.positivity_min;
    j["h_second"] = r.h_second;
    j["mu_norm"] = r.mu_norm;
    return j.dump();
}

LimitGroundState solve_limit_problem(const CoefficientFields& fields, const Grid& grid, double p, double lambda,
                                     const SolverOptions& opts) {
    if (!(p > 2.0 && p < 4.0)) {
        throw DomainError("limit problem needs 2 < p < 4");
    }
    if (lambda < 0.0) {
        throw DomainError("limit problem needs lambda >= 0");
    }
    const EigenResult eig = principal_eig_omega(fields, grid);
    if (!(lambda < eig.eigenvalue)) {
        throw DomainError("limit problem needs lambda below the principal eigenvalue on omega");
    }
    ProblemData local{grid, fields, 0.0, p, lambda, 1.0, std::nullopt};
    const auto inner = omega_interior(grid, fields.omega_mask);
    const ActiveSet set(grid, inner);

    LimitGroundState out;
    out.report = descend(local, Branch::minus, eig.eigenfunction, opts, set);
    out.report.seed = "phi1";
    out.w = out.report.solution;
    const FiberingCoefficients c = fibering_coeffs(out.w, local);
    out.gradient_term = c.B;
    out.q_term = c.C;
    out.alpha_infty = 0.5 * c.B - c.C / p;
    const double k = 2.0 * p / (p - 2.0);
    out.identity_residual =
        std::max(std::abs(c.B - c.C), std::abs(c.C - k * out.alpha_infty)) / std::max(std::abs(c.C), 1e-300);
    return out;
}

GroundStateScalings t_scalings_of_ground_state(const GridFunction& w, const ProblemData& problem) {
    if (!(problem.p > 2.0 && problem.p < 4.0)) {
        throw DomainError("ground-state scalings need 2 < p < 4");
    }
    const FiberingCoefficients c = fibering_coeffs(w, problem);
    const DegenerateParams d = degenerate_params(c);
    GroundStateScalings out;
    out.a_degenerate = d.a;
    out.t_degenerate = d.t;
    out.pivot = std::pow(2.0 / (4.0 - problem.p), 1.0 / (problem.p - 2.0));
    if (!(problem.a < d.a)) {
        throw BranchAbsent("Kirchhoff coefficient is at or above a(w); the fibering map has no stationary point");
    }
    const auto tm = branch_root(c, Branch::minus);
    const auto tp = branch_root(c, Branch::plus);
    if (!tm || !tp) {
        throw BranchAbsent("ground-state fibering map lost a stationary point");
    }
    out.t_minus = *tm;
    out.t_plus = *tp;
    return out;
}

}  // namespace kirchhoff
