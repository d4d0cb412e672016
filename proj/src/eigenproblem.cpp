#include "kirchhoff/eigenproblem.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>

#include <Eigen/SparseCholesky>

#include "kirchhoff/functionals.hpp"
#include "kirchhoff/operators.hpp"

namespace kirchhoff {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Factor = Eigen::SimplicialLDLT<SpMat>;

SpMat diagonal(const Eigen::VectorXd& d) {
    SpMat D(d.size(), d.size());
    D.reserve(Eigen::VectorXi::Ones(d.size()));
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        D.insert(i, i) = d[i];
    }
    D.makeCompressed();
    return D;
}

// Sylvester: K - σF is positive definite iff its LDLᵀ pivots are all positive.
bool positive_definite(Factor& factor, const SpMat& K, const SpMat& F, double sigma) {
    factor.compute(K - sigma * F);
    return factor.info() == Eigen::Success && factor.vectorD().minCoeff() > 0.0;
}

double rayleigh(const SpMat& K, const Eigen::VectorXd& fw, const Eigen::VectorXd& x, double& denom) {
    denom = x.dot(fw.cwiseProduct(x));
    return x.dot(K * x) / denom;
}

}  // namespace

EigenResult principal_weighted_eig(const Grid& grid, const std::vector<std::uint8_t>& active,
                                   std::span<const double> potential, const GridFunction& weight,
                                   const EigenOptions& opts) {
    const ActiveSet set(grid, active);
    const SpMat K = set.stiffness(potential);
    const Eigen::VectorXd fw = set.gather(weight.values);
    if (!(fw.maxCoeff() > 0.0)) {
        throw EigenError("no positive eigenvalue: weight is nonpositive on the active nodes");
    }
    const SpMat F = diagonal(fw);
    Factor factor;

    // Upper bound from positive trial vectors; K is an M-matrix so K⁻¹ keeps positivity.
    Eigen::VectorXd x = fw.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; });
    double denom = 0.0;
    double upper = rayleigh(K, fw, x, denom);
    factor.compute(K);
    if (factor.info() != Eigen::Success) {
        throw EigenError("stiffness factorization failed");
    }
    for (int k = 0; k < 3; ++k) {
        Eigen::VectorXd y = factor.solve(fw.cwiseMax(0.0).cwiseProduct(x));
        y /= y.maxCoeff();
        const double th = rayleigh(K, fw, y, denom);
        if (denom > 0.0 && th < upper) {
            upper = th;
            x = y;
        }
    }

    double lower = 0.0;
    while (upper - lower > 1e-3 * upper) {
        const double mid = 0.5 * (lower + upper);
        if (positive_definite(factor, K, F, mid)) {
            lower = mid;
        } else {
            upper = mid;
        }
    }
    double sigma = lower;
    if (!positive_definite(factor, K, F, sigma)) {
        throw EigenError("shifted operator lost definiteness");
    }

    EigenResult res;
    double theta = upper;
    int negative_streak = 0;
    for (int it = 1; it <= opts.max_iterations; ++it) {
        Eigen::VectorXd z = factor.solve(fw.cwiseProduct(x));
        const double m = z.dot(fw.cwiseProduct(z));
        if (!(m > 0.0)) {
            if (++negative_streak > 50) {
                throw EigenError("indefinite denominator: iterate has no positive weighted mass");
            }
            x = z / z.norm();
            continue;
        }
        negative_streak = 0;
        x = z / std::sqrt(m);
        theta = rayleigh(K, fw, x, denom);
        const Eigen::VectorXd kx = K * x;
        const double scale = std::max(1.0, kx.cwiseAbs().maxCoeff());
        res.residual = (kx - theta * fw.cwiseProduct(x)).cwiseAbs().maxCoeff() / scale;
        res.iterations = it;
        if (res.residual <= opts.tol) {
            break;
        }
        // Tighten the shift while it stays strictly below the eigenvalue.
        const double candidate = sigma + 0.5 * (theta - sigma);
        if (theta - sigma > 1e-6 * theta) {
            if (positive_definite(factor, K, F, candidate)) {
                sigma = candidate;
            } else if (!positive_definite(factor, K, F, sigma)) {
                throw EigenError("shifted operator lost definiteness");
            }
        }
        if (it == opts.max_iterations) {
            throw EigenError("inverse iteration did not converge: residual " +
                             std::to_string(res.residual));
        }
    }

    Eigen::Index peak = 0;
    x.cwiseAbs().maxCoeff(&peak);
    if (x[peak] < 0.0) {
        x = -x;
    }
    GridFunction phi(grid, set.scatter(x));
    const double mass = weighted_mass(phi, weight);
    if (!(mass > 0.0)) {
        throw EigenError("indefinite denominator at convergence");
    }
    const double s = 1.0 / std::sqrt(mass);
    for (double& v : phi.values) {
        v *= s;
    }
    res.eigenvalue = theta;
    res.eigenfunction = std::move(phi);
    res.dirichlet_norm_sq = dirichlet_norm_sq(res.eigenfunction);
    return res;
}

EigenResult principal_eig_omega(const CoefficientFields& fields, const Grid& grid, const EigenOptions& opts) {
    const auto inner = omega_interior(grid, fields.omega_mask);
    if (std::none_of(inner.begin(), inner.end(), [](auto m) { return m != 0; })) {
        throw EigenError("zero set of V has no interior nodes at this resolution");
    }
    return principal_weighted_eig(grid, inner, {}, fields.f, opts);
}

EigenResult principal_eig_full(const ProblemData& problem, const EigenOptions& opts) {
    if (!(problem.mu > 0.0)) {
        throw DomainError("mu must be positive");
    }
    std::vector<double> potential(problem.grid.size());
    for (std::size_t k = 0; k < potential.size(); ++k) {
        potential[k] = problem.mu * problem.fields.V.values[k];
    }
    return principal_weighted_eig(problem.grid, box_interior(problem.grid), potential, problem.fields.f,
                                  opts);
}

WellSweep well_convergence_sweep(const ProblemData& problem, std::span<const double> mu_list,
                                 const EigenOptions& opts) {
    if (mu_list.empty()) {
        throw DomainError("mu list is empty");
    }
    for (std::size_t k = 1; k < mu_list.size(); ++k) {
        if (!(mu_list[k] > mu_list[k - 1])) {
            throw DomainError("mu list must be strictly increasing");
        }
    }
    const EigenResult omega = principal_eig_omega(problem.fields, problem.grid, opts);

    std::vector<std::future<WellSweepRow>> tasks;
    tasks.reserve(mu_list.size());
    for (double mu : mu_list) {
        tasks.push_back(std::async(std::launch::async, [&problem, &omega, &opts, mu] {
            ProblemData local = problem;
            local.mu = mu;
            const EigenResult r = principal_eig_full(local, opts);
            GridFunction diff = r.eigenfunction;
            for (std::size_t k = 0; k < diff.size(); ++k) {
                diff.values[k] -= omega.eigenfunction.values[k];
            }
            return WellSweepRow{mu, r.eigenvalue, std::sqrt(quad_dot(diff, diff)), r.iterations, r.residual};
        }));
    }
    WellSweep out;
    out.lambda1 = omega.eigenvalue;
    for (auto& t : tasks) {
        out.rows.push_back(t.get());
    }
    for (std::size_t k = 0; k < out.rows.size(); ++k) {
        if (k > 0 && out.rows[k].lambda_tilde < out.rows[k - 1].lambda_tilde) {
            out.monotone = false;
        }
        if (!(out.rows[k].lambda_tilde < out.lambda1)) {
            out.below_limit = false;
        }
    }
    return out;
}

std::string to_csv(const WellSweep& sweep) {
    std::ostringstream os;
    os.precision(17);
    os << "mu,lambda_tilde,l2_gap,iterations,residual\n";
    for (const auto& r : sweep.rows) {
        os << r.mu << ',' << r.lambda_tilde << ',' << r.l2_gap << ',' << r.iterations << ',' << r.residual
           << '\n';
    }
    return os.str();
}

}  // namespace kirchhoff
