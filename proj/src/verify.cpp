#include "kirchhoff/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "json.hpp"
#include "kirchhoff/eigenproblem.hpp"
#include "kirchhoff/fibering.hpp"
#include "kirchhoff/functionals.hpp"
#include "kirchhoff/io.hpp"
#include "kirchhoff/nehari_solver.hpp"
#include "kirchhoff/thresholds.hpp"

namespace kirchhoff {

bool VerifyReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::map<std::string, double> default_tolerances() {
    return {
        {"gradient_fd", 1e-6},       {"green_identity", 1e-10},   {"quadrature_linearity", 1e-12},
        {"homogeneity", 1e-12},      {"triple_identity", 1e-10},  {"nehari_projection", 1e-9},
        {"gap_inequality", 1e-10},   {"eigen_monotone", 1e-8},    {"rayleigh_bound", 1e-8},
        {"normalization_identity", 1e-6},  {"double_root", 1e-8},       {"fibering_structure", 0.0},
        {"solution_certificate", 0.0},
    };
}

namespace {

double rel(double x, double y) { return std::abs(x - y) / std::max({std::abs(x), std::abs(y), 1e-300}); }

GridFunction combine(const GridFunction& u, double a, const GridFunction& v, double b) {
    GridFunction w(u.grid);
    for (std::size_t k = 0; k < w.size(); ++k) w.values[k] = a * u.values[k] + b * v.values[k];
    return w;
}

GridFunction scaled(const GridFunction& u, double t) {
    GridFunction w = u;
    for (double& x : w.values) x *= t;
    return w;
}

class Suite {
public:
    Suite(const Scenario& s, const VerifyOptions& opts) : s_(s), opts_(opts), rng_(s.seed) {
        tol_ = default_tolerances();
        for (const auto& [k, v] : opts.tolerances) {
            if (!tol_.contains(k)) throw ConfigError("unknown check '" + k + "'");
            tol_[k] = v;
        }
    }

    VerifyReport run() {
        VerifyReport rep;
        rep.seed = s_.seed;
        const ProblemData prob = first_problem(s_);
        const std::vector<void (Suite::*)(const ProblemData&, VerifyReport&)> checks{
            &Suite::gradient_fd,     &Suite::green_identity, &Suite::quadrature_linearity, &Suite::homogeneity,
            &Suite::triple_identity, &Suite::gap_inequality, &Suite::eigen_checks,         &Suite::double_root,
            &Suite::fibering_structure, &Suite::certificates,
        };
        for (auto c : checks) {
            (this->*c)(prob, rep);
        }
        return rep;
    }

private:
    GridFunction random(const Grid& g, bool positive) { return random_smooth_function(g, rng_, positive); }

    void add(VerifyReport& rep, const std::string& name, double value, std::string detail = {}) {
        const double tol = tol_.at(name);
        rep.checks.push_back({name, std::isfinite(value) && value <= tol, value, tol, std::move(detail)});
    }

    void gradient_fd(const ProblemData& prob, VerifyReport& rep) {
        double worst = 0.0;
        for (int i = 0; i < 20; ++i) {
            const GridFunction u = random(prob.grid, false);
            const GridFunction v = random(prob.grid, false);
            GridFunction g = energy_gradient(u, prob);
            if (opts_.inject_gradient_fault) {
                for (std::size_t k = 0; k + 1 < g.size(); ++k) g.values[k] = g.values[k + 1];
            }
            const double exact = quad_dot(g, v);
            for (double eps : {1e-4, 1e-5}) {
                const double fd =
                    (energy(combine(u, 1, v, eps), prob).J - energy(combine(u, 1, v, -eps), prob).J) / (2 * eps);
                worst = std::max(worst, std::abs(fd - exact) / (1.0 + std::abs(exact)));
            }
        }
        add(rep, "gradient_fd", worst, opts_.inject_gradient_fault ? "fault injected" : "");
    }

    void green_identity(const ProblemData& prob, VerifyReport& rep) {
        double worst = 0.0;
        for (int i = 0; i < 20; ++i) {
            const GridFunction u = random(prob.grid, false);
            const GridFunction v = random(prob.grid, false);
            const double lhs = quad_dot(u, apply_laplacian(v));
            const double rhs = gradient_dot(prob.grid, u.values, v.values);
            worst = std::max(worst, std::abs(lhs - rhs) / std::max(std::abs(lhs) + std::abs(rhs), 1e-300));
        }
        add(rep, "green_identity", worst);
    }

    void quadrature_linearity(const ProblemData& prob, VerifyReport& rep) {
        double worst = 0.0;
        std::uniform_real_distribution<double> coef(-2.0, 2.0);
        for (int i = 0; i < 20; ++i) {
            const GridFunction u = random(prob.grid, false);
            const GridFunction v = random(prob.grid, false);
            const double a = coef(rng_), b = coef(rng_);
            const double lhs = integrate(combine(u, a, v, b));
            const double rhs = a * integrate(u) + b * integrate(v);
            const double scale = std::abs(a * integrate(u)) + std::abs(b * integrate(v)) + 1e-300;
            worst = std::max(worst, std::abs(lhs - rhs) / scale);
        }
        add(rep, "quadrature_linearity", worst);
    }

    void homogeneity(const ProblemData& prob, VerifyReport& rep) {
        double worst = 0.0;
        for (int i = 0; i < 20; ++i) {
            const GridFunction u = random(prob.grid, false);
            const double t = 0.5 + 0.25 * i;
            const EnergyBreakdown e = energy(u, prob);
            const EnergyBreakdown et = energy(scaled(u, t), prob);
            worst = std::max({worst, rel(et.dnorm4, std::pow(t, 4) * e.dnorm4), rel(et.munorm2, t * t * e.munorm2),
                              rel(et.q_term, std::pow(t, prob.p) * e.q_term), rel(et.f_term, t * t * e.f_term)});
        }
        add(rep, "homogeneity", worst);
    }

    void triple_identity(const ProblemData& prob, VerifyReport& rep) {
        double worst_triple = 0.0, worst_nehari = 0.0;
        int projected = 0;
        for (int i = 0; i < opts_.samples; ++i) {
            const GridFunction u = random(prob.grid, true);
            for (Branch b : {Branch::minus, Branch::plus}) {
                try {
                    const NehariProjection np = project_to_nehari(u, prob, b);
                    worst_triple = std::max(worst_triple, nehari_triple(np.coeffs).max_rel_diff);
                    worst_nehari = std::max(worst_nehari, np.nehari_residual);
                    ++projected;
                } catch (const BranchAbsent&) {
                }
            }
        }
        const std::string d = std::to_string(projected) + " projections";
        add(rep, "triple_identity", projected ? worst_triple : INFINITY, d);
        add(rep, "nehari_projection", projected ? worst_nehari : INFINITY, d);
    }

    void gap_inequality(const ProblemData& prob, VerifyReport& rep) {
        const double lt = principal_eig_full(prob).eigenvalue;
        ProblemData half = prob;
        half.lambda = 0.5 * lt;
        double worst = 0.0;
        for (int i = 0; i < opts_.samples; ++i) {
            const GridFunction u = random(prob.grid, false);
            const FiberingCoefficients c = fibering_coeffs(u, half);
            const double bound = (lt - half.lambda) / lt * c.munorm2;
            worst = std::max(worst, (bound - c.B) / c.munorm2);
        }
        add(rep, "gap_inequality", worst);
    }

    void eigen_checks(const ProblemData& prob, VerifyReport& rep) {
        std::vector<double> mus{10.0, 100.0, 1000.0};
        for (double m : s_.mu) mus.push_back(m);
        std::sort(mus.begin(), mus.end());
        mus.erase(std::unique(mus.begin(), mus.end()), mus.end());
        const WellSweep sw = well_convergence_sweep(prob, mus);
        double worst = 0.0;
        for (std::size_t i = 0; i < sw.rows.size(); ++i) {
            worst = std::max(worst, sw.rows[i].lambda_tilde - sw.lambda1);
            if (i > 0) worst = std::max(worst, sw.rows[i - 1].lambda_tilde - sw.rows[i].lambda_tilde);
        }
        add(rep, "eigen_monotone", worst, std::to_string(sw.rows.size()) + " well depths");

        const EigenResult full = principal_eig_full(prob);
        double rb = 0.0;
        for (int i = 0; i < opts_.samples; ++i) {
            const GridFunction u = random(prob.grid, false);
            const double fm = weighted_mass(u, prob.fields.f);
            if (!(fm > 0.0)) continue;
            rb = std::max(rb, full.eigenvalue - mu_norm_sq(u, prob) / fm);
        }
        add(rep, "rayleigh_bound", rb);

        const EigenResult e1 = principal_eig_omega(prob.fields, prob.grid);
        const double err = std::max(std::abs(weighted_mass(e1.eigenfunction, prob.fields.f) - 1.0),
                                    rel(dirichlet_norm_sq(e1.eigenfunction), e1.eigenvalue));
        add(rep, "normalization_identity", err);
    }

    void double_root(const ProblemData&, VerifyReport& rep) {
        std::uniform_real_distribution<double> pos(0.2, 5.0);
        std::uniform_real_distribution<double> pd(2.05, 3.95);
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            FiberingCoefficients c;
            c.A = pos(rng_);
            c.B = pos(rng_);
            c.C = pos(rng_);
            c.p = pd(rng_);
            const DegenerateParams d = degenerate_params(c);
            c.a = d.a;
            const double t = d.t;
            const double s1 = c.a * c.A * t * t * t + c.B * t + c.C * std::pow(t, c.p - 1.0);
            const double s2 = 3.0 * c.a * c.A * t * t + c.B + (c.p - 1.0) * c.C * std::pow(t, c.p - 2.0);
            worst = std::max({worst, std::abs(h_prime(c, t)) / s1, std::abs(h_second(c, t)) / s2});
        }
        add(rep, "double_root", worst);
    }

    void fibering_structure(const ProblemData& prob, VerifyReport& rep) {
        ProblemData q = prob;
        q.p = 5.0;
        q.lambda = 0.5 * principal_eig_omega(prob.fields, prob.grid).eigenvalue;
        int bad = 0, tested = 0;
        for (int i = 0; i < opts_.samples; ++i) {
            const FiberingCoefficients c = fibering_coeffs(random(prob.grid, true), q);
            if (!(c.B > 0.0 && c.C > 0.0)) continue;
            ++tested;
            const FiberClass fc = stationary_points(c);
            if (fc.roots.size() != 1 || fc.roots[0].kind != RootKind::max) ++bad;
        }
        add(rep, "fibering_structure", tested ? bad : INFINITY, std::to_string(tested) + " samples with B>0, C>0");
    }

    void certificates(const ProblemData& prob, VerifyReport& rep) {
        int failures = 0, converged = 0;
        std::ostringstream detail;
        const double lt = principal_eig_full(prob).eigenvalue;
        for (Branch b : {Branch::minus, Branch::plus}) {
            try {
                const SolveReport r = solve_multistart(prob, b, default_seeds(prob), s_.solver);
                detail << to_string(b) << ":" << (r.converged ? "converged" : r.message) << " ";
                if (!r.converged) continue;
                ++converged;
                if (!certify(r, s_.solver)) ++failures;
                // J >= (1/4)(‖u‖²_μ − λ∫fu²) on the minus branch when p > 4.
                if (b == Branch::minus && prob.p > 4.0 && prob.lambda < lt) {
                    const double bound = 0.25 * (lt - prob.lambda) / lt * r.energy.munorm2;
                    if (r.energy.J < bound - 1e-8) ++failures;
                }
            } catch (const BranchAbsent&) {
                detail << to_string(b) << ":absent ";
            }
        }
        add(rep, "solution_certificate", converged ? failures : INFINITY, detail.str());
    }

    const Scenario& s_;
    VerifyOptions opts_;
    std::mt19937_64 rng_;
    std::map<std::string, double> tol_;
};

}  // namespace

VerifyReport verify_suite(const Scenario& s, const VerifyOptions& opts) { return Suite(s, opts).run(); }

std::string to_json(const VerifyReport& r) {
    nlohmann::ordered_json j;
    j["seed"] = r.seed;
    j["passed"] = r.passed();
    auto arr = nlohmann::ordered_json::array();
    for (const auto& c : r.checks) {
        nlohmann::ordered_json e;
        e["name"] = c.name;
        e["passed"] = c.passed;
        e["value"] = std::isfinite(c.value) ? nlohmann::ordered_json(c.value) : nlohmann::ordered_json(nullptr);
        e["tolerance"] = c.tolerance;
        e["detail"] = c.detail;
        arr.push_back(std::move(e));
    }
    j["checks"] = std::move(arr);
    return j.dump(2) + "\n";
}

}  // namespace kirchhoff
