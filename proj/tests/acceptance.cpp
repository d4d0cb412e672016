// Acceptance run on the reference 1D scenario: one PASS/FAIL line per criterion.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "kirchhoff/eigenproblem.hpp"
#include "kirchhoff/fibering.hpp"
#include "kirchhoff/functionals.hpp"
#include "kirchhoff/nehari_solver.hpp"
#include "kirchhoff/thresholds.hpp"
#include "support.hpp"

using namespace ktest;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& name, double time_limit, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (time_limit > 0.0 && secs > time_limit) {
        o.passed = false;
        o.detail += " (over time limit " + std::to_string(time_limit) + " s)";
    }
    if (!o.passed) ++failures;
    std::printf("%s %2d %-28s %7.2fs  %s\n", o.passed ? "PASS" : "FAIL", id, name.c_str(), secs, o.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

ProblemData scen(double a = 0.1, double p = 5.0, double lambda = 0.0, double mu = 1e4,
                 const std::string& q = "poly:1,0,-2") {
    return problem(a, p, lambda, mu, q, 401);
}

GridFunction axpy(const GridFunction& u, double e, const GridFunction& v) {
    GridFunction w = u;
    for (std::size_t k = 0; k < w.size(); ++k) w.values[k] += e * v.values[k];
    return w;
}

// Composite Simpson on a uniform 1D grid with an odd node count.
double simpson(const Grid& g, const std::vector<double>& v) {
    const std::size_t n = g.size();
    double s = v.front() + v.back();
    for (std::size_t k = 1; k + 1 < n; ++k) s += (k % 2 ? 4.0 : 2.0) * v[k];
    return s * g.spacing(0) / 3.0;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

int main() {
    const ProblemData base = scen();
    const EigenResult eig = principal_eig_omega(base.fields, base.grid);
    const double l1 = eig.eigenvalue;

    criterion(1, "eigen limit", 10.0, [&] {
        const std::vector<double> mus{10.0, 100.0, 1000.0, 10000.0};
        const WellSweep sw = well_convergence_sweep(base, mus);
        const EigenResult deep = principal_eig_full(scen(0.1, 5.0, 0.0, 1e4));
        GridFunction diff = deep.eigenfunction;
        for (std::size_t k = 0; k < diff.size(); ++k) {
            const double x = base.grid.coord(k, 0);
            diff.values[k] -= std::abs(x) < 1.0 ? std::cos(kPi * x / 2.0) : 0.0;
        }
        const double gap = std::sqrt(quad_dot(diff, diff));
        const double err = std::abs(sw.rows.back().lambda_tilde - kLambdaInterval) / kLambdaInterval;
        return Outcome{sw.monotone && sw.below_limit && err <= 0.01 && gap <= 0.05,
                       fmt("lambda_tilde(1e4)=%.6f rel.err=%.4f L2 gap=%.4f lambda1=%.6f", sw.rows.back().lambda_tilde,
                           err, gap, l1) +
                           (sw.monotone ? " monotone" : " NOT monotone") + (sw.below_limit ? " below" : " NOT below")};
    });

    criterion(2, "normalization identities", 0.0, [&] {
        const double mass = std::abs(weighted_mass(eig.eigenfunction, base.fields.f) - 1.0);
        const double dir = std::abs(dirichlet_norm_sq(eig.eigenfunction) - l1);
        return Outcome{mass <= 1e-4 && dir <= 1e-3 * l1, fmt("|mass-1|=%.2e |D-lambda1|/lambda1=%.2e", mass, dir / l1)};
    });

    criterion(3, "Nehari triple identity", 5.0, [&] {
        ProblemData prob = scen(0.05, 5.0, 0.5 * l1);
        std::mt19937_64 rng(103);
        int n = 0;
        double worst = 0.0;
        while (n < 500) {
            for (double p : {2.5, 3.0, 4.0, 5.0}) {
                prob.p = p;
                const GridFunction u = random_in_omega(prob.grid, rng);
                for (Branch b : {Branch::minus, Branch::plus}) {
                    try {
                        const NehariProjection np = project_to_nehari(u, prob, b);
                        worst = std::max(worst, nehari_triple(np.coeffs).max_rel_diff);
                        ++n;
                        break;
                    } catch (const BranchAbsent&) {
                    }
                }
            }
        }
        return Outcome{worst <= 1e-10, fmt("samples=%.0f worst pairwise rel.diff=%.2e", n, worst)};
    });

    criterion(4, "gap inequality", 0.0, [&] {
        ProblemData prob = scen();
        const double lt = principal_eig_full(prob).eigenvalue;
        prob.lambda = 0.5 * lt;
        std::mt19937_64 rng(104);
        int violations = 0;
        for (int i = 0; i < 500; ++i) {
            const GridFunction u = random_fn(prob.grid, rng);
            const double m = mu_norm_sq(u, prob);
            const double b = m - prob.lambda * weighted_mass(u, prob.fields.f);
            if (b < (lt - prob.lambda) / lt * m - 1e-10 * m) ++violations;
        }
        return Outcome{violations == 0, fmt("violations=%.0f of 500", violations)};
    });

    criterion(5, "degenerate closed forms", 0.0, [&] {
        FiberingCoefficients c;
        c.A = 1.0;
        c.B = 1.0;
        c.C = 2.0;
        c.p = 3.0;
        const DegenerateParams d = degenerate_params(c);
        c.a = d.a;
        bool ok = std::abs(d.t - 1.0) <= 1e-12 && std::abs(d.a - 1.0) <= 1e-12 && std::abs(h_prime(c, d.t)) <= 1e-12;
        for (double t : {0.25, 0.5, 2.0, 3.0}) ok = ok && std::abs(h_prime(c, t) - t * (t - 1) * (t - 1)) <= 1e-12 * t * t * t;
        std::mt19937_64 rng(105);
        std::uniform_real_distribution<double> pos(0.1, 5.0), pd(2.05, 3.95);
        double w1 = 0.0, w2 = 0.0;
        for (int i = 0; i < 100; ++i) {
            FiberingCoefficients r;
            r.A = pos(rng);
            r.B = pos(rng);
            r.C = pos(rng);
            r.p = pd(rng);
            const DegenerateParams dr = degenerate_params(r);
            r.a = dr.a;
            w1 = std::max(w1, std::abs(h_prime(r, dr.t)));
            w2 = std::max(w2, std::abs(h_second(r, dr.t)));
        }
        ok = ok && w1 <= 1e-9 && w2 <= 1e-8;
        return Outcome{ok, fmt("t=%.15f a=%.15f max|h'|=%.2e max|h''|=%.2e", d.t, d.a, w1, w2)};
    });

    criterion(6, "fibering structure p=5", 0.0, [&] {
        const ProblemData prob = scen(0.1, 5.0, 0.5 * l1);
        std::mt19937_64 rng(106);
        int tested = 0, bad = 0;
        while (tested < 500) {
            const FiberingCoefficients c = fibering_coeffs(random_in_omega(prob.grid, rng), prob);
            if (!(c.B > 0.0 && c.C > 0.0)) continue;
            ++tested;
            const FiberClass fc = stationary_points(c);
            if (fc.roots.size() != 1 || fc.roots[0].kind != RootKind::max) ++bad;
        }
        return Outcome{bad == 0, fmt("directions=%.0f with other structure=%.0f", tested, bad)};
    });

    criterion(7, "non-existence at p=4", 30.0, [&] {
        ProblemData prob = scen(0.0, 4.0, 0.5 * l1);
        const QuotientEstimate g0 = estimate_gamma0(prob.fields, prob.grid);
        prob.a = 1.05 * g0.best;
        std::mt19937_64 rng(107);
        int bad = 0;
        for (int i = 0; i < 1000; ++i) {
            const GridFunction u = random_fn(prob.grid, rng, i % 2 == 0);
            const FiberingCoefficients c = fibering_coeffs(u, prob);
            bool ok = c.C - prob.a * c.A < 0.0 && stationary_points(c).roots.empty();
            for (double t : {1e-3, 0.1, 1.0, 10.0, 1e3}) ok = ok && h_prime(c, t) > 0.0;
            if (!ok) ++bad;
        }
        return Outcome{g0.best > 0.0 && bad == 0,
                       fmt("gamma0_est=%.6f a=%.6f directions with Nehari points=%.0f of 1000", g0.best, prob.a, bad)};
    });

    const std::string q8 = "poly:1,0,-16";
    criterion(8, "two positive solutions", 120.0, [&] {
        ProblemData prob = scen(0.5, 5.0, 0.0, 1e4, q8);
        const Phi1Sign s = phi1_sign_condition(prob.fields, prob.grid, 5.0);
        prob.lambda = 1.01 * s.lambda1;
        const auto seeds = default_seeds(prob);
        const SolveReport m = solve_multistart(prob, Branch::minus, seeds);
        const SolveReport p = solve_multistart(prob, Branch::plus, seeds);
        const bool ok = s.integral < 0.0 && m.converged && p.converged && m.energy.J > 0.0 && p.energy.J < 0.0 &&
                        m.positivity_min > 0.0 && p.positivity_min > 0.0 && m.grad_residual <= 1e-6 &&
                        p.grad_residual <= 1e-6;
        return Outcome{ok, fmt("int Q phi1^5=%.4e J-=%.6g J+=%.6g", s.integral, m.energy.J, p.energy.J) +
                               fmt(" res-=%.1e res+=%.1e", m.grad_residual, p.grad_residual)};
    });

    criterion(9, "sign functional oracle", 0.0, [&] {
        double worst = 0.0;
        for (const std::string& q : {std::string("poly:1,0,-2"), q8}) {
            for (double p : {4.0, 5.0}) {
                const ProblemData prob = scen(0.1, p, 0.0, 1e4, q);
                const double v = phi1_sign_condition(prob.fields, prob.grid, p).integral;
                const Grid fine = Grid::line(-2.0, 2.0, 4 * 400 + 1);
                const CoefficientFields ff = well_fields(fine, q);
                const EigenResult ef = principal_eig_omega(ff, fine);
                std::vector<double> integrand(fine.size());
                for (std::size_t k = 0; k < fine.size(); ++k) {
                    const double phi = std::max(ef.eigenfunction.values[k], 0.0);
                    integrand[k] = ff.omega_mask[k] ? ff.Q.values[k] * std::pow(phi, p) : 0.0;
                }
                const double oracle = simpson(fine, integrand);
                worst = std::max(worst, std::abs(v - oracle) / std::abs(oracle));
            }
        }
        return Outcome{worst <= 1e-4, fmt("worst relative difference=%.2e", worst)};
    });

    criterion(10, "ground-state scalings", 0.0, [&] {
        ProblemData prob = scen(0.0, 3.0, 0.0);
        const LimitGroundState gs = solve_limit_problem(prob.fields, prob.grid, 3.0, 0.0);
        const double aw = degenerate_params(gs.w, prob).a;
        prob.a = 0.1 * aw;
        const GroundStateScalings s = t_scalings_of_ground_state(gs.w, prob);
        bool ok = 1.0 < s.t_minus && s.t_minus < 2.0 && 2.0 < s.t_plus;
        double prev = s.t_minus;
        for (double frac : {0.05, 0.02, 0.01, 0.005, 0.001}) {
            prob.a = frac * aw;
            const double tm = t_scalings_of_ground_state(gs.w, prob).t_minus;
            ok = ok && tm < prev && tm > 1.0;
            prev = tm;
        }
        return Outcome{ok, fmt("a(w)=%.6g t-=%.6f t+=%.6f t-(a=0.001 a(w))=%.6f", aw, s.t_minus, s.t_plus, prev)};
    });

    criterion(11, "limit-problem identity", 0.0, [&] {
        const ProblemData prob = scen(0.0, 3.0, 0.0, 1e4, "const:1");
        const LimitGroundState gs = solve_limit_problem(prob.fields, prob.grid, 3.0, 0.0);
        return Outcome{gs.report.converged && gs.identity_residual <= 1e-6,
                       fmt("alpha=%.8g relative residual=%.2e", gs.alpha_infty, gs.identity_residual)};
    });

    criterion(12, "gradient oracle", 0.0, [&] {
        const ProblemData prob = scen(0.1, 5.0, 0.5 * l1);
        std::mt19937_64 rng(112);
        double worst = 0.0;
        for (int i = 0; i < 20; ++i) {
            const GridFunction u = random_fn(prob.grid, rng);
            const GridFunction v = random_fn(prob.grid, rng);
            const double exact = quad_dot(energy_gradient(u, prob), v);
            const double eps = 1e-5;
            const double fd = (energy(axpy(u, eps, v), prob).J - energy(axpy(u, -eps, v), prob).J) / (2.0 * eps);
            worst = std::max(worst, std::abs(fd - exact) / std::max(std::abs(exact), 1.0));
        }
        return Outcome{worst <= 1e-6, fmt("worst relative difference=%.2e over 20 pairs", worst)};
    });

    criterion(13, "sweep determinism", 0.0, [&] {
        const auto root = std::filesystem::temp_directory_path() / "kirchhoff_acceptance";
        std::filesystem::remove_all(root);
        const std::string config = KIRCHHOFF_SOURCE_DIR "/configs/scen1d.ini";
        std::vector<std::filesystem::path> dirs{root / "run1", root / "run2"};
        for (const auto& d : dirs) {
            const std::string cmd = std::string("\"") + KIRCHHOFF_CLI + "\" sweep --config \"" + config + "\" --out \"" +
                                    d.string() + "\" > /dev/null";
            if (std::system(cmd.c_str()) != 0) return Outcome{false, "sweep command failed"};
        }
        int files = 0, differing = 0;
        for (const auto& e : std::filesystem::directory_iterator(dirs[0])) {
            ++files;
            const auto other = dirs[1] / e.path().filename();
            if (!std::filesystem::exists(other) || slurp(e.path()) != slurp(other)) ++differing;
        }
        int files2 = 0;
        for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dirs[1])) ++files2;
        std::filesystem::remove_all(root);
        return Outcome{files > 0 && files == files2 && differing == 0,
                       fmt("files=%.0f differing=%.0f", files, differing)};
    });

    std::printf("%d of 13 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
