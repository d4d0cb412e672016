#include "kirchhoff/thresholds.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/SparseCholesky>

#include "json.hpp"
#include "kirchhoff/eigenproblem.hpp"
#include "kirchhoff/fibering.hpp"
#include "kirchhoff/functionals.hpp"
#include "kirchhoff/nehari_solver.hpp"
#include "kirchhoff/operators.hpp"

namespace kirchhoff {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

// A scale-invariant objective on the active nodes. value() returns nullopt
// outside the admissible set.
struct Objective {
    std::function<std::optional<double>(const GridFunction&)> value;
    std::function<GridFunction(const GridFunction&)> gradient;
    std::function<void(GridFunction&)> normalize;
};

struct RunResult {
    double best = -std::numeric_limits<double>::infinity();
    GridFunction argmax;
    long samples = 0;
    bool admissible = false;
};

RunResult ascend(const Objective& obj, const ActiveSet& set, const Eigen::SimplicialLDLT<SpMat>& precond,
                 GridFunction u, int budget) {
    RunResult out;
    const double w = set.grid().cell_volume();
    auto record = [&](const GridFunction& v, double q) {
        ++out.samples;
        if (q > out.best) {
            out.best = q;
            out.argmax = v;
        }
    };
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (!set.contains(k)) u.values[k] = 0.0;
    }
    if (sup_norm(u.values) == 0.0) {
        return out;
    }
    obj.normalize(u);
    auto q0 = obj.value(u);
    if (!q0) {
        return out;
    }
    out.admissible = true;
    double q = *q0;
    record(u, q);
    double eta = 1.0;
    for (int it = 0; it < budget; ++it) {
        const GridFunction g = obj.gradient(u);
        const Eigen::VectorXd gr = set.gather(g.values);
        const Eigen::VectorXd sr = precond.solve(gr);
        const double slope = w * gr.dot(sr);
        if (!(slope > 1e-15 * std::max(std::abs(q), 1e-300))) {
            break;
        }
        const std::vector<double> s = set.scatter(sr);
        eta = std::min(2.0 * eta, 1e3);
        bool accepted = false;
        while (eta > 1e-14) {
            GridFunction trial = u;
            for (std::size_t k : set.nodes()) {
                trial.values[k] += eta * s[k];
            }
            if (sup_norm(trial.values) > 0.0) {
                obj.normalize(trial);
                if (auto qt = obj.value(trial)) {
                    record(trial, *qt);
                    if (*qt >= q + 1e-4 * eta * slope) {
                        u = std::move(trial);
                        q = *qt;
                        accepted = true;
                        break;
                    }
                }
            }
            eta *= 0.5;
        }
        if (!accepted) {
            break;
        }
    }
    return out;
}

GridFunction bump(const Grid& grid, double width) {
    GridFunction u(grid);
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (grid.is_boundary(k)) continue;
        double r2 = 0.0;
        for (int ax = 0; ax < grid.dim(); ++ax) {
            r2 += grid.coord(k, ax) * grid.coord(k, ax);
        }
        u.values[k] = std::exp(-r2 / (2.0 * width * width));
    }
    return u;
}

std::vector<GridFunction> deterministic_starts(const CoefficientFields& fields, const Grid& grid,
                                               const std::vector<GridFunction>& witnesses) {
    std::vector<GridFunction> starts = witnesses;
    try {
        starts.push_back(principal_eig_omega(fields, grid).eigenfunction);
    } catch (const std::exception&) {
    }
    const double r = fields.omega_radius > 0.0 ? fields.omega_radius : 1.0;
    for (double scale : {0.5, 0.25, 0.125}) {
        starts.push_back(bump(grid, scale * r));
    }
    return starts;
}

QuotientEstimate multistart(const Objective& obj, const ActiveSet& set, const Eigen::SimplicialLDLT<SpMat>& precond,
                            std::vector<GridFunction> starts, const AscentOptions& opts, bool positive_random) {
    const Grid& grid = set.grid();
    const int total = std::max<int>(opts.restarts, static_cast<int>(starts.size()));
    for (int i = static_cast<int>(starts.size()); i < total; ++i) {
        std::mt19937_64 rng(opts.seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(i));
        starts.push_back(random_smooth_function(grid, rng, positive_random));
    }
    std::vector<std::future<RunResult>> tasks;
    tasks.reserve(starts.size());
    for (const auto& s : starts) {
        tasks.push_back(std::async(std::launch::async, [&, s]() { return ascend(obj, set, precond, s, opts.budget); }));
    }
    QuotientEstimate est;
    est.best = -std::numeric_limits<double>::infinity();
    for (auto& t : tasks) {
        RunResult r = t.get();
        est.samples += r.samples;
        if (!r.admissible) continue;
        ++est.admissible_starts;
        if (r.best > est.best) {
            est.best = r.best;
            est.argmax = std::move(r.argmax);
        }
    }
    return est;
}

SpMat full_stiffness(const ActiveSet& set, std::span<const double> extra) { return set.stiffness(extra, 1.0); }

double q_omega_min(const CoefficientFields& fields) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < fields.Q.size(); ++k) {
        if (fields.omega_mask[k]) m = std::min(m, fields.Q.values[k]);
    }
    return m;
}

}  // namespace

GridFunction random_smooth_function(const Grid& grid, std::mt19937_64& rng, bool positive) {
    std::normal_distribution<double> normal(0.0, 1.0);
    GridFunction u(grid);
    const int modes = grid.dim() == 1 ? 8 : 5;
    std::vector<double> coef(static_cast<std::size_t>(grid.dim() == 1 ? modes : modes * modes));
    for (std::size_t i = 0; i < coef.size(); ++i) {
        coef[i] = normal(rng);
    }
    const std::array<double, 2> lo{grid.lower(0), grid.lower(grid.dim() - 1)};
    const std::array<double, 2> hi{grid.upper(0), grid.upper(grid.dim() - 1)};
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (grid.is_boundary(k)) continue;
        double s = 0.0;
        if (grid.dim() == 1) {
            const double x = (grid.coord(k, 0) - lo[0]) / (hi[0] - lo[0]);
            for (int m = 1; m <= modes; ++m) {
                s += coef[static_cast<std::size_t>(m - 1)] / m * std::sin(m * std::numbers::pi * x);
            }
        } else {
            const double x = (grid.coord(k, 0) - lo[0]) / (hi[0] - lo[0]);
            const double y = (grid.coord(k, 1) - lo[1]) / (hi[1] - lo[1]);
            for (int m = 1; m <= modes; ++m) {
                for (int n = 1; n <= modes; ++n) {
                    s += coef[static_cast<std::size_t>((m - 1) * modes + n - 1)] / (m + n) *
                         std::sin(m * std::numbers::pi * x) * std::sin(n * std::numbers::pi * y);
                }
            }
        }
        u.values[k] = positive ? std::abs(s) : s;
    }
    return u;
}

QuotientEstimate estimate_gamma0(const CoefficientFields& fields, const Grid& grid, const AscentOptions& opts) {
    const ActiveSet set(grid, box_interior(grid));
    Eigen::SimplicialLDLT<SpMat> precond(full_stiffness(set, {}));
    if (precond.info() != Eigen::Success) {
        throw DomainError("Laplacian factorization failed");
    }
    const GridFunction& Q = fields.Q;
    Objective obj;
    obj.value = [&](const GridFunction& u) -> std::optional<double> {
        const double d = dirichlet_norm_sq(u);
        if (!(d > 0.0)) return std::nullopt;
        return q_power_term(u, Q, 4.0) / (d * d);
    };
    obj.gradient = [&](const GridFunction& u) {
        const double d = dirichlet_norm_sq(u);
        const double n = q_power_term(u, Q, 4.0);
        const GridFunction lu = apply_laplacian(u);
        GridFunction g(u.grid);
        for (std::size_t k = 0; k < g.size(); ++k) {
            const double v = u.values[k];
            g.values[k] = 4.0 * (Q.values[k] * v * v * v * d - n * lu.values[k]) / (d * d * d);
        }
        return g;
    };
    obj.normalize = [](GridFunction& u) {
        const double s = 1.0 / std::sqrt(dirichlet_norm_sq(u));
        for (double& v : u.values) v *= s;
    };
    QuotientEstimate est = multistart(obj, set, precond, deterministic_starts(fields, grid, opts.witnesses), opts, false);
    if (est.admissible_starts == 0) {
        est.best = 0.0;
    }
    return est;
}

QuotientEstimate estimate_abar_sup(const ProblemData& problem, const AscentOptions& opts) {
    problem.validate();
    const double p = problem.p;
    if (!(p > 2.0 && p < 4.0)) {
        throw DomainError("the degenerate threshold needs 2 < p < 4");
    }
    const Grid& grid = problem.grid;
    const ActiveSet set(grid, box_interior(grid));
    std::vector<double> extra(grid.size());
    for (std::size_t k = 0; k < extra.size(); ++k) {
        extra[k] = problem.mu * problem.fields.V.values[k] + 1.0;
    }
    Eigen::SimplicialLDLT<SpMat> precond(full_stiffness(set, extra));
    if (precond.info() != Eigen::Success) {
        throw DomainError("preconditioner factorization failed");
    }
    const double e_c = 2.0 / (p - 2.0);
    const double e_b = (4.0 - p) / (p - 2.0);
    Objective obj;
    // Works with log Ā = e_c log C − log A − e_b log B; reported values are Ā itself.
    auto log_value = [&](const GridFunction& u) -> std::optional<double> {
        const FiberingCoefficients c = fibering_coeffs(u, problem);
        if (!(c.B > 0.0 && c.C > 0.0 && c.A > 0.0)) return std::nullopt;
        return e_c * std::log(c.C) - std::log(c.A) - e_b * std::log(c.B);
    };
    obj.value = log_value;
    obj.gradient = [&](const GridFunction& u) {
        const FiberingCoefficients c = fibering_coeffs(u, problem);
        const double d = std::sqrt(c.A);
        const GridFunction lu = apply_laplacian(u);
        const auto& F = problem.fields;
        GridFunction g(u.grid);
        for (std::size_t k = 0; k < g.size(); ++k) {
            const double v = u.values[k];
            const double dc = p * F.Q.values[k] * signed_power(v, p - 1.0);
            const double da = 4.0 * d * lu.values[k];
            const double db = 2.0 * (lu.values[k] + problem.mu * F.V.values[k] * v - problem.lambda * F.f.values[k] * v);
            g.values[k] = e_c * dc / c.C - da / c.A - e_b * db / c.B;
        }
        return g;
    };
    obj.normalize = [&](GridFunction& u) {
        const double s = 1.0 / std::sqrt(mu_norm_sq(u, problem));
        for (double& v : u.values) v *= s;
    };
    std::vector<GridFunction> starts = deterministic_starts(problem.fields, grid, opts.witnesses);
    try {
        starts.push_back(principal_eig_full(problem).eigenfunction);
    } catch (const std::exception&) {
    }
    QuotientEstimate est = multistart(obj, set, precond, std::move(starts), opts, true);
    if (est.admissible_starts == 0) {
        throw DomainError("no admissible start with B > 0 and C > 0");
    }
    est.best = std::exp(est.best);
    return est;
}

Phi1Sign phi1_sign_condition(const CoefficientFields& fields, const Grid& grid, double p) {
    const EigenResult eig = principal_eig_omega(fields, grid);
    Phi1Sign out;
    out.lambda1 = eig.eigenvalue;
    out.integral = q_power_term(eig.eigenfunction, fields.Q, p);
    out.p4_gate = q_power_term(eig.eigenfunction, fields.Q, 4.0) / (eig.eigenvalue * eig.eigenvalue);
    return out;
}

double small_lambda_multiplier(double p) { return 1.0 - 2.0 * std::pow((4.0 - p) / 4.0, 2.0 / p); }

double sobolev_constant_omega(const CoefficientFields& fields, const Grid& grid, double p) {
    CoefficientFields unit = fields;
    std::fill(unit.Q.values.begin(), unit.Q.values.end(), 1.0);
    const LimitGroundState gs = solve_limit_problem(unit, grid, p, 0.0);
    if (!gs.report.converged) {
        throw SolverError("limit problem for the Sobolev constant did not converge: " + gs.report.message);
    }
    const double m = gs.q_term;
    return std::pow(m, 0.5 - 1.0 / p);
}

ThresholdReport compute_thresholds(const ProblemData& problem, const AscentOptions& opts,
                                   std::optional<double> gamma0_cached) {
    problem.validate();
    const double p = problem.p;
    ThresholdReport t;

    if (gamma0_cached) {
        t.gamma0_est = *gamma0_cached;
    } else {
        const QuotientEstimate g = estimate_gamma0(problem.fields, problem.grid, opts);
        t.gamma0_est = g.best;
        t.gamma0_samples = g.samples;
    }
    t.gamma0_nonpositive = !(t.gamma0_est > 0.0);
    if (t.gamma0_nonpositive) {
        t.notes.push_back("gamma0 estimate is not positive; the scenario contradicts Gamma0 > 0");
    }

    const Phi1Sign s = phi1_sign_condition(problem.fields, problem.grid, p);
    t.phi1_sign_p = s.integral;
    t.phi1_p4_gate = s.p4_gate;
    t.lambda1 = s.lambda1;
    t.lambda_tilde = principal_eig_full(problem).eigenvalue;

    if (problem.lambda < t.lambda_tilde) {
        t.k_mu = std::pow((t.lambda_tilde - problem.lambda) / t.lambda_tilde, 1.0 / (p - 2.0));
    }

    if (p > 2.0 && p < 4.0) {
        const double qmin = q_omega_min(problem.fields);
        try {
            const double sp = sobolev_constant_omega(problem.fields, problem.grid, p);
            t.sp_omega = sp;
            if (qmin > 0.0) {
                t.c_p = std::pow(2.0 * std::pow(sp, p) / (qmin * (4.0 - p)), 2.0 / (p - 2.0));
                t.a0_proxy = (p - 2.0) / (4.0 - p) / *t.c_p;
                if (t.k_mu) {
                    t.energy_band = (p - 2.0) / (4.0 * p) * *t.c_p * std::pow(*t.k_mu, p);
                }
            } else {
                t.notes.push_back("Q is not positive on all of omega; C(p) is undefined");
            }
        } catch (const std::exception& e) {
            t.notes.push_back(std::string("Sobolev constant estimate failed: ") + e.what());
        }
        if (problem.lambda < t.lambda_tilde) {
            try {
                const QuotientEstimate ab = estimate_abar_sup(problem, opts);
                t.abar_sup = ab.best;
                t.abar_lambda_est = abar_prefactor_solved(p) * ab.best;
                t.abar_lambda_stated = abar_prefactor_stated(p) * ab.best;
                t.samples += ab.samples;
            } catch (const std::exception& e) {
                t.notes.push_back(std::string("abar estimate unavailable: ") + e.what());
            }
        }
        if (!t.a0_proxy && t.abar_lambda_est) {
            t.a0_proxy = t.abar_lambda_est;
            t.notes.push_back("a0 proxy falls back to the degenerate threshold estimate");
        }
    }
    t.samples += t.gamma0_samples;
    return t;
}

RegimeResult regime_classify(const ProblemData& problem, const ThresholdReport& t, const RegimeOptions& opts) {
    RegimeResult r;
    const double p = problem.p;
    const double a = problem.a;
    const double lam = problem.lambda;
    const double l1 = t.lambda1;
    auto gate = [&](const std::string& name, bool holds, bool estimated) {
        r.gates.push_back({name, holds, estimated});
        return holds;
    };

    const bool a_pos = gate("a>0", a > 0.0, false);
    const bool lam_pos = gate("lambda>0", lam > 0.0, false);
    const bool below = gate("lambda<lambda1", lam < l1, false);
    const bool near = gate("lambda1<=lambda<lambda1(1+window)", lam >= l1 && lam < l1 * (1.0 + opts.near_window), true);
    const bool above = lam >= l1;

    if (p > 4.0) {
        gate("p>4", true, false);
        if (a_pos && lam_pos && below) r.tags.push_back("T1");
        const bool neg = gate("int_omega Q phi1^p<0", t.phi1_sign_p < 0.0, false);
        if (a_pos && neg && near) r.tags.push_back("T2");
    } else if (p == 4.0) {
        gate("p=4", true, false);
        const bool under = gate("a<gamma0", a < t.gamma0_est, true);
        const bool over = gate("a>gamma0", a > t.gamma0_est, true);
        if (a_pos && under && lam_pos && below) r.tags.push_back("T3i");
        if (over && lam_pos && below) r.tags.push_back("T3ii");
        if (over && above) r.tags.push_back("T3iii");
        const bool window = gate("phi1_p4_gate<a<gamma0", t.phi1_p4_gate < a && under, true);
        if (window && near) r.tags.push_back("T4");
    } else if (p > 2.0 && p < 4.0) {
        gate("2<p<4", true, false);
        if (t.abar_lambda_est) {
            const bool none = gate("a>abar_lambda", a > *t.abar_lambda_est, true);
            if (none && lam_pos && below) r.tags.push_back("T5-0");
        }
        bool small_a = false;
        if (t.a0_proxy) {
            small_a = gate("a<a0", a_pos && a < *t.a0_proxy, true);
        }
        if (small_a && lam_pos && below) {
            r.tags.push_back("T5");
            r.tags.push_back("T5-2");
        }
        if (a_pos && above) {
            r.tags.push_back("T5");
            r.tags.push_back("T5-2");
        }
        const bool t6 = gate("lambda<[1-2((4-p)/4)^(2/p)]lambda1", lam < small_lambda_multiplier(p) * l1, false);
        if (small_a && lam_pos && t6) {
            r.tags.push_back("T6");
            r.tags.push_back("corollary-multiplicity");
        }
    }
    std::sort(r.tags.begin(), r.tags.end());
    r.tags.erase(std::unique(r.tags.begin(), r.tags.end()), r.tags.end());
    if (r.tags.empty()) {
        r.tags.push_back("unclassified");
    }
    return r;
}

namespace {
nlohmann::ordered_json opt(const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}
}  // namespace

std::string to_json(const ThresholdReport& t) {
    nlohmann::ordered_json j;
    j["gamma0_est"] = t.gamma0_est;
    j["gamma0_samples"] = t.gamma0_samples;
    j["gamma0_nonpositive"] = t.gamma0_nonpositive;
    j["abar_sup"] = opt(t.abar_sup);
    j["abar_lambda_est"] = opt(t.abar_lambda_est);
    j["abar_lambda_stated"] = opt(t.abar_lambda_stated);
    j["phi1_sign_p"] = t.phi1_sign_p;
    j["phi1_p4_gate"] = t.phi1_p4_gate;
    j["lambda1"] = t.lambda1;
    j["lambda_tilde"] = t.lambda_tilde;
    j["k_mu"] = opt(t.k_mu);
    j["c_p"] = opt(t.c_p);
    j["sp_omega"] = opt(t.sp_omega);
    j["energy_band"] = opt(t.energy_band);
    j["a0_proxy"] = opt(t.a0_proxy);
    j["samples"] = t.samples;
    j["notes"] = t.notes;
    return j.dump(2);
}

std::string to_json(const RegimeResult& r) {
    nlohmann::ordered_json j;
    j["tags"] = r.tags;
    auto gates = nlohmann::ordered_json::array();
    for (const auto& g : r.gates) {
        gates.push_back({{"name", g.name}, {"holds", g.holds}, {"estimated", g.estimated}});
    }
    j["gates"] = gates;
    return j.dump(2);
}

std::string join_tags(const RegimeResult& r) {
    std::ostringstream os;
    for (std::size_t i = 0; i < r.tags.size(); ++i) {
        if (i) os << '|';
        os << r.tags[i];
    }
    return os.str();
}

}  // namespace kirchhoff
