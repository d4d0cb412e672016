#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kirchhoff/fibering.hpp"
#include "kirchhoff/fields.hpp"
#include "kirchhoff/nehari_solver.hpp"
#include "kirchhoff/thresholds.hpp"

namespace kirchhoff {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class LambdaMode { relative, absolute };

/// A problem template plus sweep axes, read from an INI file:
///
///   [scenario]   name, seed
///   [grid]       dim, lower, upper, points
///   [fields]     omega_radius, ramp_power, f, Q, c_star, r_star
///   [problem]    a, p, lambda, mu (comma-separated lists), lambda_mode
///   [solver]     tol_grad, tol_nehari, max_iterations, branches
///   [thresholds] budget, restarts, near_window
///   [output]     dir
struct Scenario {
    std::string name = "scenario";
    std::uint64_t seed = 1;

    int dim = 1;
    double lower = -2.0;
    double upper = 2.0;
    std::size_t points = 401;

    double omega_radius = 1.0;
    double ramp_power = 2.0;
    std::string f_spec = "const:1";
    std::string q_spec = "poly:1,0,-2";
    std::optional<DecayMeta> meta;

    std::vector<double> a{0.1};
    std::vector<double> p{5.0};
    std::vector<double> lambda{0.5};
    std::vector<double> mu{1e4};
    LambdaMode lambda_mode = LambdaMode::relative;

    SolverOptions solver;
    std::vector<Branch> branches{Branch::minus, Branch::plus};

    int budget = 200;
    int restarts = 32;
    double near_window = 0.05;

    std::filesystem::path output_dir = "out";

    Grid make_grid() const;
    CoefficientFields make_fields(const Grid& grid) const;
};

Scenario parse_scenario(std::istream& in);
Scenario load_scenario(const std::filesystem::path& path);

/// Principal eigenvalue on Ω for the scenario's fields.
double scenario_lambda1(const Scenario& s);

/// Problem for one point of the sweep; λ is scaled by λ₁ in relative mode.
ProblemData make_problem(const Scenario& s, double a, double p, double lambda_value, double mu, double lambda1);
/// The first entry of every axis.
ProblemData first_problem(const Scenario& s);

struct BranchOutcome {
    std::string status;  ///< converged, not_converged, absent, error
    std::optional<SolveReport> report;
};

struct SweepRow {
    std::size_t index = 0;
    double a = 0.0;
    double lambda = 0.0;
    double lambda_rel = 0.0;  ///< λ / λ₁
    double mu = 0.0;
    double p = 0.0;
    std::uint64_t row_seed = 0;
    double lambda_tilde = 0.0;
    std::string tags;
    ThresholdReport thresholds;
    BranchOutcome minus;
    BranchOutcome plus;
    std::string error;
};

struct SweepResult {
    std::uint64_t seed = 0;
    double lambda1 = 0.0;
    double gamma0_est = 0.0;
    std::vector<SweepRow> rows;
};

/// Seed for one row, a hash of the scenario seed and the row's parameters only.
std::uint64_t row_seed(std::uint64_t seed, double a, double lambda, double mu, double p);

/// Runs every grid point of the sweep in a worker pool. Failures stay inside
/// their row.
SweepResult run_sweep(const Scenario& s, unsigned jobs = 0);

std::string rows_csv(const SweepResult& r);
std::string thresholds_json(const SweepResult& r);
/// λ against branch energies and norms, one line per row, grouped by (a, μ, p).
std::string bifurcation_csv(const SweepResult& r);

/// run_sweep plus rows.csv, thresholds.json, bifurcation.csv and
/// u_<row>_<branch>.csv for every converged solution, all written by the
/// calling thread in row order.
SweepResult run_scenario(const Scenario& s, const std::filesystem::path& out_dir, unsigned jobs = 0);

}  // namespace kirchhoff
