#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "kirchhoff/eigenproblem.hpp"
#include "kirchhoff/fibering.hpp"
#include "kirchhoff/io.hpp"
#include "kirchhoff/nehari_solver.hpp"
#include "kirchhoff/scenario.hpp"
#include "kirchhoff/thresholds.hpp"
#include "kirchhoff/verify.hpp"

using namespace kirchhoff;
using json = nlohmann::ordered_json;

namespace {

int run_eig(const std::string& config, const std::string& sweep_csv) {
    const Scenario s = load_scenario(config);
    const ProblemData prob = first_problem(s);
    const EigenResult e1 = principal_eig_omega(prob.fields, prob.grid);
    const EigenResult ef = principal_eig_full(prob);
    json j;
    j["lambda1"] = e1.eigenvalue;
    j["lambda1_residual"] = e1.residual;
    j["lambda1_iterations"] = e1.iterations;
    j["phi1_dirichlet_norm_sq"] = e1.dirichlet_norm_sq;
    j["mu"] = prob.mu;
    j["lambda_tilde"] = ef.eigenvalue;
    j["lambda_tilde_residual"] = ef.residual;
    j["lambda_tilde_iterations"] = ef.iterations;
    if (!sweep_csv.empty()) {
        const WellSweep sw = well_convergence_sweep(prob, s.mu);
        write_text_file(sweep_csv, to_csv(sw));
        j["sweep_monotone"] = sw.monotone;
        j["sweep_below_limit"] = sw.below_limit;
    }
    std::cout << j.dump(2) << '\n';
    return 0;
}

int run_fiber(const std::string& config, const std::string& input) {
    const Scenario s = load_scenario(config);
    const ProblemData prob = first_problem(s);
    const GridFunction u = read_grid_function_csv(std::filesystem::path(input));
    if (!(u.grid == prob.grid)) {
        throw DomainError("stored function does not live on the configured grid");
    }
    const FiberingCoefficients c = fibering_coeffs(u, prob);
    json j = json::parse(to_json(stationary_points(c)));
    j["A"] = c.A;
    j["B"] = c.B;
    j["C"] = c.C;
    std::cout << j.dump(2) << '\n';
    return 0;
}

int run_solve(const std::string& config, const std::string& branch_name, const std::string& seed,
              const std::string& out) {
    const Scenario s = load_scenario(config);
    const ProblemData prob = first_problem(s);
    const Branch branch = parse_branch(branch_name);
    const SolveReport r = seed == "auto" ? solve_multistart(prob, branch, default_seeds(prob), s.solver)
                                         : minimize_on_branch(prob, branch, make_seed(prob, seed).u, s.solver);
    SolveReport tagged = r;
    if (seed != "auto" && tagged.seed == "given") tagged.seed = seed;
    std::cout << json::parse(to_json(tagged)).dump(2) << '\n';
    if (!out.empty()) {
        std::ostringstream os;
        write_grid_function_csv(os, r.solution, s.seed);
        write_text_file(out, os.str());
    }
    return r.converged ? 0 : 3;
}

int run_thresholds(const std::string& config, int budget, const std::string& out) {
    const Scenario s = load_scenario(config);
    const ProblemData prob = first_problem(s);
    AscentOptions ao;
    ao.budget = budget >= 0 ? budget : s.budget;
    ao.restarts = s.restarts;
    ao.seed = s.seed;
    const ThresholdReport t = compute_thresholds(prob, ao);
    const RegimeResult reg = regime_classify(prob, t, RegimeOptions{s.near_window});
    json j;
    j["seed"] = s.seed;
    j["a"] = prob.a;
    j["p"] = prob.p;
    j["lambda"] = prob.lambda;
    j["mu"] = prob.mu;
    j["thresholds"] = json::parse(to_json(t));
    j["regime"] = json::parse(to_json(reg));
    const std::string text = j.dump(2) + "\n";
    std::cout << text;
    if (!out.empty()) write_text_file(out, text);
    return 0;
}

int run_sweep_cmd(const std::string& config, const std::string& out, unsigned jobs) {
    const Scenario s = load_scenario(config);
    const std::filesystem::path dir = out.empty() ? s.output_dir : std::filesystem::path(out);
    const SweepResult r = run_scenario(s, dir, jobs);
    std::size_t failed = 0;
    for (const auto& row : r.rows) failed += !row.error.empty();
    std::cout << "rows: " << r.rows.size() << ", rows with errors: " << failed << ", output: " << dir.string() << '\n';
    return 0;
}

int run_verify(const std::string& config, const std::vector<std::string>& tols, bool fault, const std::string& out) {
    const Scenario s = load_scenario(config);
    VerifyOptions vo;
    vo.inject_gradient_fault = fault;
    for (const auto& t : tols) {
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError("--tol expects name=value, got '" + t + "'");
        vo.tolerances[t.substr(0, eq)] = std::stod(t.substr(eq + 1));
    }
    const VerifyReport rep = verify_suite(s, vo);
    for (const auto& c : rep.checks) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " value=" << c.value << " tol=" << c.tolerance;
        if (!c.detail.empty()) std::cout << " (" << c.detail << ")";
        std::cout << '\n';
    }
    const std::filesystem::path path = out.empty() ? s.output_dir / "report.json" : std::filesystem::path(out);
    write_text_file(path, to_json(rep));
    return rep.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nehari-manifold solvers for the indefinite Kirchhoff equation"};
    app.require_subcommand(1);

    std::string config, out, branch = "minus", seed = "auto", input, sweep_csv;
    int budget = -1;
    unsigned jobs = 0;
    std::vector<std::string> tols;
    bool fault = false;

    auto* eig = app.add_subcommand("eig", "principal eigenvalues on omega and on the whole box");
    eig->add_option("--config", config, "scenario file")->required()->check(CLI::ExistingFile);
    eig->add_option("--sweep", sweep_csv, "write the well-depth sweep over problem.mu to this CSV");

    auto* fiber = app.add_subcommand("fiber", "fibering map analysis");
    fiber->require_subcommand(1);
    auto* classify = fiber->add_subcommand("classify", "classify the fibering map of a stored grid function");
    classify->add_option("--config", config, "scenario file")->required()->check(CLI::ExistingFile);
    classify->add_option("--input", input, "grid function CSV")->required()->check(CLI::ExistingFile);

    auto* solve = app.add_subcommand("solve", "minimize the energy on one Nehari branch");
    solve->add_option("--config", config, "scenario file")->required()->check(CLI::ExistingFile);
    solve->add_option("--branch", branch, "minus or plus")->check(CLI::IsMember({"minus", "plus"}));
    std::vector<std::string> seeds = seed_names();
    seeds.push_back("auto");
    solve->add_option("--seed", seed, "initial guess, or auto for the multi-start")->check(CLI::IsMember(seeds));
    solve->add_option("--out", out, "write the solution CSV here");

    auto* thr = app.add_subcommand("thresholds", "estimate the critical constants and classify the regime");
    thr->add_option("--config", config, "scenario file")->required()->check(CLI::ExistingFile);
    thr->add_option("--budget", budget, "ascent iterations per restart");
    thr->add_option("--out", out, "also write the JSON here");

    auto* sweep = app.add_subcommand("sweep", "run the scenario's parameter sweep");
    sweep->add_option("--config", config, "scenario file")->required()->check(CLI::ExistingFile);
    sweep->add_option("--out", out, "output directory (default: output.dir)");
    sweep->add_option("--jobs", jobs, "worker threads (default: hardware concurrency)");

    auto* verify = app.add_subcommand("verify", "run the property suite");
    verify->add_option("--config", config, "scenario file")->required()->check(CLI::ExistingFile);
    verify->add_option("--tol", tols, "tolerance override name=value");
    verify->add_flag("--inject-gradient-fault", fault, "read the gradient one node off");
    verify->add_option("--out", out, "report path (default: <output.dir>/report.json)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (eig->parsed()) return run_eig(config, sweep_csv);
        if (classify->parsed()) return run_fiber(config, input);
        if (solve->parsed()) return run_solve(config, branch, seed, out);
        if (thr->parsed()) return run_thresholds(config, budget, out);
        if (sweep->parsed()) return run_sweep_cmd(config, out, jobs);
        if (verify->parsed()) return run_verify(config, tols, fault, out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
