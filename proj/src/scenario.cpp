#include "kirchhoff/scenario.hpp"

#include <atomic>
#include <bit>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <boost/algorithm/string.hpp>
#include <boost/container_hash/hash.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "json.hpp"
#include "kirchhoff/eigenproblem.hpp"
#include "kirchhoff/io.hpp"

namespace kirchhoff {

namespace pt = boost::property_tree;

namespace {

double to_number(const std::string& key, const std::string& text) {
    const std::string t = boost::algorithm::trim_copy(text);
    double v = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
        throw ConfigError(key + ": not a number: '" + t + "'");
    }
    return v;
}

std::vector<double> to_list(const std::string& key, const std::string& text) {
    std::vector<std::string> parts;
    const std::string t = boost::algorithm::trim_copy(text);
    if (t.empty()) {
        throw ConfigError(key + ": empty list");
    }
    boost::algorithm::split(parts, t, boost::is_any_of(","));
    std::vector<double> out;
    for (const auto& part : parts) {
        out.push_back(to_number(key, part));
    }
    return out;
}

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"scenario", {"name", "seed"}},
        {"grid", {"dim", "lower", "upper", "points"}},
        {"fields", {"omega_radius", "ramp_power", "f", "Q", "c_star", "r_star"}},
        {"problem", {"a", "p", "lambda", "mu", "lambda_mode"}},
        {"solver", {"tol_grad", "tol_nehari", "max_iterations", "branches"}},
        {"thresholds", {"budget", "restarts", "near_window"}},
        {"output", {"dir"}},
    };
    return keys;
}

std::string fmt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

Grid Scenario::make_grid() const {
    if (dim == 1) return Grid::line(lower, upper, points);
    if (dim == 2) return Grid::square(lower, upper, points);
    throw ConfigError("grid.dim must be 1 or 2");
}

CoefficientFields Scenario::make_fields(const Grid& grid) const {
    return make_well_fields(grid, omega_radius, ramp_power, parse_field_spec(f_spec), parse_field_spec(q_spec));
}

Scenario parse_scenario(std::istream& in) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(e.what());
    }
    for (const auto& [section, body] : tree) {
        const auto it = known_keys().find(section);
        if (it == known_keys().end()) {
            throw ConfigError("unknown section [" + section + "]");
        }
        for (const auto& kv : body) {
            if (!it->second.contains(kv.first)) {
                throw ConfigError("unknown key " + section + "." + kv.first);
            }
        }
    }
    Scenario s;
    auto get = [&](const std::string& path) -> std::optional<std::string> {
        if (auto v = tree.get_optional<std::string>(path)) return boost::algorithm::trim_copy(*v);
        return std::nullopt;
    };
    auto number = [&](const std::string& path, double fallback) {
        const auto v = get(path);
        return v ? to_number(path, *v) : fallback;
    };
    auto integer = [&](const std::string& path, long fallback) {
        const double v = number(path, static_cast<double>(fallback));
        if (v != std::floor(v)) throw ConfigError(path + ": expected an integer");
        return static_cast<long>(v);
    };

    if (auto v = get("scenario.name")) s.name = *v;
    if (auto v = get("scenario.seed")) {
        const auto res = std::from_chars(v->data(), v->data() + v->size(), s.seed);
        if (res.ec != std::errc() || res.ptr != v->data() + v->size()) {
            throw ConfigError("scenario.seed: expected a non-negative integer");
        }
    }
    s.dim = static_cast<int>(integer("grid.dim", s.dim));
    s.lower = number("grid.lower", s.lower);
    s.upper = number("grid.upper", s.upper);
    const long pts = integer("grid.points", static_cast<long>(s.points));
    if (pts < 3) throw ConfigError("grid.points must be at least 3");
    s.points = static_cast<std::size_t>(pts);

    s.omega_radius = number("fields.omega_radius", s.omega_radius);
    s.ramp_power = number("fields.ramp_power", s.ramp_power);
    if (auto v = get("fields.f")) s.f_spec = *v;
    if (auto v = get("fields.Q")) s.q_spec = *v;
    if (get("fields.c_star") || get("fields.r_star")) {
        s.meta = DecayMeta{number("fields.c_star", 0.0), number("fields.r_star", 0.0)};
    }

    for (auto [key, target] : {std::pair{"problem.a", &s.a}, std::pair{"problem.p", &s.p},
                               std::pair{"problem.lambda", &s.lambda}, std::pair{"problem.mu", &s.mu}}) {
        if (auto v = get(key)) *target = to_list(key, *v);
    }
    if (auto v = get("problem.lambda_mode")) {
        if (*v == "relative") s.lambda_mode = LambdaMode::relative;
        else if (*v == "absolute") s.lambda_mode = LambdaMode::absolute;
        else throw ConfigError("problem.lambda_mode must be relative or absolute");
    }

    s.solver.tol_grad = number("solver.tol_grad", s.solver.tol_grad);
    s.solver.tol_nehari = number("solver.tol_nehari", s.solver.tol_nehari);
    s.solver.max_iterations = static_cast<int>(integer("solver.max_iterations", s.solver.max_iterations));
    if (auto v = get("solver.branches")) {
        std::vector<std::string> names;
        boost::algorithm::split(names, *v, boost::is_any_of(","));
        s.branches.clear();
        for (auto& n : names) {
            s.branches.push_back(parse_branch(boost::algorithm::trim_copy(n)));
        }
    }

    s.budget = static_cast<int>(integer("thresholds.budget", s.budget));
    s.restarts = static_cast<int>(integer("thresholds.restarts", s.restarts));
    s.near_window = number("thresholds.near_window", s.near_window);
    if (auto v = get("output.dir")) s.output_dir = *v;

    if (s.budget < 0 || s.restarts < 1) throw ConfigError("thresholds.budget >= 0 and thresholds.restarts >= 1 required");
    // Surface field-spec and grid errors at load time.
    const Grid g = s.make_grid();
    (void)s.make_fields(g);
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config " + path.string());
    }
    return parse_scenario(in);
}

double scenario_lambda1(const Scenario& s) {
    const Grid g = s.make_grid();
    return principal_eig_omega(s.make_fields(g), g).eigenvalue;
}

ProblemData make_problem(const Scenario& s, double a, double p, double lambda_value, double mu, double lambda1) {
    const Grid g = s.make_grid();
    const double lam = s.lambda_mode == LambdaMode::relative ? lambda_value * lambda1 : lambda_value;
    ProblemData prob{g, s.make_fields(g), a, p, lam, mu, s.meta};
    prob.validate();
    return prob;
}

ProblemData first_problem(const Scenario& s) {
    const double l1 = s.lambda_mode == LambdaMode::relative ? scenario_lambda1(s) : 1.0;
    return make_problem(s, s.a.front(), s.p.front(), s.lambda.front(), s.mu.front(), l1);
}

std::uint64_t row_seed(std::uint64_t seed, double a, double lambda, double mu, double p) {
    std::size_t h = 0;
    boost::hash_combine(h, seed);
    for (double v : {a, lambda, mu, p}) {
        boost::hash_combine(h, std::bit_cast<std::uint64_t>(v));
    }
    return static_cast<std::uint64_t>(h);
}

namespace {

BranchOutcome solve_branch(const ProblemData& prob, Branch b, const SolverOptions& opts) {
    BranchOutcome out;
    try {
        SolveReport r = solve_multistart(prob, b, default_seeds(prob), opts);
        out.status = r.converged ? "converged" : "not_converged";
        out.report = std::move(r);
    } catch (const BranchAbsent&) {
        out.status = "absent";
    } catch (const std::exception& e) {
        out.status = std::string("error: ") + e.what();
    }
    return out;
}

SweepRow run_row(const Scenario& s, std::size_t index, double a, double p, double lam_in, double mu, double lambda1,
                 double gamma0) {
    SweepRow row;
    row.index = index;
    row.a = a;
    row.p = p;
    row.mu = mu;
    row.lambda = s.lambda_mode == LambdaMode::relative ? lam_in * lambda1 : lam_in;
    row.lambda_rel = row.lambda / lambda1;
    row.row_seed = row_seed(s.seed, a, row.lambda, mu, p);
    row.minus.status = row.plus.status = "skipped";
    try {
        const ProblemData prob = make_problem(s, a, p, lam_in, mu, lambda1);
        AscentOptions ao;
        ao.budget = s.budget;
        ao.restarts = s.restarts;
        ao.seed = row.row_seed;
        try {
            row.thresholds = compute_thresholds(prob, ao, gamma0);
            row.lambda_tilde = row.thresholds.lambda_tilde;
            row.tags = join_tags(regime_classify(prob, row.thresholds, RegimeOptions{s.near_window}));
        } catch (const std::exception& e) {
            row.error = std::string("thresholds: ") + e.what();
            row.lambda_tilde = principal_eig_full(prob).eigenvalue;
        }
        for (Branch b : s.branches) {
            (b == Branch::minus ? row.minus : row.plus) = solve_branch(prob, b, s.solver);
        }
    } catch (const std::exception& e) {
        row.error = e.what();
    }
    return row;
}

}  // namespace

SweepResult run_sweep(const Scenario& s, unsigned jobs) {
    if (s.a.empty() || s.p.empty() || s.lambda.empty() || s.mu.empty()) {
        throw ConfigError("every sweep axis needs at least one value");
    }
    const Grid grid = s.make_grid();
    const CoefficientFields fields = s.make_fields(grid);
    SweepResult out;
    out.seed = s.seed;
    out.lambda1 = principal_eig_omega(fields, grid).eigenvalue;
    AscentOptions ao;
    ao.budget = s.budget;
    ao.restarts = s.restarts;
    ao.seed = s.seed;
    out.gamma0_est = estimate_gamma0(fields, grid, ao).best;

    struct Point {
        double a, p, lambda, mu;
    };
    std::vector<Point> points;
    for (double p : s.p)
        for (double mu : s.mu)
            for (double a : s.a)
                for (double lam : s.lambda) points.push_back({a, p, lam, mu});

    out.rows.resize(points.size());
    if (jobs == 0) {
        jobs = std::max(1u, std::thread::hardware_concurrency());
    }
    jobs = std::min<unsigned>(jobs, static_cast<unsigned>(points.size()));
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < jobs; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < points.size(); i = next++) {
                const Point& pt = points[i];
                out.rows[i] = run_row(s, i, pt.a, pt.p, pt.lambda, pt.mu, out.lambda1, out.gamma0_est);
            }
        });
    }
    for (auto& t : pool) t.join();
    return out;
}

std::string rows_csv(const SweepResult& r) {
    std::ostringstream os;
    os << "# seed=" << r.seed << '\n';
    os << "row,a,lambda,lambda_rel,mu,p,row_seed,lambda_tilde,tags";
    for (const char* b : {"minus", "plus"}) {
        os << ',' << b << "_status," << b << "_J," << b << "_grad_residual," << b << "_nehari_residual," << b
           << "_positivity_min," << b << "_h_second," << b << "_mu_norm," << b << "_iterations," << b << "_seed";
    }
    os << ",gamma0_est,phi1_sign_p,k_mu,abar_lambda_est,abar_lambda_stated,a0_proxy,c_p,error\n";
    for (const auto& row : r.rows) {
        os << row.index << ',' << format_double(row.a) << ',' << format_double(row.lambda) << ','
           << format_double(row.lambda_rel) << ',' << format_double(row.mu) << ',' << format_double(row.p) << ','
           << row.row_seed << ',' << format_double(row.lambda_tilde) << ',' << csv_cell(row.tags);
        for (const BranchOutcome* b : {&row.minus, &row.plus}) {
            os << ',' << csv_cell(b->status);
            if (b->report) {
                const SolveReport& rep = *b->report;
                os << ',' << format_double(rep.energy.J) << ',' << format_double(rep.grad_residual) << ','
                   << format_double(rep.nehari_residual) << ',' << format_double(rep.positivity_min) << ','
                   << format_double(rep.h_second) << ',' << format_double(rep.mu_norm) << ',' << rep.iterations << ','
                   << rep.seed;
            } else {
                os << ",,,,,,,,";
            }
        }
        const ThresholdReport& t = row.thresholds;
        os << ',' << format_double(t.gamma0_est) << ',' << format_double(t.phi1_sign_p) << ',' << fmt(t.k_mu) << ','
           << fmt(t.abar_lambda_est) << ',' << fmt(t.abar_lambda_stated) << ',' << fmt(t.a0_proxy) << ','
           << fmt(t.c_p) << ',' << csv_cell(row.error) << '\n';
    }
    return os.str();
}

std::string thresholds_json(const SweepResult& r) {
    nlohmann::ordered_json j;
    j["seed"] = r.seed;
    j["lambda1"] = r.lambda1;
    j["gamma0_est"] = r.gamma0_est;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& row : r.rows) {
        nlohmann::ordered_json e;
        e["row"] = row.index;
        e["a"] = row.a;
        e["lambda"] = row.lambda;
        e["mu"] = row.mu;
        e["p"] = row.p;
        e["row_seed"] = row.row_seed;
        e["tags"] = row.tags;
        e["thresholds"] = nlohmann::ordered_json::parse(to_json(row.thresholds));
        rows.push_back(std::move(e));
    }
    j["rows"] = std::move(rows);
    return j.dump(2) + "\n";
}

std::string bifurcation_csv(const SweepResult& r) {
    std::vector<const SweepRow*> rows;
    for (const auto& row : r.rows) rows.push_back(&row);
    std::stable_sort(rows.begin(), rows.end(), [](const SweepRow* x, const SweepRow* y) {
        if (x->p != y->p) return x->p < y->p;
        if (x->mu != y->mu) return x->mu < y->mu;
        if (x->a != y->a) return x->a < y->a;
        return x->lambda < y->lambda;
    });
    std::ostringstream os;
    os << "# seed=" << r.seed << '\n';
    os << "a,mu,p,lambda,lambda_rel,minus_J,minus_mu_norm,plus_J,plus_mu_norm,phi1_sign_p,direction\n";
    for (const SweepRow* row : rows) {
        auto cell = [](const BranchOutcome& b, bool energy) {
            if (!b.report || !b.report->converged) return std::string();
            return format_double(energy ? b.report->energy.J : b.report->mu_norm);
        };
        const double s = row->thresholds.phi1_sign_p;
        const char* dir = s > 0.0 ? "left" : (s < 0.0 ? "right" : "undetermined");
        os << format_double(row->a) << ',' << format_double(row->mu) << ',' << format_double(row->p) << ','
           << format_double(row->lambda) << ',' << format_double(row->lambda_rel) << ',' << cell(row->minus, true) << ','
           << cell(row->minus, false) << ',' << cell(row->plus, true) << ',' << cell(row->plus, false) << ','
           << format_double(s) << ',' << dir << '\n';
    }
    return os.str();
}

SweepResult run_scenario(const Scenario& s, const std::filesystem::path& out_dir, unsigned jobs) {
    SweepResult r = run_sweep(s, jobs);
    std::filesystem::create_directories(out_dir);
    write_text_file(out_dir / "rows.csv", rows_csv(r));
    write_text_file(out_dir / "thresholds.json", thresholds_json(r));
    write_text_file(out_dir / "bifurcation.csv", bifurcation_csv(r));
    for (const auto& row : r.rows) {
        for (const BranchOutcome* b : {&row.minus, &row.plus}) {
            if (!b->report || !b->report->converged) continue;
            std::ostringstream os;
            write_grid_function_csv(os, b->report->solution, r.seed);
            write_text_file(out_dir / ("u_" + std::to_string(row.index) + "_" + to_string(b->report->branch) + ".csv"),
                            os.str());
        }
    }
    return r;
}

}  // namespace kirchhoff
