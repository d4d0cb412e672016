#include "kirchhoff/fibering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "json.hpp"
#include "kirchhoff/functionals.hpp"

namespace kirchhoff {

namespace {

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

void require_positive_t(double t) {
    if (!(t > 0.0)) {
        throw FiberingError("fibering map is evaluated at t > 0 only");
    }
}

// g(t) = h′(t)/t = aA t² + B − C t^q with q = p − 2.
struct Reduced {
    double alpha;  // aA
    double B;
    double C;
    double q;

    double operator()(double t) const { return alpha * t * t + B - C * std::pow(t, q); }
    double derivative(double t) const { return 2.0 * alpha * t - q * C * std::pow(t, q - 1.0); }
    double magnitude(double t) const { return alpha * t * t + std::abs(B) + std::abs(C) * std::pow(t, q); }

    // Dominant sign as t → 0⁺ and t → ∞.
    int sign_near_zero() const {
        if (B != 0.0) return sign_of(B);
        if (q < 2.0) return C != 0.0 ? -sign_of(C) : sign_of(alpha);
        if (q > 2.0) return alpha > 0.0 ? 1 : -sign_of(C);
        return sign_of(alpha - C);
    }
    int sign_near_infinity() const {
        if (q > 2.0) return C != 0.0 ? -sign_of(C) : (alpha > 0.0 ? 1 : sign_of(B));
        if (q < 2.0) return alpha > 0.0 ? 1 : (C != 0.0 ? -sign_of(C) : sign_of(B));
        const double lead = alpha - C;
        return lead != 0.0 ? sign_of(lead) : sign_of(B);
    }
    std::optional<double> critical_point() const {
        if (q == 2.0 || !(alpha > 0.0) || !(C > 0.0)) {
            return std::nullopt;
        }
        return std::pow(2.0 * alpha / (q * C), 1.0 / (q - 2.0));
    }
    double reference_scale() const {
        if (B != 0.0 && C != 0.0) return std::pow(std::abs(B / C), 1.0 / q);
        if (B != 0.0 && alpha > 0.0) return std::sqrt(std::abs(B) / alpha);
        if (alpha > 0.0 && C != 0.0 && q != 2.0) return std::pow(alpha / std::abs(C), 1.0 / (q - 2.0));
        return 1.0;
    }
};

double solve_bracketed(const Reduced& g, double lo, double hi) {
    // Dividing by the term magnitude keeps values in [-1, 1] for huge t.
    const auto f = [&g](double t) { return g(t) / g.magnitude(t); };
    const double flo = f(lo);
    const double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    std::uintmax_t max_iter = 200;
    const auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi,
                                                     boost::math::tools::eps_tolerance<double>(52), max_iter);
    if (max_iter < 200 && std::isfinite(r.first) && std::isfinite(r.second)) {
        return 0.5 * (r.first + r.second);
    }
    std::uintmax_t bis_iter = 2000;
    const auto rb = boost::math::tools::bisect(f, lo, hi, boost::math::tools::eps_tolerance<double>(50), bis_iter);
    if (bis_iter < 2000) {
        return 0.5 * (rb.first + rb.second);
    }
    std::ostringstream os;
    os << "root finder did not converge on bracket [" << lo << ", " << hi << "] with g = [" << g(lo) << ", "
       << g(hi) << "]";
    throw FiberingError(os.str());
}

// Root of the monotone piece (lo, hi) of g, where lo/hi may be the open ends 0 or ∞.
std::optional<double> root_on_piece(const Reduced& g, double lo, double hi, double anchor) {
    const int s_lo = lo == 0.0 ? g.sign_near_zero() : sign_of(g(lo));
    const int s_hi = std::isinf(hi) ? g.sign_near_infinity() : sign_of(g(hi));
    if (s_lo == 0 || s_hi == 0 || s_lo == s_hi) {
        return std::nullopt;
    }
    double a = lo;
    double b = hi;
    if (a == 0.0) {
        a = std::isinf(b) ? anchor : 0.5 * b;
        for (int k = 0; k < 2000 && sign_of(g(a)) != s_lo; ++k) {
            a *= 0.5;
            if (a == 0.0) {
                throw FiberingError("could not bracket a root near t = 0");
            }
        }
    }
    if (std::isinf(b)) {
        b = std::max(2.0 * a, anchor);
        for (int k = 0; k < 2000 && sign_of(g(b)) != s_hi; ++k) {
            b *= 2.0;
            if (!std::isfinite(g(b))) {
                throw FiberingError("could not bracket a root as t grows");
            }
        }
    }
    if (sign_of(g(a)) == sign_of(g(b))) {
        // Anchor landed beyond the root; walk the far end back.
        for (int k = 0; k < 2000 && sign_of(g(a)) == sign_of(g(b)); ++k) {
            a *= 0.5;
        }
    }
    return solve_bracketed(g, a, b);
}

double h_second_scale(const FiberingCoefficients& c, double t) {
    return 3.0 * c.a * c.A * t * t + std::abs(c.B) + (c.p - 1.0) * std::abs(c.C) * std::pow(t, c.p - 2.0);
}

SignSet sign_set(double v) {
    if (v > 0.0) return SignSet::plus;
    if (v < 0.0) return SignSet::minus;
    return SignSet::zero;
}

}  // namespace

const char* to_string(Branch b) { return b == Branch::minus ? "minus" : "plus"; }

Branch parse_branch(const std::string& s) {
    if (s == "minus") return Branch::minus;
    if (s == "plus") return Branch::plus;
    throw DomainError("branch must be 'minus' or 'plus', got '" + s + "'");
}

const char* to_string(SignSet s) {
    switch (s) {
        case SignSet::plus: return "+";
        case SignSet::minus: return "-";
        default: return "0";
    }
}

const char* to_string(RootKind k) {
    switch (k) {
        case RootKind::max: return "max";
        case RootKind::min: return "min";
        default: return "inflection";
    }
}

FiberingCoefficients fibering_coeffs(const GridFunction& u, const ProblemData& problem) {
    require_boundary_zero(u.grid, u.values, "fibering_coeffs");
    if (std::all_of(u.values.begin(), u.values.end(), [](double v) { return v == 0.0; })) {
        throw FiberingError("fibering map of the zero function is undefined");
    }
    const double d = dirichlet_norm_sq(u);
    FiberingCoefficients c;
    c.A = d * d;
    c.munorm2 = d + problem.mu * weighted_mass(u, problem.fields.V);
    c.lambda_f = problem.lambda * weighted_mass(u, problem.fields.f);
    c.B = c.munorm2 - c.lambda_f;
    c.C = q_power_term(u, problem);
    c.p = problem.p;
    c.a = problem.a;
    return c;
}

double h_value(const FiberingCoefficients& c, double t) {
    require_positive_t(t);
    return 0.25 * c.a * c.A * std::pow(t, 4) + 0.5 * c.B * t * t - c.C * std::pow(t, c.p) / c.p;
}

double h_prime(const FiberingCoefficients& c, double t) {
    require_positive_t(t);
    return c.a * c.A * t * t * t + c.B * t - c.C * std::pow(t, c.p - 1.0);
}

double h_second(const FiberingCoefficients& c, double t) {
    require_positive_t(t);
    return 3.0 * c.a * c.A * t * t + c.B - (c.p - 1.0) * c.C * std::pow(t, c.p - 2.0);
}

FiberClass stationary_points(const FiberingCoefficients& c) {
    if (!(c.p > 2.0)) {
        throw FiberingError("fibering analysis needs p > 2");
    }
    FiberClass fc;
    fc.lambda_set = sign_set(c.B);
    fc.phi_p = c.p == 4.0 ? c.C - c.a * c.A : c.C;
    fc.theta_set = sign_set(fc.phi_p);

    const Reduced g{c.a * c.A, c.B, c.C, c.p - 2.0};
    if (g.alpha == 0.0 && g.C == 0.0) {
        return fc;
    }
    const double anchor = g.reference_scale();
    const auto tstar = g.critical_point();
    std::vector<double> ts;
    if (tstar) {
        if (auto r = root_on_piece(g, 0.0, *tstar, anchor)) ts.push_back(*r);
        if (auto r = root_on_piece(g, *tstar, std::numeric_limits<double>::infinity(), anchor)) ts.push_back(*r);
        // Tangency lost to rounding: g(t*) sits on zero within a few ulps.
        if (ts.empty() && std::abs(g(*tstar)) <= 8.0 * std::numeric_limits<double>::epsilon() * g.magnitude(*tstar)) {
            ts.push_back(*tstar);
        }
    } else if (auto r = root_on_piece(g, 0.0, std::numeric_limits<double>::infinity(), anchor)) {
        ts.push_back(*r);
    }

    for (double t : ts) {
        const double h2 = h_second(c, t);
        RootKind kind = h2 < 0.0 ? RootKind::max : RootKind::min;
        if (std::abs(h2) <= 1e-8 * h_second_scale(c, t)) {
            kind = RootKind::inflection;
        }
        fc.roots.push_back({t, kind, h2});
    }
    if (fc.roots.size() == 2 && (fc.roots[0].kind == RootKind::inflection || fc.roots[1].kind == RootKind::inflection)) {
        const double t = *tstar;
        fc.roots = {{t, RootKind::inflection, h_second(c, t)}};
    }
    return fc;
}

std::optional<double> branch_root(const FiberingCoefficients& c, Branch branch) {
    const RootKind want = branch == Branch::minus ? RootKind::max : RootKind::min;
    for (const auto& r : stationary_points(c).roots) {
        if (r.kind == want) {
            return r.t;
        }
    }
    return std::nullopt;
}

double nehari_residual(const FiberingCoefficients& c) {
    const double aA = c.a * c.A;
    double scale = aA + std::abs(c.C);
    scale += (c.munorm2 != 0.0 || c.lambda_f != 0.0) ? std::abs(c.munorm2) + std::abs(c.lambda_f) : std::abs(c.B);
    if (scale == 0.0) {
        return 0.0;
    }
    return std::abs(aA + c.B - c.C) / scale;
}

NehariProjection project_to_nehari(const GridFunction& u, const ProblemData& problem, Branch branch) {
    const FiberingCoefficients c = fibering_coeffs(u, problem);
    const auto t = branch_root(c, branch);
    if (!t) {
        const FiberClass fc = stationary_points(c);
        std::ostringstream os;
        os << "no multiple of u lies on the " << to_string(branch) << " branch (lambda_set " << to_string(fc.lambda_set)
           << ", theta_set " << to_string(fc.theta_set) << ", " << fc.roots.size() << " stationary points)";
        throw BranchAbsent(os.str());
    }
    NehariProjection out;
    out.t = *t;
    out.u = u;
    for (double& v : out.u.values) {
        v *= *t;
    }
    out.coeffs = fibering_coeffs(out.u, problem);
    out.h_second_at_one = h_second(out.coeffs, 1.0);
    out.nehari_residual = nehari_residual(out.coeffs);
    return out;
}

TripleIdentity nehari_triple(const FiberingCoefficients& c) {
    const double p = c.p;
    const double aA = c.a * c.A;
    TripleIdentity id;
    id.via_b_and_a = -(p - 2.0) * c.B - (p - 4.0) * aA;
    id.via_a_and_c = 2.0 * aA - (p - 2.0) * c.C;
    id.via_b_and_c = -2.0 * c.B - (p - 4.0) * c.C;
    const double scale = std::max({std::abs((p - 2.0) * c.B), std::abs((p - 4.0) * aA), 2.0 * aA,
                                   std::abs((p - 2.0) * c.C), 2.0 * std::abs(c.B), std::abs((p - 4.0) * c.C)});
    if (scale > 0.0) {
        id.max_rel_diff = std::max({std::abs(id.via_b_and_a - id.via_a_and_c),
                                    std::abs(id.via_a_and_c - id.via_b_and_c),
                                    std::abs(id.via_b_and_a - id.via_b_and_c)}) /
                          scale;
    }
    return id;
}

double abar_prefactor_solved(double p) {
    return (p - 2.0) / (4.0 - p) * std::pow((4.0 - p) / 2.0, 2.0 / (p - 2.0));
}

double abar_prefactor_stated(double p) {
    return (p - 2.0) / (4.0 - p) * std::pow((4.0 - p) / p, 2.0 / (p - 2.0));
}

DegenerateParams degenerate_params(const FiberingCoefficients& c) {
    if (!(c.p > 2.0 && c.p < 4.0)) {
        throw FiberingError("degenerate parameters exist only for 2 < p < 4");
    }
    if (!(c.B > 0.0) || !(c.C > 0.0)) {
        throw FiberingError("degenerate parameters need B > 0 and C > 0");
    }
    if (!(c.A > 0.0)) {
        throw FiberingError("degenerate parameters need a nonzero Dirichlet norm");
    }
    const double p = c.p;
    DegenerateParams d;
    d.t = std::pow(2.0 * c.B / ((4.0 - p) * c.C), 1.0 / (p - 2.0));
    d.abar = std::pow(c.C, 2.0 / (p - 2.0)) / (c.A * std::pow(c.B, (4.0 - p) / (p - 2.0)));
    d.a = abar_prefactor_solved(p) * d.abar;
    return d;
}

DegenerateParams degenerate_params(const GridFunction& u, const ProblemData& problem) {
    return degenerate_params(fibering_coeffs(u, problem));
}

std::string to_json(const FiberClass& fc) {
    nlohmann::ordered_json j;
    j["lambda_set"] = std::string("Lambda") + to_string(fc.lambda_set);
    j["theta_set"] = std::string("Theta") + to_string(fc.theta_set);
    j["phi_p"] = fc.phi_p;
    j["roots"] = nlohmann::ordered_json::array();
    for (const auto& r : fc.roots) {
        j["roots"].push_back({{"t", r.t}, {"kind", to_string(r.kind)}, {"h_second", r.h_second}});
    }
    return j.dump();
}

}  // namespace kirchhoff
