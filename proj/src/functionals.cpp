#include "kirchhoff/functionals.hpp"

#include <cmath>

#include "json.hpp"

namespace kirchhoff {

double signed_power(double s, double p_minus_one) {
    if (s == 0.0) {
        return 0.0;
    }
    const double m = std::pow(std::abs(s), p_minus_one);
    return s > 0.0 ? m : -m;
}

double dirichlet_norm_sq(const GridFunction& u) {
    const GridFunction lu = apply_laplacian(u);
    return quad_dot(u, lu);
}

double weighted_mass(const GridFunction& u, const GridFunction& w) {
    require_same_size(u.grid, w.size(), "weighted_mass");
    double sum = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        sum += u.grid.weight(k) * w.values[k] * u.values[k] * u.values[k];
    }
    return sum;
}

double mu_norm_sq(const GridFunction& u, const ProblemData& problem) {
    return dirichlet_norm_sq(u) + problem.mu * weighted_mass(u, problem.fields.V);
}

double q_power_term(const GridFunction& u, const GridFunction& Q, double p) {
    require_same_size(u.grid, Q.size(), "q_power_term");
    double sum = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (u.values[k] != 0.0) {
            sum += u.grid.weight(k) * Q.values[k] * std::pow(std::abs(u.values[k]), p);
        }
    }
    return sum;
}

EnergyBreakdown assemble_energy(double dnorm4, double munorm2, double q_term, double f_term,
                                double a, double p, double lambda) {
    EnergyBreakdown e{dnorm4, munorm2, q_term, f_term, 0.0};
    e.J = 0.25 * a * dnorm4 + 0.5 * munorm2 - q_term / p - 0.5 * lambda * f_term;
    return e;
}

EnergyBreakdown energy(const GridFunction& u, const ProblemData& problem) {
    require_boundary_zero(u.grid, u.values, "energy");
    const double d = dirichlet_norm_sq(u);
    const double m = d + problem.mu * weighted_mass(u, problem.fields.V);
    return assemble_energy(d * d, m, q_power_term(u, problem), weighted_mass(u, problem.fields.f),
                           problem.a, problem.p, problem.lambda);
}

GridFunction energy_gradient(const GridFunction& u, const ProblemData& problem) {
    if (problem.p < 2.0) {
        throw DomainError("energy gradient needs p >= 2");
    }
    GridFunction g = apply_laplacian(u);
    const double kirchhoff = problem.a * quad_dot(u, g) + 1.0;
    const auto& V = problem.fields.V.values;
    const auto& f = problem.fields.f.values;
    const auto& Q = problem.fields.Q.values;
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (u.grid.is_boundary(k)) {
            g.values[k] = 0.0;
            continue;
        }
        const double s = u.values[k];
        g.values[k] = kirchhoff * g.values[k] + problem.mu * V[k] * s -
                      Q[k] * signed_power(s, problem.p - 1.0) - problem.lambda * f[k] * s;
    }
    return g;
}

double quad_dot(const GridFunction& u, const GridFunction& v) {
    require_same_size(u.grid, v.size(), "quad_dot");
    double sum = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        sum += u.grid.weight(k) * u.values[k] * v.values[k];
    }
    return sum;
}

std::string to_json(const EnergyBreakdown& e) {
    nlohmann::ordered_json j;
    j["dnorm4"] = e.dnorm4;
    j["munorm2"] = e.munorm2;
    j["q_term"] = e.q_term;
    j["f_term"] = e.f_term;
    j["J"] = e.J;
    return j.dump();
}

}  // namespace kirchhoff
