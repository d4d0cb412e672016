#pragma once

#include <string>

#include "kirchhoff/fields.hpp"
#include "kirchhoff/grid.hpp"

namespace kirchhoff {

/// Terms of the energy J = (a/4)‖u‖⁴_D + (1/2)‖u‖²_μ − (1/p)∫Q|u|^p − (λ/2)∫f u².
struct EnergyBreakdown {
    double dnorm4 = 0.0;
    double munorm2 = 0.0;
    double q_term = 0.0;
    double f_term = 0.0;
    double J = 0.0;
};

/// ∫|∇u|² as integrate(u · (-Δu)).
double dirichlet_norm_sq(const GridFunction& u);
/// ∫|∇u|² + μ∫V u².
double mu_norm_sq(const GridFunction& u, const ProblemData& problem);
/// ∫ w u².
double weighted_mass(const GridFunction& u, const GridFunction& w);
/// ∫ Q|u|^p.
double q_power_term(const GridFunction& u, const GridFunction& Q, double p);
inline double q_power_term(const GridFunction& u, const ProblemData& problem) {
    return q_power_term(u, problem.fields.Q, problem.p);
}

EnergyBreakdown assemble_energy(double dnorm4, double munorm2, double q_term, double f_term,
                                double a, double p, double lambda);
EnergyBreakdown energy(const GridFunction& u, const ProblemData& problem);

/// Nodal representative of J′(u) in the quadrature inner product:
/// (a‖u‖²_D + 1)(−Δu) + μVu − Q|u|^{p−2}u − λfu, zero on the box boundary.
GridFunction energy_gradient(const GridFunction& u, const ProblemData& problem);

/// Quadrature inner product Σ w_k u_k v_k.
double quad_dot(const GridFunction& u, const GridFunction& v);

/// |s|^{p-2}s, with the value 0 at s = 0.
double signed_power(double s, double p_minus_one);

std::string to_json(const EnergyBreakdown& e);

}  // namespace kirchhoff
