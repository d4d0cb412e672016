#include <cmath>
#include <random>

#include "doctest.h"
#include "json.hpp"
#include "kirchhoff/eigenproblem.hpp"
#include "kirchhoff/functionals.hpp"
#include "support.hpp"

using namespace ktest;

namespace {

GridFunction scale(const GridFunction& u, double t) {
    GridFunction w = u;
    for (double& v : w.values) v *= t;
    return w;
}

GridFunction axpy(const GridFunction& u, double e, const GridFunction& v) {
    GridFunction w = u;
    for (std::size_t k = 0; k < w.size(); ++k) w.values[k] += e * v.values[k];
    return w;
}

}  // namespace

TEST_CASE("Dirichlet norm") {
    const Grid g = line_grid();
    CHECK(dirichlet_norm_sq(GridFunction(g)) == 0.0);
    const GridFunction c = cosine_bump(g);
    CHECK(std::abs(dirichlet_norm_sq(c) - kLambdaInterval) <= 1e-3);
    CHECK(dirichlet_norm_sq(scale(c, 2.0)) == doctest::Approx(4.0 * dirichlet_norm_sq(c)).epsilon(1e-14));
}

TEST_CASE("mu norm") {
    ProblemData prob = problem(0.1, 4.0, 1.0, 100.0);
    const GridFunction c = cosine_bump(prob.grid);
    CHECK(mu_norm_sq(c, prob) == dirichlet_norm_sq(c));
    CHECK(mu_norm_sq(GridFunction(prob.grid), prob) == 0.0);

    std::mt19937_64 rng(1);
    const GridFunction u = random_fn(prob.grid, rng);
    const double d = dirichlet_norm_sq(u);
    const double v1 = mu_norm_sq(u, prob) - d;
    prob.mu *= 2.0;
    const double v2 = mu_norm_sq(u, prob) - d;
    CHECK(v2 == doctest::Approx(2.0 * v1).epsilon(1e-13));
    CHECK(mu_norm_sq(u, prob) >= d);
}

TEST_CASE("weighted mass and power term against the eigenfunction") {
    const ProblemData prob = problem(0.0, 2.0, 0.0, 1.0, "const:1");
    const EigenResult e = principal_eig_omega(prob.fields, prob.grid);
    CHECK(weighted_mass(GridFunction(prob.grid), prob.fields.f) == 0.0);
    CHECK(std::abs(weighted_mass(e.eigenfunction, prob.fields.f) - 1.0) <= 1e-4);
    CHECK(std::abs(q_power_term(e.eigenfunction, prob) - 1.0) <= 1e-4);
    CHECK(q_power_term(GridFunction(prob.grid), prob) == 0.0);

    std::mt19937_64 rng(2);
    const GridFunction u = random_fn(prob.grid, rng);
    GridFunction au = u;
    for (double& v : au.values) v = std::abs(v);
    CHECK(q_power_term(u, prob.fields.Q, 3.5) == q_power_term(au, prob.fields.Q, 3.5));
    CHECK(weighted_mass(u, prob.fields.V) >= 0.0);
}

TEST_CASE("energy assembly") {
    CHECK(assemble_energy(1.0, 1.0, 1.0, 0.0, 1.0, 4.0, 0.0).J == doctest::Approx(0.5));
    const ProblemData prob = problem(0.3, 3.0, 1.1, 50.0);
    CHECK(energy(GridFunction(prob.grid), prob).J == 0.0);

    std::mt19937_64 rng(4);
    const GridFunction u = random_fn(prob.grid, rng);
    const EnergyBreakdown e = energy(u, prob);
    CHECK(e.J == energy(scale(u, -1.0), prob).J);
    CHECK(e.J == doctest::Approx(0.25 * prob.a * e.dnorm4 + 0.5 * e.munorm2 - e.q_term / prob.p -
                                 0.5 * prob.lambda * e.f_term));
    const auto j = nlohmann::json::parse(to_json(e));
    for (const char* key : {"dnorm4", "munorm2", "q_term", "f_term", "J"}) CHECK(j.contains(key));
}

TEST_CASE("energy gradient matches central differences") {
    const ProblemData prob = problem(0.4, 3.3, 1.7, 1000.0);
    CHECK(sup_norm(energy_gradient(GridFunction(prob.grid), prob).values) == 0.0);

    std::mt19937_64 rng(5);
    for (int i = 0; i < 20; ++i) {
        const GridFunction u = random_fn(prob.grid, rng);
        const GridFunction v = random_fn(prob.grid, rng);
        const double exact = quad_dot(energy_gradient(u, prob), v);
        for (double eps : {1e-4, 1e-5}) {
            const double fd = (energy(axpy(u, eps, v), prob).J - energy(axpy(u, -eps, v), prob).J) / (2.0 * eps);
            CHECK(std::abs(fd - exact) <= 1e-6 * (1.0 + std::abs(exact)));
        }
    }
    ProblemData bad = prob;
    bad.p = 1.5;
    CHECK_THROWS(energy_gradient(random_fn(prob.grid, rng), bad));
}

TEST_CASE("homogeneity of the energy pieces") {
    const ProblemData prob = problem(0.2, 4.7, 0.9, 10.0);
    std::mt19937_64 rng(6);
    for (int i = 0; i < 20; ++i) {
        const GridFunction u = random_fn(prob.grid, rng);
        const double t = 0.3 + 0.2 * i;
        const EnergyBreakdown e = energy(u, prob);
        const EnergyBreakdown et = energy(scale(u, t), prob);
        CHECK(rel_diff(et.dnorm4, std::pow(t, 4) * e.dnorm4) <= 1e-13);
        CHECK(rel_diff(et.munorm2, t * t * e.munorm2) <= 1e-13);
        CHECK(rel_diff(et.q_term, std::pow(t, prob.p) * e.q_term) <= 1e-13);
        CHECK(rel_diff(et.f_term, t * t * e.f_term) <= 1e-13);
    }
}

TEST_CASE("gap inequality below the full-box eigenvalue") {
    ProblemData prob = problem(0.1, 5.0, 0.0, 1e4, "poly:1,0,-2", 401);
    prob.fields.f = GridFunction(prob.grid);
    for (std::size_t k = 0; k < prob.grid.size(); ++k) prob.fields.f.values[k] = 1.0 - prob.grid.coord(k, 0);
    const double lt = principal_eig_full(prob).eigenvalue;
    std::mt19937_64 rng(7);
    for (double frac : {0.5, 0.9}) {
        prob.lambda = frac * lt;
        int violations = 0;
        for (int i = 0; i < 500; ++i) {
            const GridFunction u = random_fn(prob.grid, rng);
            const double m = mu_norm_sq(u, prob);
            const double b = m - prob.lambda * weighted_mass(u, prob.fields.f);
            if (b < (lt - prob.lambda) / lt * m - 1e-10 * m) ++violations;
        }
        CHECK(violations == 0);
    }
}
