#include <cmath>
#include <random>

#include "doctest.h"
#include "json.hpp"
#include "kirchhoff/eigenproblem.hpp"
#include "kirchhoff/fibering.hpp"
#include "kirchhoff/functionals.hpp"
#include "support.hpp"

using namespace ktest;

namespace {

FiberingCoefficients coeffs(double A, double B, double C, double a, double p) {
    FiberingCoefficients c;
    c.A = A;
    c.B = B;
    c.C = C;
    c.a = a;
    c.p = p;
    return c;
}

}  // namespace

TEST_CASE("fibering derivatives") {
    const FiberingCoefficients c = coeffs(1, 1, 2, 1, 3);
    for (double t : {0.3, 1.0, 1.7, 4.0}) {
        CHECK(h_prime(c, t) == doctest::Approx(t * (t - 1) * (t - 1)).epsilon(1e-13));
    }
    CHECK(h_value(c, 2.0) == doctest::Approx(0.25 * 16 + 0.5 * 4 - 2.0 * 8 / 3.0));
    CHECK(h_second(c, 1.0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK_THROWS_AS(h_prime(c, 0.0), FiberingError);
    CHECK_THROWS_AS(h_second(c, -1.0), FiberingError);

    const FiberClass fc = stationary_points(coeffs(1, 3, 2, 0, 5));
    REQUIRE(fc.roots.size() == 1);
    CHECK(fc.roots[0].t == doctest::Approx(std::cbrt(1.5)).epsilon(1e-12));

    const FiberClass none = stationary_points(coeffs(1, 1, 0, 1, 3));
    CHECK(none.roots.empty());
    for (double t : {0.01, 1.0, 100.0}) CHECK(h_prime(coeffs(1, 1, 0, 1, 3), t) > 0.0);
}

TEST_CASE("stationary point classification") {
    const FiberClass a = stationary_points(coeffs(1, 1, 1, 0, 5));
    REQUIRE(a.roots.size() == 1);
    CHECK(a.roots[0].t == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(a.roots[0].kind == RootKind::max);

    const FiberClass b = stationary_points(coeffs(1, 1, 2, 1, 4));
    CHECK(b.theta_set == SignSet::plus);
    CHECK(b.phi_p == doctest::Approx(1.0));
    REQUIRE(b.roots.size() == 1);
    CHECK(b.roots[0].t == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(b.roots[0].kind == RootKind::max);

    const FiberClass d = stationary_points(coeffs(1, 1, 2, 1, 3));
    REQUIRE(d.roots.size() == 1);
    CHECK(d.roots[0].t == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(d.roots[0].kind == RootKind::inflection);

    const FiberClass m = stationary_points(coeffs(1, -1, -1, 0.5, 5));
    CHECK(m.lambda_set == SignSet::minus);
    CHECK(m.theta_set == SignSet::minus);
    REQUIRE(m.roots.size() == 1);
    CHECK(m.roots[0].kind == RootKind::min);

    CHECK(stationary_points(coeffs(1, 1, -1, 0.5, 5)).roots.empty());
    CHECK(stationary_points(coeffs(1, 1, 1, 2, 4)).roots.empty());

    const auto j = nlohmann::json::parse(to_json(d));
    CHECK(j.contains("lambda_set"));
    CHECK(j.contains("theta_set"));
    CHECK(j["roots"].size() == 1);
}

TEST_CASE("classification agrees with an independent sign of h''") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> pos(0.05, 4.0), sgn(-2.0, 2.0), pd(2.2, 5.8);
    for (int i = 0; i < 2000; ++i) {
        const FiberingCoefficients c = coeffs(pos(rng), sgn(rng), sgn(rng), pos(rng), pd(rng));
        const FiberClass fc = stationary_points(c);
        CHECK(fc.roots.size() <= 2);
        for (std::size_t r = 0; r < fc.roots.size(); ++r) {
            const double t = fc.roots[r].t;
            CHECK(t > 0.0);
            if (r > 0) CHECK(t > fc.roots[r - 1].t);
            // h'(t)/t, which stays finite for the very large roots near p = 4
            const double g = c.a * c.A * t * t + c.B - c.C * std::pow(t, c.p - 2);
            const double scale = c.a * c.A * t * t + std::abs(c.B) + std::abs(c.C) * std::pow(t, c.p - 2);
            CHECK(std::abs(g) <= 1e-10 * scale);
            const double h2 = h_second(c, t);
            if (fc.roots[r].kind == RootKind::max) CHECK(h2 < 0.0);
            if (fc.roots[r].kind == RootKind::min) CHECK(h2 > 0.0);
        }
    }
}

TEST_CASE("degenerate parameters") {
    const DegenerateParams d1 = degenerate_params(coeffs(1, 1, 2, 0, 3));
    CHECK(d1.t == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(d1.a == doctest::Approx(1.0).epsilon(1e-14));
    FiberingCoefficients c1 = coeffs(1, 1, 2, d1.a, 3);
    CHECK(std::abs(h_prime(c1, d1.t)) <= 1e-12);

    const DegenerateParams d2 = degenerate_params(coeffs(1, 2, 2, 0, 3));
    CHECK(d2.t == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(d2.a == doctest::Approx(0.5).epsilon(1e-14));
    FiberingCoefficients c2 = coeffs(1, 2, 2, 0.5, 3);
    for (double t : {0.5, 2.0, 3.0}) CHECK(h_prime(c2, t) == doctest::Approx(0.5 * t * (t - 2) * (t - 2)));

    const DegenerateParams d3 = degenerate_params(coeffs(1.3, 0.7, 2.1, 0, 3));
    const DegenerateParams d4 = degenerate_params(coeffs(1.3, 1.4, 2.1, 0, 3));
    CHECK(d4.t == doctest::Approx(2.0 * d3.t));
    CHECK(d4.a == doctest::Approx(0.5 * d3.a));

    CHECK_THROWS_AS(degenerate_params(coeffs(1, 1, 2, 0, 4)), FiberingError);
    CHECK_THROWS_AS(degenerate_params(coeffs(1, -1, 2, 0, 3)), FiberingError);
    CHECK_THROWS_AS(degenerate_params(coeffs(1, 1, -2, 0, 3)), FiberingError);
    CHECK(abar_prefactor_solved(3.0) == doctest::Approx(0.25));
    CHECK(abar_prefactor_stated(3.0) == doctest::Approx(1.0 / 9.0));
}

TEST_CASE("double root and root count around a(u)") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> pos(0.1, 5.0), pd(2.05, 3.95);
    for (int i = 0; i < 300; ++i) {
        FiberingCoefficients c = coeffs(pos(rng), pos(rng), pos(rng), 0, pd(rng));
        const DegenerateParams d = degenerate_params(c);
        c.a = d.a;
        const double s1 = c.a * c.A * std::pow(d.t, 3) + c.B * d.t + c.C * std::pow(d.t, c.p - 1);
        CHECK(std::abs(h_prime(c, d.t)) <= 1e-9 * s1);
        const double s2 = 3 * c.a * c.A * d.t * d.t + c.B + (c.p - 1) * c.C * std::pow(d.t, c.p - 2);
        CHECK(std::abs(h_second(c, d.t)) <= 1e-8 * s2);

        c.a = 0.9 * d.a;
        const FiberClass below = stationary_points(c);
        REQUIRE(below.roots.size() == 2);
        CHECK(below.roots[0].kind == RootKind::max);
        CHECK(below.roots[1].kind == RootKind::min);
        c.a = 1.1 * d.a;
        CHECK(stationary_points(c).roots.empty());
    }
}

TEST_CASE("coefficients from grid functions") {
    ProblemData prob = problem(0.2, 5.0, 0.0, 1e4);
    const EigenResult e = principal_eig_omega(prob.fields, prob.grid);
    prob.lambda = e.eigenvalue;
    CHECK(std::abs(fibering_coeffs(e.eigenfunction, prob).B) <= 1e-6);

    std::mt19937_64 rng(14);
    const GridFunction u = random_fn(prob.grid, rng);
    GridFunction u2 = u;
    for (double& v : u2.values) v *= 2.0;
    const FiberingCoefficients c = fibering_coeffs(u, prob), c2 = fibering_coeffs(u2, prob);
    CHECK(c2.A == doctest::Approx(16 * c.A).epsilon(1e-13));
    CHECK(c2.B == doctest::Approx(4 * c.B).epsilon(1e-12));
    CHECK(c2.C == doctest::Approx(std::pow(2.0, 5) * c.C).epsilon(1e-13));

    ProblemData zero = prob;
    zero.lambda = 0.0;
    const GridFunction in = cosine_bump(prob.grid);
    CHECK(fibering_coeffs(in, zero).B == doctest::Approx(dirichlet_norm_sq(in)));
    CHECK_THROWS_AS(fibering_coeffs(GridFunction(prob.grid), prob), FiberingError);
}

TEST_CASE("Nehari projection") {
    ProblemData prob = problem(0.05, 5.0, 0.0, 1e4);
    const EigenResult e = principal_eig_omega(prob.fields, prob.grid);
    prob.lambda = 0.5 * e.eigenvalue;
    const NehariProjection np = project_to_nehari(e.eigenfunction, prob, Branch::minus);
    CHECK(np.t > 0.0);
    CHECK(np.h_second_at_one < 0.0);
    CHECK(np.nehari_residual <= 1e-9);

    ProblemData negq = problem(0.05, 5.0, 0.0, 1e4, "piecewise:0.5,1,-50");
    GridFunction wide(negq.grid);
    for (std::size_t k = 0; k < wide.size(); ++k)
        wide.values[k] = std::max(0.0, 1.0 - std::abs(negq.grid.coord(k, 0)) / 1.9);
    wide.values.front() = wide.values.back() = 0.0;
    REQUIRE(fibering_coeffs(wide, negq).C < 0.0);
    CHECK_THROWS_AS(project_to_nehari(wide, negq, Branch::minus), BranchAbsent);

    std::mt19937_64 rng(15);
    int projected = 0;
    for (int i = 0; i < 100; ++i) {
        for (double p : {2.5, 3.0, 4.0, 5.0}) {
            prob.p = p;
            try {
                const NehariProjection q = project_to_nehari(random_in_omega(prob.grid, rng), prob, Branch::minus);
                CHECK(q.nehari_residual <= 1e-9);
                CHECK(nehari_triple(q.coeffs).max_rel_diff <= 1e-10);
                ++projected;
            } catch (const BranchAbsent&) {
            }
        }
    }
    CHECK(projected > 50);
}

TEST_CASE("supercritical structure: one maximum when B > 0 and C > 0") {
    ProblemData prob = problem(0.3, 5.0, 0.0, 1e4);
    prob.lambda = 0.5 * principal_eig_omega(prob.fields, prob.grid).eigenvalue;
    std::mt19937_64 rng(16);
    std::uniform_real_distribution<double> pd(4.05, 5.95);
    int tested = 0;
    while (tested < 500) {
        prob.p = pd(rng);
        const FiberingCoefficients c = fibering_coeffs(random_in_omega(prob.grid, rng), prob);
        if (!(c.B > 0.0 && c.C > 0.0)) continue;
        ++tested;
        const FiberClass fc = stationary_points(c);
        REQUIRE(fc.roots.size() == 1);
        CHECK(fc.roots[0].kind == RootKind::max);
    }
}

TEST_CASE("branch names") {
    CHECK(parse_branch("minus") == Branch::minus);
    CHECK(parse_branch("plus") == Branch::plus);
    CHECK(std::string(to_string(Branch::plus)) == "plus");
    CHECK_THROWS(parse_branch("middle"));
}
