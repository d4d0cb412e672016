#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "kirchhoff/fields.hpp"
#include "kirchhoff/grid.hpp"
#include "kirchhoff/thresholds.hpp"

namespace ktest {

using namespace kirchhoff;

inline const double kPi = std::numbers::pi;
inline const double kLambdaInterval = kPi * kPi / 4.0;  // first Dirichlet eigenvalue of (-1,1)

inline Grid line_grid(std::size_t n = 401) { return Grid::line(-2.0, 2.0, n); }

inline CoefficientFields well_fields(const Grid& g, const std::string& q = "poly:1,0,-2",
                                     const std::string& f = "const:1") {
    return make_well_fields(g, 1.0, 2.0, parse_field_spec(f), parse_field_spec(q));
}

inline ProblemData problem(double a, double p, double lambda, double mu, const std::string& q = "poly:1,0,-2",
                           std::size_t n = 401) {
    const Grid g = line_grid(n);
    return ProblemData{g, well_fields(g, q), a, p, lambda, mu, std::nullopt};
}

/// cos(πx/2) on |x| <= 1, zero elsewhere.
inline GridFunction cosine_bump(const Grid& g) {
    GridFunction u(g);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double x = g.coord(k, 0);
        u.values[k] = std::abs(x) <= 1.0 ? std::cos(kPi * x / 2.0) : 0.0;
    }
    return u;
}

inline GridFunction random_fn(const Grid& g, std::mt19937_64& rng, bool positive = false) {
    return random_smooth_function(g, rng, positive);
}

/// Positive random function supported inside omega = (-1,1).
inline GridFunction random_in_omega(const Grid& g, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    double c[6];
    for (double& v : c) v = n(rng);
    GridFunction u(g);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double x = g.coord(k, 0);
        if (std::abs(x) >= 1.0) continue;
        double s = 0.0;
        for (int m = 1; m <= 6; ++m) s += c[m - 1] / m * std::sin(m * kPi * (x + 1.0) / 2.0);
        u.values[k] = std::abs(s);
    }
    return u;
}

inline double rel_diff(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace ktest
