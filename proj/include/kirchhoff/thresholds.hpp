#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "kirchhoff/fields.hpp"
#include "kirchhoff/grid.hpp"

namespace kirchhoff {

/// Random combination of low box sine modes with 1/k decay, zero on the
/// boundary; absolute value taken when `positive`.
GridFunction random_smooth_function(const Grid& grid, std::mt19937_64& rng, bool positive);

struct AscentOptions {
    int budget = 200;      ///< ascent iterations per restart
    int restarts = 32;     ///< total starts, deterministic seeds first
    std::uint64_t seed = 1;
    std::vector<GridFunction> witnesses;  ///< extra starting points
};

/// Best value of a scale-invariant quotient found by multi-start ascent. The
/// value is a lower bound for the discrete supremum, never a claim about it.
struct QuotientEstimate {
    double best = 0.0;
    GridFunction argmax;
    long samples = 0;        ///< quotient evaluations at accepted iterates and starts
    int admissible_starts = 0;
};

/// sup ∫Q|u|⁴ / ‖u‖⁴_D over the box.
QuotientEstimate estimate_gamma0(const CoefficientFields& fields, const Grid& grid, const AscentOptions& opts = {});

/// sup Ā_λ(u) over u with B > 0 and C > 0, for 2 < p < 4. The returned `best`
/// is the bare supremum of Ā_λ(u); the a-thresholds apply the prefactors from
/// fibering.hpp. Throws if no admissible start exists.
QuotientEstimate estimate_abar_sup(const ProblemData& problem, const AscentOptions& opts = {});

/// ∫_Ω Q φ₁^p and λ₁⁻² ∫_Ω Q φ₁⁴.
struct Phi1Sign {
    double integral = 0.0;
    double p4_gate = 0.0;
    double lambda1 = 0.0;
};
Phi1Sign phi1_sign_condition(const CoefficientFields& fields, const Grid& grid, double p);

/// 1 − 2((4−p)/4)^{2/p}, the λ₁ multiplier bounding the small-λ multiplicity window.
double small_lambda_multiplier(double p);

/// Discrete best constant S_p(Ω) = inf ‖∇u‖₂ / ‖u‖_p over u vanishing off Ω, from
/// the ground state of −Δw = w^{p−1} (where ‖∇w‖² = ∫w^p = m and S_p² = m^{1−2/p}).
double sobolev_constant_omega(const CoefficientFields& fields, const Grid& grid, double p);

struct ThresholdReport {
    double gamma0_est = 0.0;
    long gamma0_samples = 0;
    bool gamma0_nonpositive = false;
    std::optional<double> abar_sup;          ///< sup Ā_λ(u)
    std::optional<double> abar_lambda_est;   ///< prefactor ((4−p)/2)^{2/(p−2)}, consistent with a(u)
    std::optional<double> abar_lambda_stated;///< prefactor ((4−p)/p)^{2/(p−2)}
    double phi1_sign_p = 0.0;
    double phi1_p4_gate = 0.0;
    double lambda1 = 0.0;
    double lambda_tilde = 0.0;
    std::optional<double> k_mu;
    std::optional<double> c_p;
    std::optional<double> sp_omega;
    std::optional<double> energy_band;       ///< (p−2)/(4p) C(p) K^p(μ)
    std::optional<double> a0_proxy;
    long samples = 0;
    std::vector<std::string> notes;
};

/// Computes every estimate for one problem instance.
ThresholdReport compute_thresholds(const ProblemData& problem, const AscentOptions& opts = {},
                                   std::optional<double> gamma0_cached = std::nullopt);

struct Gate {
    std::string name;
    bool holds = false;
    bool estimated = false;
};

struct RegimeResult {
    std::vector<std::string> tags;
    std::vector<Gate> gates;
};

struct RegimeOptions {
    double near_window = 0.05;  ///< λ ∈ [λ₁, λ₁(1 + near_window)) stands in for "near λ₁"
};

/// Checks each regime's parameter gates literally against the estimates.
RegimeResult regime_classify(const ProblemData& problem, const ThresholdReport& t, const RegimeOptions& opts = {});

std::string to_json(const ThresholdReport& t);
std::string to_json(const RegimeResult& r);
std::string join_tags(const RegimeResult& r);

}  // namespace kirchhoff
