#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kirchhoff/fields.hpp"
#include "kirchhoff/grid.hpp"

namespace kirchhoff {

class FiberingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The requested stationary point of the fibering map does not exist for this u.
class BranchAbsent : public FiberingError {
public:
    using FiberingError::FiberingError;
};

enum class Branch { minus, plus };
const char* to_string(Branch b);
Branch parse_branch(const std::string& s);

/// h_u(t) = (a/4)A t⁴ + (1/2)B t² − (1/p)C t^p.
struct FiberingCoefficients {
    double A = 0.0;  ///< ‖u‖⁴_D
    double B = 0.0;  ///< ‖u‖²_μ − λ∫f u²
    double C = 0.0;  ///< ∫Q|u|^p
    double p = 4.0;
    double a = 0.0;
    // Pieces of B, kept for relative residuals.
    double munorm2 = 0.0;
    double lambda_f = 0.0;
};

FiberingCoefficients fibering_coeffs(const GridFunction& u, const ProblemData& problem);

double h_value(const FiberingCoefficients& c, double t);
double h_prime(const FiberingCoefficients& c, double t);
double h_second(const FiberingCoefficients& c, double t);

enum class SignSet { plus, minus, zero };
enum class RootKind { max, min, inflection };
const char* to_string(SignSet s);
const char* to_string(RootKind k);

struct FiberRoot {
    double t = 0.0;
    RootKind kind = RootKind::inflection;
    double h_second = 0.0;
};

struct FiberClass {
    SignSet lambda_set = SignSet::zero;  ///< sign of B
    SignSet theta_set = SignSet::zero;   ///< sign of Φ_p
    double phi_p = 0.0;                  ///< C, or C − aA at p = 4
    std::vector<FiberRoot> roots;        ///< positive, ascending
};

/// All positive stationary points of h_u. h′(t) = t·g(t) with
/// g(t) = aA t² + B − C t^{p−2}; g has at most one interior critical point, so
/// splitting there leaves at most two monotone pieces, each bracketed and
/// solved with TOMS 748. Roots where |h″| <= 1e-8 · scale are reported once
/// as an inflection.
FiberClass stationary_points(const FiberingCoefficients& c);

/// Scale t for the requested branch (max of h_u for minus, min for plus).
std::optional<double> branch_root(const FiberingCoefficients& c, Branch branch);

struct NehariProjection {
    double t = 0.0;
    GridFunction u;                 ///< t · input
    FiberingCoefficients coeffs;    ///< of the scaled function
    double h_second_at_one = 0.0;   ///< sign certifies the branch
    double nehari_residual = 0.0;
};

/// Rescales u onto the requested Nehari branch. Throws BranchAbsent if h_u has
/// no stationary point of the matching kind.
NehariProjection project_to_nehari(const GridFunction& u, const ProblemData& problem, Branch branch);

/// |a‖u‖⁴ + ‖u‖²_μ − ∫Q|u|^p − λ∫fu²| relative to the sum of magnitudes.
double nehari_residual(const FiberingCoefficients& c);

/// The three expressions for h″(1) valid on the Nehari manifold.
struct TripleIdentity {
    double via_b_and_a = 0.0;  ///< −(p−2)B − a(p−4)A
    double via_a_and_c = 0.0;  ///< 2aA − (p−2)C
    double via_b_and_c = 0.0;  ///< −2B − (p−4)C
    double max_rel_diff = 0.0;
};
TripleIdentity nehari_triple(const FiberingCoefficients& c);

/// Parameters of the degenerate fibering map for 2 < p < 4: the unique a at
/// which h_u has a double stationary point, and where it sits.
struct DegenerateParams {
    double t = 0.0;     ///< t(u)
    double a = 0.0;     ///< a(u)
    double abar = 0.0;  ///< C^{2/(p−2)} / (A · B^{(4−p)/(p−2)})
};
DegenerateParams degenerate_params(const FiberingCoefficients& c);
DegenerateParams degenerate_params(const GridFunction& u, const ProblemData& problem);

/// ((p−2)/(4−p)) ((4−p)/2)^{2/(p−2)}: the factor that turns Ā(u) into a(u).
double abar_prefactor_solved(double p);
/// ((p−2)/(4−p)) ((4−p)/p)^{2/(p−2)}: the factor printed in the supremum threshold.
double abar_prefactor_stated(double p);

std::string to_json(const FiberClass& fc);

}  // namespace kirchhoff
