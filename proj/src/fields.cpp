#include "kirchhoff/fields.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace kirchhoff {

namespace {

std::vector<double> parse_numbers(const std::string& body, const std::string& spec) {
    std::vector<double> out;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (item.find_first_not_of(" \t", used) != std::string::npos) {
                throw std::invalid_argument(item);
            }
        } catch (const std::exception&) {
            throw DomainError("field spec '" + spec + "': bad number '" + item + "'");
        }
    }
    return out;
}

double radius(std::array<double, 2> x, int dim) {
    return dim == 1 ? std::abs(x[0]) : std::hypot(x[0], x[1]);
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool positive_on_mask(const GridFunction& w, const std::vector<std::uint8_t>& mask) {
    for (std::size_t k = 0; k < mask.size(); ++k) {
        if (mask[k] && w.values[k] > 0.0) {
            return true;
        }
    }
    return false;
}

void check_sign_hypotheses(const CoefficientFields& cf) {
    if (std::none_of(cf.omega_mask.begin(), cf.omega_mask.end(), [](auto m) { return m != 0; })) {
        throw DomainError("potential has an empty zero set");
    }
    if (!positive_on_mask(cf.f, cf.omega_mask)) {
        throw DomainError("weight f has no positive part on the zero set of V");
    }
    if (!positive_on_mask(cf.Q, cf.omega_mask)) {
        throw DomainError("weight Q has no positive part on the zero set of V");
    }
}

}  // namespace

FieldSpec parse_field_spec(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        throw DomainError("field spec '" + text + "' must look like kind:values");
    }
    std::string kind = text.substr(0, colon);
    kind.erase(0, kind.find_first_not_of(" \t"));
    kind.erase(kind.find_last_not_of(" \t") + 1);
    const auto nums = parse_numbers(text.substr(colon + 1), text);
    if (kind == "const") {
        if (nums.size() != 1) {
            throw DomainError("const spec takes one value");
        }
        return field::Constant{nums[0]};
    }
    if (kind == "poly") {
        if (nums.empty()) {
            throw DomainError("poly spec needs at least one coefficient");
        }
        return field::RadialPolynomial{nums};
    }
    if (kind == "gauss") {
        if (nums.size() < 2 || nums.size() > 5 || nums[1] <= 0.0) {
            throw DomainError("gauss spec is amp,width[,offset[,cx[,cy]]] with width > 0");
        }
        field::GaussianBump g{nums[0], nums[1], 0.0, {0.0, 0.0}};
        if (nums.size() > 2) g.offset = nums[2];
        if (nums.size() > 3) g.center[0] = nums[3];
        if (nums.size() > 4) g.center[1] = nums[4];
        return g;
    }
    if (kind == "piecewise") {
        if (nums.size() != 3 || nums[0] < 0.0) {
            throw DomainError("piecewise spec is radius,inside,outside");
        }
        return field::PiecewiseRadius{nums[0], nums[1], nums[2]};
    }
    throw DomainError("unknown field kind '" + kind + "'");
}

std::string format_field_spec(const FieldSpec& spec) {
    std::ostringstream os;
    os.precision(17);
    std::visit(overloaded{
                   [&](const field::Constant& c) { os << "const:" << c.value; },
                   [&](const field::RadialPolynomial& p) {
                       os << "poly:";
                       for (std::size_t k = 0; k < p.coeffs.size(); ++k) {
                           os << (k ? "," : "") << p.coeffs[k];
                       }
                   },
                   [&](const field::GaussianBump& g) {
                       os << "gauss:" << g.amplitude << ',' << g.width << ',' << g.offset << ','
                          << g.center[0] << ',' << g.center[1];
                   },
                   [&](const field::PiecewiseRadius& p) {
                       os << "piecewise:" << p.radius << ',' << p.inside << ',' << p.outside;
                   }},
               spec);
    return os.str();
}

double evaluate(const FieldSpec& spec, std::array<double, 2> x, int dim) {
    return std::visit(
        overloaded{[](const field::Constant& c) { return c.value; },
                   [&](const field::RadialPolynomial& p) {
                       const double r = radius(x, dim);
                       double acc = 0.0;
                       for (auto it = p.coeffs.rbegin(); it != p.coeffs.rend(); ++it) {
                           acc = acc * r + *it;
                       }
                       return acc;
                   },
                   [&](const field::GaussianBump& g) {
                       const double dx = x[0] - g.center[0];
                       const double dy = dim == 2 ? x[1] - g.center[1] : 0.0;
                       return g.offset +
                              g.amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * g.width * g.width));
                   },
                   [&](const field::PiecewiseRadius& p) {
                       return radius(x, dim) <= p.radius ? p.inside : p.outside;
                   }},
        spec);
}

GridFunction sample(const FieldSpec& spec, const Grid& grid) {
    GridFunction out(grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const std::array<double, 2> x{grid.coord(k, 0), grid.dim() == 2 ? grid.coord(k, 1) : 0.0};
        out.values[k] = evaluate(spec, x, grid.dim());
    }
    return out;
}

CoefficientFields make_well_fields(const Grid& grid, double omega_radius, double ramp_power,
                                   const FieldSpec& f_spec, const FieldSpec& Q_spec) {
    if (!(omega_radius > 0.0)) {
        throw DomainError("omega_radius must be positive");
    }
    for (int ax = 0; ax < grid.dim(); ++ax) {
        if (!(grid.lower(ax) < -omega_radius && omega_radius < grid.upper(ax))) {
            throw DomainError("omega cube must lie strictly inside the box");
        }
    }
    if (!(ramp_power >= 1.0)) {
        throw DomainError("ramp_power must be >= 1");
    }
    CoefficientFields cf;
    cf.omega_radius = omega_radius;
    cf.ramp_power = ramp_power;
    cf.V = GridFunction(grid);
    cf.omega_mask.assign(grid.size(), 0);
    const double snap = 1e-9 * std::max(grid.spacing(0), grid.spacing(1));
    for (std::size_t k = 0; k < grid.size(); ++k) {
        double d2 = 0.0;
        for (int ax = 0; ax < grid.dim(); ++ax) {
            const double excess = std::abs(grid.coord(k, ax)) - omega_radius;
            if (excess > snap) {
                d2 += excess * excess;
            }
        }
        if (d2 == 0.0) {
            cf.omega_mask[k] = 1;
        } else {
            cf.V.values[k] = std::pow(std::sqrt(d2), ramp_power);
        }
    }
    cf.f = sample(f_spec, grid);
    cf.Q = sample(Q_spec, grid);
    check_sign_hypotheses(cf);
    return cf;
}

CoefficientFields make_fields(GridFunction V, GridFunction f, GridFunction Q) {
    const Grid& grid = V.grid;
    require_same_size(grid, f.size(), "f");
    require_same_size(grid, Q.size(), "Q");
    CoefficientFields cf;
    cf.omega_mask.assign(grid.size(), 0);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (!(V.values[k] >= 0.0)) {
            throw DomainError("potential V must be nonnegative");
        }
        cf.omega_mask[k] = V.values[k] == 0.0 ? 1 : 0;
    }
    cf.V = std::move(V);
    cf.f = std::move(f);
    cf.Q = std::move(Q);
    check_sign_hypotheses(cf);
    return cf;
}

std::vector<std::uint8_t> omega_interior(const Grid& grid, const std::vector<std::uint8_t>& mask) {
    std::vector<std::uint8_t> out(grid.size(), 0);
    const std::size_t nx = grid.points(0);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (!mask[k] || grid.is_boundary(k)) {
            continue;
        }
        bool inner = mask[k - 1] && mask[k + 1];
        if (grid.dim() == 2) {
            inner = inner && mask[k - nx] && mask[k + nx];
        }
        out[k] = inner ? 1 : 0;
    }
    return out;
}

std::vector<std::uint8_t> box_interior(const Grid& grid) {
    std::vector<std::uint8_t> out(grid.size(), 1);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (grid.is_boundary(k)) {
            out[k] = 0;
        }
    }
    return out;
}

void ProblemData::validate() const {
    if (!(a >= 0.0)) {
        throw DomainError("Kirchhoff coefficient a must be >= 0");
    }
    if (!(p > 2.0 && p < 6.0)) {
        throw DomainError("exponent p must lie in (2, 6)");
    }
    if (!(mu > 0.0)) {
        throw DomainError("well depth mu must be > 0");
    }
    if (!std::isfinite(lambda)) {
        throw DomainError("lambda must be finite");
    }
    require_same_size(grid, fields.V.size(), "V");
    require_same_size(grid, fields.f.size(), "f");
    require_same_size(grid, fields.Q.size(), "Q");
    if (fields.omega_mask.size() != grid.size()) {
        throw DomainError("omega mask size mismatch");
    }
}

}  // namespace kirchhoff
