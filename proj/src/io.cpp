#include "kirchhoff/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include <boost/algorithm/string.hpp>

namespace kirchhoff {

std::string format_double(double v) {
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

void write_grid_function_csv(std::ostream& os, const GridFunction& u, std::optional<std::uint64_t> seed) {
    const Grid& g = u.grid;
    if (seed) {
        os << "# seed=" << *seed << '\n';
    }
    os << (g.dim() == 1 ? "x,value\n" : "x,y,value\n");
    for (std::size_t k = 0; k < u.size(); ++k) {
        os << format_double(g.coord(k, 0)) << ',';
        if (g.dim() == 2) {
            os << format_double(g.coord(k, 1)) << ',';
        }
        os << format_double(u.values[k]) << '\n';
    }
}

namespace {

double parse_number(const std::string& s, std::size_t line) {
    double v = 0.0;
    const std::string t = boost::algorithm::trim_copy(s);
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
        throw IoError("line " + std::to_string(line) + ": not a number: '" + t + "'");
    }
    return v;
}

std::vector<double> distinct_sorted(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

}  // namespace

GridFunction read_grid_function_csv(std::istream& is) {
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::string> header;
    std::vector<std::array<double, 3>> rows;
    while (std::getline(is, line)) {
        ++lineno;
        boost::algorithm::trim(line);
        if (line.empty() || line.front() == '#') continue;
        std::vector<std::string> cells;
        boost::algorithm::split(cells, line, boost::is_any_of(","));
        if (header.empty()) {
            header = cells;
            for (auto& c : header) boost::algorithm::trim(c);
            if (header != std::vector<std::string>{"x", "value"} && header != std::vector<std::string>{"x", "y", "value"}) {
                throw IoError("unexpected CSV header '" + line + "'");
            }
            continue;
        }
        if (cells.size() != header.size()) {
            throw IoError("line " + std::to_string(lineno) + ": expected " + std::to_string(header.size()) + " cells");
        }
        std::array<double, 3> r{0.0, 0.0, 0.0};
        if (cells.size() == 2) {
            r = {parse_number(cells[0], lineno), 0.0, parse_number(cells[1], lineno)};
        } else {
            r = {parse_number(cells[0], lineno), parse_number(cells[1], lineno), parse_number(cells[2], lineno)};
        }
        rows.push_back(r);
    }
    if (header.empty() || rows.empty()) {
        throw IoError("CSV has no data rows");
    }
    const int dim = header.size() == 2 ? 1 : 2;
    std::vector<double> xs, ys;
    for (const auto& r : rows) {
        xs.push_back(r[0]);
        ys.push_back(r[1]);
    }
    xs = distinct_sorted(std::move(xs));
    ys = distinct_sorted(std::move(ys));
    std::vector<std::array<double, 2>> ext{{xs.front(), xs.back()}};
    std::vector<std::size_t> pts{xs.size()};
    if (dim == 2) {
        ext.push_back({ys.front(), ys.back()});
        pts.push_back(ys.size());
    }
    const Grid grid = Grid::build(dim, ext, pts);
    if (rows.size() != grid.size()) {
        throw IoError("node count does not match a uniform tensor grid");
    }
    GridFunction u(grid);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        for (int ax = 0; ax < dim; ++ax) {
            const double expect = grid.coord(k, ax);
            if (std::abs(rows[k][static_cast<std::size_t>(ax)] - expect) > 1e-9 * (1.0 + std::abs(expect))) {
                throw IoError("row " + std::to_string(k) + " is out of grid order");
            }
        }
        u.values[k] = rows[k][2];
    }
    return u;
}

GridFunction read_grid_function_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    return read_grid_function_csv(in);
}

void write_fields_csv(std::ostream& os, const Grid& grid, const CoefficientFields& fields) {
    os << (grid.dim() == 1 ? "x" : "x,y") << ",V,f,Q,omega\n";
    for (std::size_t k = 0; k < grid.size(); ++k) {
        os << format_double(grid.coord(k, 0)) << ',';
        if (grid.dim() == 2) {
            os << format_double(grid.coord(k, 1)) << ',';
        }
        os << format_double(fields.V.values[k]) << ',' << format_double(fields.f.values[k]) << ','
           << format_double(fields.Q.values[k]) << ',' << int(fields.omega_mask[k]) << '\n';
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot write " + tmp.string());
        }
        out << content;
        if (!out) {
            throw IoError("write failed for " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace kirchhoff
