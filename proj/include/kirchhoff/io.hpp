#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "kirchhoff/fields.hpp"
#include "kirchhoff/grid.hpp"

namespace kirchhoff {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shortest round-trip text for a double.
std::string format_double(double v);

/// Flat CSV: optional "# key=value" comment lines, then a header
/// "x,value" (1D) or "x,y,value" (2D), one row per node in grid order.
void write_grid_function_csv(std::ostream& os, const GridFunction& u, std::optional<std::uint64_t> seed = std::nullopt);

/// Reads the format above and rebuilds the uniform grid from the coordinates.
GridFunction read_grid_function_csv(std::istream& is);
GridFunction read_grid_function_csv(const std::filesystem::path& path);

/// Node coordinates with V, f, Q and the omega mask.
void write_fields_csv(std::ostream& os, const Grid& grid, const CoefficientFields& fields);

/// Writes through a temporary file and renames it into place.
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace kirchhoff
