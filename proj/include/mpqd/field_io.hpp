#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "mpqd/grid.hpp"

namespace mpqd {

// Text field format:
//   MPQD-FIELD nx ny x0 y0 h
//   <ny lines of nx space-separated values, row j = 0 first>
// Values are written in shortest round-trip form, so a write/read cycle is exact.

void write_field(std::ostream& os, const ScalarField& field);
ScalarField read_field(std::istream& is);
void save_field(const std::filesystem::path& path, const ScalarField& field);
ScalarField load_field(const std::filesystem::path& path);

/// Plain graymap (P2), 0 outside / 255 inside; the top image row is the
/// largest y.
void save_mask_pgm(const std::filesystem::path& path, const PhaseMask& mask);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

}  // namespace mpqd
