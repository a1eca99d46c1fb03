#include "mpqd/field_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "mpqd/error.hpp"

namespace mpqd {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

double parse_double(const std::string& token, std::size_t line) {
  double v = 0.0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw Error("field_format", "bad number '" + token + "' on line " + std::to_string(line));
  }
  return v;
}

}  // namespace

void write_field(std::ostream& os, const ScalarField& field) {
  const Grid& g = field.grid();
  os << "MPQD-FIELD " << g.nx() << ' ' << g.ny() << ' ' << format_double(g.origin().x) << ' '
     << format_double(g.origin().y) << ' ' << format_double(g.h()) << '\n';
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      if (i) os << ' ';
      os << format_double(field(i, j));
    }
    os << '\n';
  }
}

ScalarField read_field(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error("field_format", "missing header");
  std::istringstream header(line);
  std::string magic, snx, sny, sx0, sy0, sh;
  if (!(header >> magic >> snx >> sny >> sx0 >> sy0 >> sh) || magic != "MPQD-FIELD") {
    throw Error("field_format", "header must be 'MPQD-FIELD nx ny x0 y0 h'");
  }
  const double nxd = parse_double(snx, 1), nyd = parse_double(sny, 1);
  if (nxd != static_cast<int>(nxd) || nyd != static_cast<int>(nyd)) throw Error("field_format", "non-integer size");
  const Grid grid({parse_double(sx0, 1), parse_double(sy0, 1)}, parse_double(sh, 1), static_cast<int>(nxd),
                  static_cast<int>(nyd));
  ScalarField field(grid);
  for (int j = 0; j < grid.ny(); ++j) {
    const std::size_t lineno = static_cast<std::size_t>(j) + 2;
    if (!std::getline(is, line)) throw Error("field_format", "truncated at line " + std::to_string(lineno));
    std::istringstream row(line);
    std::string tok;
    int i = 0;
    while (row >> tok) {
      if (i >= grid.nx()) throw Error("field_format", "too many values on line " + std::to_string(lineno));
      const double v = parse_double(tok, lineno);
      if (!std::isfinite(v)) throw Error("field_format", "non-finite value on line " + std::to_string(lineno));
      field(i++, j) = v;
    }
    if (i != grid.nx()) throw Error("field_format", "too few values on line " + std::to_string(lineno));
  }
  std::string rest;
  while (std::getline(is, rest)) {
    if (rest.find_first_not_of(" \t\r") != std::string::npos) throw Error("field_format", "trailing data");
  }
  return field;
}

void save_field(const std::filesystem::path& path, const ScalarField& field) {
  std::ofstream os(path);
  if (!os) throw Error("io_error", "cannot write " + path.string());
  write_field(os, field);
}

ScalarField load_field(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("io_error", "cannot read " + path.string());
  return read_field(is);
}

void save_mask_pgm(const std::filesystem::path& path, const PhaseMask& mask) {
  std::ofstream os(path);
  if (!os) throw Error("io_error", "cannot write " + path.string());
  const Grid& g = mask.grid();
  os << "P2\n" << g.nx() << ' ' << g.ny() << "\n255\n";
  for (int j = g.ny() - 1; j >= 0; --j) {
    for (int i = 0; i < g.nx(); ++i) {
      if (i) os << ' ';
      os << (mask(i, j) ? 255 : 0);
    }
    os << '\n';
  }
}

}  // namespace mpqd
