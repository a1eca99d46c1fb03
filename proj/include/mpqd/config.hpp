#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mpqd/grid.hpp"
#include "mpqd/measures.hpp"
#include "mpqd/solver.hpp"
#include "mpqd/verify.hpp"

namespace mpqd {

struct PhaseConfig {
  double lambda = 1.0;
  MeasureSpec measure;
};

struct VerifyConfig {
  bool qi = true;
  int d_max = 3;
  double qi_tol = 0.01;
  std::vector<Point> poles;
  bool residual = true;
  bool inclusion = true;
  bool junctions = true;
  int junction_radius = 3;
  bool reflection = false;
  Point reflection_n{1.0, 0.0};
  double reflection_t0 = 0.0;
  bool symmetric = false;
  bool starshaped = false;
  double alpha = -1.0;
  bool nondegeneracy = false;
};

struct ProblemConfig {
  Point origin{-2.0, -2.0};
  double width = 4.0;
  double height = 4.0;
  double h = 1.0 / 64.0;
  /// 0 means 2h.
  double mollifier_radius = 0.0;
  SolverParams solver;
  VerifyConfig verify;
  std::string out_dir = "mpqd_out";
  std::vector<PhaseConfig> phases;

  Grid grid() const;
  std::vector<double> lambdas() const;
  std::vector<MeasureSpec> measures() const;
  std::vector<ForceField> forces() const;
};

/// Parses the sectioned key = value format. Throws Error with code
/// "config_syntax", "unknown_key" or "config_invalid"; messages carry the line.
ProblemConfig parse_config(std::istream& is);
ProblemConfig load_config(const std::filesystem::path& path);

/// Writes a config that parse_config reads back to the same problem.
void write_config(std::ostream& os, const ProblemConfig& cfg);

/// "0.0078125" or "1/128".
double parse_spacing(const std::string& text);

}  // namespace mpqd
