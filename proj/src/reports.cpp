#include "mpqd/reports.hpp"

#include <cmath>
#include <fstream>

#include "mpqd/error.hpp"
#include "mpqd/field_io.hpp"

namespace mpqd {

namespace {

// JSON has no infinity; unbounded values are written as null.
Json num(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("io_error", "cannot write " + path.string());
  return out;
}

}  // namespace

Json to_json(Point p) { return Json::array({num(p.x), num(p.y)}); }

Json to_json(const QuadratureReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"basis", row.basis},
                    {"lhs", num(row.lhs)},
                    {"rhs", num(row.rhs)},
                    {"abs_err", num(row.abs_err)},
                    {"rel_err", num(row.rel_err)}});
  return {{"rows", rows}, {"worst_rel_err", num(r.worst_rel_err)}};
}

Json to_json(const ResidualReport& r) {
  return {{"sup", num(r.sup)},           {"l1", num(r.l1)},           {"nodes", r.nodes},
          {"band_sup", num(r.band_sup)}, {"band_l1", num(r.band_l1)}, {"band_nodes", r.band_nodes}};
}

Json to_json(const GeometryReport& r) {
  return {{"check", r.check},
          {"passed", r.passed},
          {"hypothesis_ok", r.hypothesis_ok},
          {"worst_violation", num(r.worst_violation)},
          {"tolerance", num(r.tolerance)},
          {"witness", to_json(r.witness)},
          {"samples", r.samples},
          {"support_violations", r.support_violations},
          {"scaling_violation", num(r.scaling_violation)}};
}

Json to_json(const JunctionReport& r) {
  Json pts = Json::array();
  for (const auto& p : r.points)
    pts.push_back({{"location", to_json(p.location)},
                   {"degree", p.degree},
                   {"on_measure", p.on_measure},
                   {"nodes", p.nodes}});
  return {{"radius_cells", r.radius_cells}, {"max_degree", r.max_degree()}, {"points", pts}};
}

Json to_json(const NondegeneracyReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"x0", to_json(row.x0)},
                    {"r", num(row.r)},
                    {"sup", num(row.sup)},
                    {"bound", num(row.bound)},
                    {"passes", row.passes}});
  return {{"passed", r.passed}, {"skipped_on_measure", r.skipped_on_measure}, {"rows", rows}};
}

Json to_json(const ControlReport& r) {
  Json phases = Json::array();
  for (const auto& p : r.phases)
    phases.push_back({{"dirichlet", num(p.dirichlet)},
                      {"lambda_term", num(p.lambda_term)},
                      {"measure_term", num(p.measure_term)},
                      {"negative_mass", num(p.negative_mass)},
                      {"cg_iterations", p.cg_iterations},
                      {"cg_residual", num(p.cg_residual)}});
  return {{"I", num(r.I)},
          {"I_identity", num(r.I_identity)},
          {"tol_num", num(r.tol_num)},
          {"admissible", r.admissible},
          {"nonnegative", r.nonnegative},
          {"phases", phases}};
}

Json solve_summary(const SolveResult& r) {
  Json areas = Json::array();
  for (const auto& m : r.masks) areas.push_back(num(m.area()));
  return {{"status", to_string(r.status)},
          {"converged", r.converged},
          {"sweeps_used", r.sweeps_used},
          {"residual", num(r.residual)},
          {"energy", num(r.energy_trace.empty() ? 0.0 : r.energy_trace.back())},
          {"inclusion_violations", r.inclusion_violations},
          {"supp_threshold", num(r.supp_threshold)},
          {"seed", r.seed},
          {"start", r.start},
          {"phase_areas", areas}};
}

void write_json(const std::filesystem::path& path, const Json& j) {
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

void write_qi_csv(const std::filesystem::path& path, const QuadratureReport& r) {
  auto out = open_out(path);
  out << "basis_id,lhs,rhs,rel_err\n";
  for (const auto& row : r.rows)
    out << '"' << row.basis << "\"," << format_double(row.lhs) << "," << format_double(row.rhs) << ","
        << format_double(row.rel_err) << "\n";
}

void write_trace_csv(const std::filesystem::path& path, const std::vector<double>& trace, int check_every) {
  auto out = open_out(path);
  out << "sweep,energy\n";
  for (std::size_t k = 0; k < trace.size(); ++k)
    out << k * static_cast<std::size_t>(check_every) << "," << format_double(trace[k]) << "\n";
}

}  // namespace mpqd
