#pragma once

#include <filesystem>
#include <json.hpp>

#include "mpqd/energy.hpp"
#include "mpqd/solver.hpp"
#include "mpqd/verify.hpp"

namespace mpqd {

using Json = nlohmann::ordered_json;

Json to_json(Point p);
Json to_json(const QuadratureReport& r);
Json to_json(const ResidualReport& r);
Json to_json(const GeometryReport& r);
Json to_json(const JunctionReport& r);
Json to_json(const NondegeneracyReport& r);
Json to_json(const ControlReport& r);
/// Scalars of a solve, without the fields.
Json solve_summary(const SolveResult& r);

void write_json(const std::filesystem::path& path, const Json& j);
/// basis_id,lhs,rhs,rel_err
void write_qi_csv(const std::filesystem::path& path, const QuadratureReport& r);
void write_trace_csv(const std::filesystem::path& path, const std::vector<double>& trace, int check_every);

}  // namespace mpqd
