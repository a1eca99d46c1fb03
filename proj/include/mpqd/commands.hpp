#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mpqd/config.hpp"
#include "mpqd/reports.hpp"

namespace mpqd {

enum ExitCode : int {
  exit_ok = 0,
  exit_input = 1,
  exit_nonconvergence = 2,
  exit_truncation = 3,
  exit_gate_failed = 4,
};

struct CommandOptions {
  std::string config;
  std::string out;
  std::string result;  // verify / control-eval input directory
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<double> resolution;
  double j = 40.0;
  double j_min = 1.0;
  double j_max = 50.0;
  int steps = 10;
};

const std::vector<std::string>& scenario_names();

/// --out, else $MPQD_OUT/<name>, else <fallback>.
std::filesystem::path output_dir(const CommandOptions& opts, const std::string& name, const std::string& fallback);

/// Applies --seed, --threads and --resolution to a parsed config.
void apply_overrides(ProblemConfig& cfg, const CommandOptions& opts);

/// u_i.field, v_i.field, mask_i.pgm, trace.csv, meta.json and problem.cfg.
void write_result_dir(const std::filesystem::path& dir, const ProblemConfig& cfg, const SolveResult& res);

struct CheckOutcome {
  Json report;
  bool passed = true;
};

/// Every check enabled in cfg.verify, on fields already on cfg.grid(). `v` may
/// be empty (inclusion is then skipped). QI CSVs go to `dir` when non-empty.
CheckOutcome run_checks(const ProblemConfig& cfg, const std::vector<ScalarField>& u, const std::vector<ScalarField>& v,
                        const std::filesystem::path& dir);

int exit_code_for(SolveStatus s);

// Each command returns its exit code; library errors escape as mpqd::Error.
int cmd_solve(const CommandOptions& opts, std::ostream& log);
int cmd_verify(const CommandOptions& opts, std::ostream& log);
int cmd_scenario(const std::string& name, const CommandOptions& opts, std::ostream& log);
int cmd_junction_scan(const CommandOptions& opts, std::ostream& log);

/// Maps an error code to the exit-code contract.
int exit_code_for_error(const std::string& code);

}  // namespace mpqd
