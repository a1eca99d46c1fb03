#include <CLI11.hpp>
#include <iostream>

#include "mpqd/commands.hpp"
#include "mpqd/config.hpp"
#include "mpqd/error.hpp"

namespace {

void add_common(CLI::App* cmd, mpqd::CommandOptions& o, std::string& resolution) {
  cmd->add_option("--out", o.out, "output directory (default $MPQD_OUT/<name>)");
  cmd->add_option("--seed", o.seed, "tie-break seed");
  cmd->add_option("--threads", o.threads, "worker cap")->check(CLI::PositiveNumber);
  cmd->add_option("--resolution", resolution, "grid spacing, e.g. 0.0078125 or 1/128");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mpqd: multi-phase quadrature domains on a grid"};
  app.require_subcommand(1);
  mpqd::CommandOptions o;
  std::string resolution;
  std::string scenario;

  auto* solve = app.add_subcommand("solve", "solve the problem in a config file");
  solve->add_option("--config", o.config, "problem config")->required();
  add_common(solve, o, resolution);

  auto* verify = app.add_subcommand("verify", "run the enabled checks on a result directory");
  verify->add_option("--result", o.result, "result directory")->required();
  verify->add_option("--config", o.config, "problem config (default <result>/problem.cfg)");
  add_common(verify, o, resolution);

  auto* scen = app.add_subcommand("scenario", "run a named scenario");
  scen->add_option("name", scenario, "scenario name")->required();
  scen->add_option("--config", o.config, "problem config (control-eval)");
  scen->add_option("--result", o.result, "result directory (control-eval)");
  scen->add_option("--j", o.j, "measure strength (triple-junction)");
  scen->add_option("--j-min", o.j_min, "first j (junction-scan)");
  scen->add_option("--j-max", o.j_max, "last j (junction-scan)");
  scen->add_option("--steps", o.steps, "number of j values (junction-scan)");
  add_common(scen, o, resolution);

  auto* scan = app.add_subcommand("junction-scan", "sweep the triple-junction experiment over j");
  scan->add_option("--j-min", o.j_min, "first j");
  scan->add_option("--j-max", o.j_max, "last j");
  scan->add_option("--steps", o.steps, "number of j values");
  add_common(scan, o, resolution);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : mpqd::exit_input;
  }

  try {
    if (!resolution.empty()) o.resolution = mpqd::parse_spacing(resolution);
    if (*solve) return mpqd::cmd_solve(o, std::cout);
    if (*verify) return mpqd::cmd_verify(o, std::cout);
    if (*scen) return mpqd::cmd_scenario(scenario, o, std::cout);
    if (*scan) return mpqd::cmd_junction_scan(o, std::cout);
  } catch (const mpqd::Error& e) {
    std::cerr << "mpqd: " << e.what() << "\n";
    return mpqd::exit_code_for_error(e.code());
  } catch (const std::exception& e) {
    std::cerr << "mpqd: " << e.what() << "\n";
    return mpqd::exit_input;
  }
  return mpqd::exit_input;
}
