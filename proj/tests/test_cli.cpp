#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "mpqd/commands.hpp"
#include "mpqd/config.hpp"
#include "mpqd/error.hpp"
#include "mpqd/field_io.hpp"

using namespace mpqd;
namespace fs = std::filesystem;

namespace {

std::string error_code(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mpqd_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + std::string(MPQD_CLI) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* two_balls = R"(# two phases
[box]
x0 = -1
y0 = -1
width = 2
height = 2

[grid]
h = 0.0625

[solver]
omega_auto = true
seed = 3

[verify]
d_max = 2
qi_tol = 0.2

[[phase]]
lambda = 1
balls = [[-0.4, 0, 0.15, 5]]

[[phase]]
lambda = 1.5
points = [[0.45, 0.05, 0.4]]
)";

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

}  // namespace

TEST_CASE("config parse") {
  std::istringstream in(two_balls);
  const ProblemConfig cfg = parse_config(in);
  CHECK(cfg.origin.x == -1.0);
  CHECK(cfg.width == 2.0);
  CHECK(cfg.h == 0.0625);
  CHECK(cfg.solver.omega_auto);
  CHECK(cfg.solver.seed == 3);
  CHECK(cfg.verify.d_max == 2);
  CHECK(cfg.verify.qi_tol == 0.2);
  REQUIRE(cfg.phases.size() == 2);
  CHECK(cfg.phases[1].lambda == 1.5);
  REQUIRE(cfg.phases[0].measure.balls.size() == 1);
  CHECK(cfg.phases[0].measure.balls[0].density == 5.0);
  CHECK(cfg.phases[1].measure.points[0].mass == 0.4);
  CHECK(cfg.grid().nx() == 33);
}

TEST_CASE("config round trip") {
  std::istringstream in(two_balls);
  ProblemConfig cfg = parse_config(in);
  SegmentAtom s{{0.1, -0.2}, {0.1, 0.3}, SegmentProfile::sqrt_tent, 1.25};
  cfg.phases[0].measure.segments.push_back(s);
  cfg.verify.poles = {{3.0, 0.5}};
  cfg.mollifier_radius = 0.125;
  std::ostringstream out;
  write_config(out, cfg);
  std::istringstream back(out.str());
  const ProblemConfig again = parse_config(back);
  std::ostringstream out2;
  write_config(out2, again);
  CHECK(out.str() == out2.str());
  CHECK(again.phases[0].measure.segments[0].profile == SegmentProfile::sqrt_tent);
  CHECK(again.phases[0].measure.segments[0].b.y == 0.3);
  CHECK(again.verify.poles[0].x == 3.0);
  CHECK(again.mollifier_radius == 0.125);
}

TEST_CASE("config errors") {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
  };
  CHECK(error_code([&] { parse("[[phase]]\nlamda = 1\n"); }) == "unknown_key");
  CHECK(error_code([&] { parse("[grid]\nspacing = 0.1\n"); }) == "unknown_key");
  CHECK(error_code([&] { parse("[nope]\n"); }) == "unknown_key");
  CHECK(error_code([&] { parse("[grid\nh = 0.1\n"); }) == "config_syntax");
  CHECK(error_code([&] { parse("[grid]\nh = \n"); }) == "config_syntax");
  CHECK(error_code([&] { parse("[[phase]]\nlambda = -1\n"); }) == "config_invalid");
  CHECK(error_code([&] { parse("[[phase]]\nballs = [[0, 0, 1]]\n"); }) == "config_invalid");
  try {
    parse("[box]\nx0 = 0\n\n[[phase]]\nlamda = 1\n");
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("lamda") != std::string::npos);
    CHECK(std::string(e.what()).find("5") != std::string::npos);
  }
  CHECK(parse_spacing("1/128") == 1.0 / 128);
  CHECK(parse_spacing("0.25") == 0.25);
  CHECK(error_code([] { parse_spacing("1/0"); }) != "");
}

TEST_CASE("exit code mapping") {
  CHECK(exit_code_for(SolveStatus::ok) == exit_ok);
  CHECK(exit_code_for(SolveStatus::max_sweeps_exceeded) == exit_nonconvergence);
  CHECK(exit_code_for_error("max_sweeps_exceeded") == exit_nonconvergence);
  CHECK(exit_code_for_error("measure_outside_box") == exit_truncation);
  CHECK(exit_code_for_error("unknown_key") == exit_input);
}

TEST_CASE("binary exit codes") {
  const fs::path dir = scratch("exit");
  write_text(dir / "good.cfg", two_balls);
  write_text(dir / "zero.cfg", "[box]\nx0 = -1\ny0 = -1\nwidth = 2\nheight = 2\n[grid]\nh = 0.125\n[[phase]]\nlambda = 1\n");
  write_text(dir / "typo.cfg", "[[phase]]\nlamda = 1\n");

  CHECK(run("solve --config " + (dir / "zero.cfg").string() + " --out " + (dir / "zero").string()) == 0);
  CHECK(load_field(dir / "zero" / "u_1.field").max_abs() == 0.0);
  CHECK(run("solve --config " + (dir / "typo.cfg").string() + " --out " + (dir / "typo").string()) == 1);
  CHECK(run("solve --config " + (dir / "missing.cfg").string()) == 1);
  CHECK(run("scenario no-such-thing --out " + (dir / "x").string()) == 1);
  CHECK(run("frobnicate") == 1);
  CHECK(run("scenario null-qd --out " + (dir / "null").string()) == 0);
  CHECK(fs::exists(dir / "null" / "u_1.field"));

  // solve, then verify; a corrupted field is an input error
  const fs::path res = dir / "res";
  REQUIRE(run("solve --config " + (dir / "good.cfg").string() + " --out " + res.string()) == 0);
  CHECK(fs::exists(res / "u_2.field"));
  CHECK(fs::exists(res / "problem.cfg"));
  CHECK(run("verify --result " + res.string() + " --config " + (dir / "good.cfg").string()) == 0);
  write_text(res / "u_1.field", "MPQD-FIELD 3 3 0 0 oops\n1 2\n");
  CHECK(run("verify --result " + res.string() + " --config " + (dir / "good.cfg").string()) == 1);
  fs::remove_all(dir);
}

TEST_CASE("same seed gives identical output") {
  const fs::path dir = scratch("det");
  write_text(dir / "good.cfg", two_balls);
  REQUIRE(run("solve --config " + (dir / "good.cfg").string() + " --out " + (dir / "a").string()) == 0);
  REQUIRE(run("solve --config " + (dir / "good.cfg").string() + " --out " + (dir / "b").string()) == 0);
  for (const char* f : {"u_1.field", "u_2.field", "mask_1.pgm", "trace.csv"})
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  fs::remove_all(dir);
}

TEST_CASE("output root from the environment") {
  const fs::path dir = scratch("env");
  CHECK(run("scenario null-qd --resolution 1/16", "MPQD_OUT=" + dir.string()) == 0);
  CHECK(fs::exists(dir / "null-qd" / "u_3.field"));
  fs::remove_all(dir);
}

TEST_CASE("ball scenario") {
  const fs::path dir = scratch("ball");
  CHECK(run("scenario ball --out " + (dir / "fine").string()) == 0);
  CHECK(slurp(dir / "fine" / "report.json").find("\"passed\": true") != std::string::npos);
  // too coarse for the 1% quadrature gate
  CHECK(run("scenario ball --resolution 1/32 --out " + (dir / "coarse").string()) == 4);
  CHECK(slurp(dir / "coarse" / "report.json").find("\"passed\": false") != std::string::npos);
  fs::remove_all(dir);
}
