#include "mpqd/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <variant>

#include "mpqd/error.hpp"
#include "mpqd/field_io.hpp"

namespace mpqd {

namespace {

struct Value;
using List = std::vector<Value>;

struct Value {
  std::variant<double, bool, std::string, List> v;
};

struct Cursor {
  const std::string& s;
  std::size_t pos = 0;
  int line = 0;

  [[noreturn]] void fail(const std::string& what) const {
    std::ostringstream os;
    os << "line " << line << ": " << what;
    throw Error("config_syntax", os.str());
  }
  void skip_ws() {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
  }
  bool done() {
    skip_ws();
    return pos >= s.size() || s[pos] == '#';
  }
};

Value parse_value(Cursor& c) {
  c.skip_ws();
  if (c.pos >= c.s.size()) c.fail("missing value");
  const char ch = c.s[c.pos];
  if (ch == '"') {
    const std::size_t end = c.s.find('"', c.pos + 1);
    if (end == std::string::npos) c.fail("unterminated string");
    Value out{c.s.substr(c.pos + 1, end - c.pos - 1)};
    c.pos = end + 1;
    return out;
  }
  if (ch == '[') {
    ++c.pos;
    List items;
    c.skip_ws();
    if (c.pos < c.s.size() && c.s[c.pos] == ']') {
      ++c.pos;
      return Value{items};
    }
    for (;;) {
      items.push_back(parse_value(c));
      c.skip_ws();
      if (c.pos >= c.s.size()) c.fail("unterminated list");
      if (c.s[c.pos] == ',') {
        ++c.pos;
        continue;
      }
      if (c.s[c.pos] == ']') {
        ++c.pos;
        return Value{items};
      }
      c.fail("expected ',' or ']' in list");
    }
  }
  if (c.s.compare(c.pos, 4, "true") == 0) {
    c.pos += 4;
    return Value{true};
  }
  if (c.s.compare(c.pos, 5, "false") == 0) {
    c.pos += 5;
    return Value{false};
  }
  const char* first = c.s.data() + c.pos;
  const char* last = c.s.data() + c.s.size();
  if (*first == '+') ++first;
  double x = 0.0;
  auto [ptr, ec] = std::from_chars(first, last, x);
  if (ec != std::errc() || ptr == first) c.fail("cannot parse value '" + c.s.substr(c.pos) + "'");
  c.pos = static_cast<std::size_t>(ptr - c.s.data());
  return Value{x};
}

struct Entry {
  Value value;
  int line = 0;
};

[[noreturn]] void invalid(int line, const std::string& key, const std::string& what) {
  std::ostringstream os;
  os << "line " << line << ": " << key << " " << what;
  throw Error("config_invalid", os.str());
}

double as_number(const Entry& e, const std::string& key) {
  if (auto p = std::get_if<double>(&e.value.v)) return *p;
  invalid(e.line, key, "must be a number");
}

int as_int(const Entry& e, const std::string& key) {
  const double x = as_number(e, key);
  if (x != std::floor(x) || std::abs(x) > 2e9) invalid(e.line, key, "must be an integer");
  return static_cast<int>(x);
}

bool as_bool(const Entry& e, const std::string& key) {
  if (auto p = std::get_if<bool>(&e.value.v)) return *p;
  invalid(e.line, key, "must be true or false");
}

std::string as_string(const Entry& e, const std::string& key) {
  if (auto p = std::get_if<std::string>(&e.value.v)) return *p;
  invalid(e.line, key, "must be a quoted string");
}

const List& as_list(const Value& v, int line, const std::string& key) {
  if (auto p = std::get_if<List>(&v.v)) return *p;
  invalid(line, key, "must be a list");
}

double item_number(const Value& v, int line, const std::string& key) {
  if (auto p = std::get_if<double>(&v.v)) return *p;
  invalid(line, key, "entries must be numbers");
}

// List of fixed-length rows.
std::vector<List> rows(const Entry& e, const std::string& key, std::size_t width) {
  std::vector<List> out;
  for (const Value& row : as_list(e.value, e.line, key)) {
    const List& r = as_list(row, e.line, key);
    if (r.size() != width) {
      std::ostringstream os;
      os << "rows need " << width << " entries";
      invalid(e.line, key, os.str());
    }
    out.push_back(r);
  }
  return out;
}

Point as_point(const Entry& e, const std::string& key) {
  const List& l = as_list(e.value, e.line, key);
  if (l.size() != 2) invalid(e.line, key, "must be [x, y]");
  return {item_number(l[0], e.line, key), item_number(l[1], e.line, key)};
}

using Section = std::map<std::string, Entry>;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"box", {"x0", "y0", "width", "height"}},
      {"grid", {"h", "nx"}},
      {"mollifier", {"radius"}},
      {"solver",
       {"omega", "omega_auto", "tol_energy", "tol_residual", "max_sweeps", "check_every", "seg_rule", "seed", "levels",
        "supp_threshold", "threads", "multistart", "polish_rounds"}},
      {"verify",
       {"qi", "d_max", "qi_tol", "poles", "residual", "inclusion", "junctions", "junction_radius", "reflection", "reflection_n",
        "reflection_t0", "symmetric", "starshaped", "alpha", "nondegeneracy"}},
      {"output", {"dir"}},
      {"phase", {"lambda", "balls", "points", "segments"}},
  };
  return s;
}

void apply_phase(const Section& sec, PhaseConfig& ph) {
  for (const auto& [key, e] : sec) {
    if (key == "lambda") {
      ph.lambda = as_number(e, key);
      if (!(ph.lambda > 0.0)) invalid(e.line, key, "must be positive");
    } else if (key == "balls") {
      for (const List& r : rows(e, key, 4))
        ph.measure.balls.push_back({{item_number(r[0], e.line, key), item_number(r[1], e.line, key)},
                                    item_number(r[2], e.line, key),
                                    item_number(r[3], e.line, key)});
    } else if (key == "points") {
      for (const List& r : rows(e, key, 3))
        ph.measure.points.push_back(
            {{item_number(r[0], e.line, key), item_number(r[1], e.line, key)}, item_number(r[2], e.line, key)});
    } else if (key == "segments") {
      for (const List& r : rows(e, key, 6)) {
        SegmentAtom s;
        s.a = {item_number(r[0], e.line, key), item_number(r[1], e.line, key)};
        s.b = {item_number(r[2], e.line, key), item_number(r[3], e.line, key)};
        auto prof = std::get_if<std::string>(&r[4].v);
        if (!prof) invalid(e.line, key, "profile must be a quoted string");
        try {
          s.profile = parse_segment_profile(*prof);
        } catch (const Error&) {
          invalid(e.line, key, "has unknown profile '" + *prof + "'");
        }
        s.amplitude = item_number(r[5], e.line, key);
        ph.measure.segments.push_back(s);
      }
    }
  }
  try {
    ph.measure.validate();
  } catch (const Error& err) {
    const int line = sec.empty() ? 0 : sec.begin()->second.line;
    invalid(line, "phase", std::string("measure: ") + err.what());
  }
}

}  // namespace

double parse_spacing(const std::string& text) {
  const auto slash = text.find('/');
  auto num = [&](const std::string& t) {
    double x = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
    if (ec != std::errc() || ptr != t.data() + t.size()) throw Error("config_invalid", "bad spacing '" + text + "'");
    return x;
  };
  const double h = slash == std::string::npos ? num(text) : num(text.substr(0, slash)) / num(text.substr(slash + 1));
  if (!(h > 0.0) || !std::isfinite(h)) throw Error("config_invalid", "spacing must be positive: '" + text + "'");
  return h;
}

Grid ProblemConfig::grid() const { return Grid::from_box(origin, width, height, h); }

std::vector<double> ProblemConfig::lambdas() const {
  std::vector<double> out;
  for (const auto& p : phases) out.push_back(p.lambda);
  return out;
}

std::vector<MeasureSpec> ProblemConfig::measures() const {
  std::vector<MeasureSpec> out;
  for (const auto& p : phases) out.push_back(p.measure);
  return out;
}

std::vector<ForceField> ProblemConfig::forces() const {
  const Grid g = grid();
  const Mollifier psi{mollifier_radius > 0.0 ? mollifier_radius : 2.0 * g.h()};
  std::vector<ForceField> out;
  for (const auto& p : phases) out.push_back(build_force(p.measure, p.lambda, psi, g));
  return out;
}

ProblemConfig parse_config(std::istream& is) {
  ProblemConfig cfg;
  std::map<std::string, Section> sections;
  std::vector<Section> phase_secs;
  Section* cur = nullptr;
  std::string name;
  std::string raw;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    Cursor c{raw, 0, line};
    if (c.done()) continue;
    if (raw[c.pos] == '[') {
      const bool array = raw.compare(c.pos, 2, "[[") == 0;
      const std::size_t open = c.pos + (array ? 2 : 1);
      const std::size_t close = raw.find(array ? "]]" : "]", open);
      if (close == std::string::npos) c.fail("unterminated section header");
      name = raw.substr(open, close - open);
      c.pos = close + (array ? 2 : 1);
      if (!c.done()) c.fail("trailing text after section header");
      if (!schema().count(name)) {
        std::ostringstream os;
        os << "line " << line << ": unknown section '" << name << "'";
        throw Error("unknown_key", os.str());
      }
      if ((name == "phase") != array) c.fail(array ? "only [[phase]] may repeat" : "use [[phase]] for phases");
      if (array) {
        phase_secs.emplace_back();
        cur = &phase_secs.back();
      } else {
        if (sections.count(name)) c.fail("duplicate section [" + name + "]");
        cur = &sections[name];
      }
      continue;
    }
    const std::size_t eq = raw.find('=', c.pos);
    if (eq == std::string::npos) c.fail("expected key = value");
    std::string key = raw.substr(c.pos, eq - c.pos);
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
    if (key.empty()) c.fail("empty key");
    if (!cur) c.fail("key '" + key + "' outside any section");
    if (!schema().at(name).count(key)) {
      std::ostringstream os;
      os << "line " << line << ": unknown key '" << key << "' in [" << name << "]";
      throw Error("unknown_key", os.str());
    }
    if (cur->count(key)) c.fail("duplicate key '" + key + "'");
    c.pos = eq + 1;
    Value v = parse_value(c);
    if (!c.done()) c.fail("trailing text after value of '" + key + "'");
    (*cur)[key] = Entry{std::move(v), line};
  }

  for (const auto& [sec_name, sec] : sections) {
    for (const auto& [key, e] : sec) {
      if (sec_name == "box") {
        const double x = as_number(e, key);
        if (key == "x0") cfg.origin.x = x;
        else if (key == "y0") cfg.origin.y = x;
        else if (key == "width") cfg.width = x;
        else cfg.height = x;
        if ((key == "width" || key == "height") && !(x > 0.0)) invalid(e.line, key, "must be positive");
      } else if (sec_name == "grid") {
        if (sec.count("h") && sec.count("nx")) invalid(e.line, key, "conflicts: give either h or nx");
        if (key == "h") {
          if (auto s = std::get_if<std::string>(&e.value.v)) cfg.h = parse_spacing(*s);
          else cfg.h = as_number(e, key);
          if (!(cfg.h > 0.0)) invalid(e.line, key, "must be positive");
        }
      } else if (sec_name == "mollifier") {
        cfg.mollifier_radius = as_number(e, key);
        if (cfg.mollifier_radius < 0.0) invalid(e.line, key, "must be >= 0");
      } else if (sec_name == "solver") {
        SolverParams& s = cfg.solver;
        if (key == "omega") s.omega = as_number(e, key);
        else if (key == "omega_auto") s.omega_auto = as_bool(e, key);
        else if (key == "tol_energy") s.tol_energy = as_number(e, key);
        else if (key == "tol_residual") s.tol_residual = as_number(e, key);
        else if (key == "max_sweeps") s.max_sweeps = as_int(e, key);
        else if (key == "check_every") s.check_every = as_int(e, key);
        else if (key == "seg_rule") {
          try {
            s.seg_rule = parse_seg_rule(as_string(e, key));
          } catch (const Error&) {
            invalid(e.line, key, "must be \"lowest_index\" or \"random\"");
          }
        } else if (key == "seed") {
          const double x = as_number(e, key);
          if (x < 0 || x != std::floor(x)) invalid(e.line, key, "must be a nonnegative integer");
          s.seed = static_cast<std::uint64_t>(x);
        } else if (key == "levels") s.levels = as_int(e, key);
        else if (key == "supp_threshold") s.supp_threshold = as_number(e, key);
        else if (key == "threads") s.threads = as_int(e, key);
        else if (key == "multistart") s.multistart = as_bool(e, key);
        else if (key == "polish_rounds") s.polish_rounds = as_int(e, key);
      } else if (sec_name == "verify") {
        VerifyConfig& v = cfg.verify;
        if (key == "qi") v.qi = as_bool(e, key);
        else if (key == "d_max") v.d_max = as_int(e, key);
        else if (key == "qi_tol") v.qi_tol = as_number(e, key);
        else if (key == "poles") {
          for (const List& r : rows(e, key, 2))
            v.poles.push_back({item_number(r[0], e.line, key), item_number(r[1], e.line, key)});
        } else if (key == "residual") v.residual = as_bool(e, key);
        else if (key == "inclusion") v.inclusion = as_bool(e, key);
        else if (key == "junctions") v.junctions = as_bool(e, key);
        else if (key == "junction_radius") v.junction_radius = as_int(e, key);
        else if (key == "reflection") v.reflection = as_bool(e, key);
        else if (key == "reflection_n") v.reflection_n = as_point(e, key);
        else if (key == "reflection_t0") v.reflection_t0 = as_number(e, key);
        else if (key == "symmetric") v.symmetric = as_bool(e, key);
        else if (key == "starshaped") v.starshaped = as_bool(e, key);
        else if (key == "alpha") v.alpha = as_number(e, key);
        else if (key == "nondegeneracy") v.nondegeneracy = as_bool(e, key);
        if (key == "d_max" && v.d_max < 0) invalid(e.line, key, "must be >= 0");
        if (key == "junction_radius" && v.junction_radius < 1) invalid(e.line, key, "must be >= 1");
      } else if (sec_name == "output") {
        cfg.out_dir = as_string(e, key);
      }
    }
  }
  if (sections.count("grid") && sections["grid"].count("nx")) {
    const Entry& e = sections["grid"]["nx"];
    const int nx = as_int(e, "nx");
    if (nx < 3) invalid(e.line, "nx", "must be >= 3");
    cfg.h = cfg.width / (nx - 1);
  }
  if (sections.count("solver")) {
    try {
      cfg.solver.validate();
    } catch (const Error& err) {
      invalid(sections["solver"].begin()->second.line, "[solver]", err.what());
    }
  }
  if (phase_secs.empty()) throw Error("config_invalid", "at least one [[phase]] block is required");
  for (const Section& sec : phase_secs) {
    PhaseConfig ph;
    apply_phase(sec, ph);
    cfg.phases.push_back(std::move(ph));
  }
  return cfg;
}

ProblemConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io_error", "cannot open config " + path.string());
  return parse_config(in);
}

void write_config(std::ostream& os, const ProblemConfig& cfg) {
  auto d = [](double x) { return format_double(x); };
  auto b = [](bool x) { return x ? "true" : "false"; };
  os << "[box]\nx0 = " << d(cfg.origin.x) << "\ny0 = " << d(cfg.origin.y) << "\nwidth = " << d(cfg.width)
     << "\nheight = " << d(cfg.height) << "\n\n[grid]\nh = " << d(cfg.h) << "\n\n[mollifier]\nradius = "
     << d(cfg.mollifier_radius) << "\n\n";
  const SolverParams& s = cfg.solver;
  os << "[solver]\nomega = " << d(s.omega) << "\nomega_auto = " << b(s.omega_auto) << "\ntol_energy = "
     << d(s.tol_energy) << "\ntol_residual = " << d(s.tol_residual) << "\nmax_sweeps = " << s.max_sweeps
     << "\ncheck_every = " << s.check_every << "\nseg_rule = \"" << to_string(s.seg_rule) << "\"\nseed = " << s.seed
     << "\nlevels = " << s.levels << "\nsupp_threshold = " << d(s.supp_threshold) << "\nthreads = " << s.threads
     << "\nmultistart = " << b(s.multistart) << "\npolish_rounds = " << s.polish_rounds << "\n\n";
  const VerifyConfig& v = cfg.verify;
  os << "[verify]\nqi = " << b(v.qi) << "\nd_max = " << v.d_max << "\nqi_tol = " << d(v.qi_tol) << "\npoles = [";
  for (std::size_t k = 0; k < v.poles.size(); ++k)
    os << (k ? ", " : "") << "[" << d(v.poles[k].x) << ", " << d(v.poles[k].y) << "]";
  os << "]\nresidual = " << b(v.residual) << "\ninclusion = " << b(v.inclusion) << "\njunctions = " << b(v.junctions)
     << "\njunction_radius = " << v.junction_radius << "\nreflection = " << b(v.reflection) << "\nreflection_n = ["
     << d(v.reflection_n.x) << ", " << d(v.reflection_n.y) << "]\nreflection_t0 = " << d(v.reflection_t0)
     << "\nsymmetric = " << b(v.symmetric) << "\nstarshaped = " << b(v.starshaped) << "\nalpha = " << d(v.alpha)
     << "\nnondegeneracy = " << b(v.nondegeneracy) << "\n\n[output]\ndir = \"" << cfg.out_dir << "\"\n";
  for (const auto& ph : cfg.phases) {
    os << "\n[[phase]]\nlambda = " << d(ph.lambda) << "\n";
    const MeasureSpec& m = ph.measure;
    if (!m.balls.empty()) {
      os << "balls = [";
      for (std::size_t k = 0; k < m.balls.size(); ++k) {
        const auto& a = m.balls[k];
        os << (k ? ", " : "") << "[" << d(a.center.x) << ", " << d(a.center.y) << ", " << d(a.radius) << ", "
           << d(a.density) << "]";
      }
      os << "]\n";
    }
    if (!m.points.empty()) {
      os << "points = [";
      for (std::size_t k = 0; k < m.points.size(); ++k) {
        const auto& a = m.points[k];
        os << (k ? ", " : "") << "[" << d(a.center.x) << ", " << d(a.center.y) << ", " << d(a.mass) << "]";
      }
      os << "]\n";
    }
    if (!m.segments.empty()) {
      os << "segments = [";
      for (std::size_t k = 0; k < m.segments.size(); ++k) {
        const auto& a = m.segments[k];
        os << (k ? ", " : "") << "[" << d(a.a.x) << ", " << d(a.a.y) << ", " << d(a.b.x) << ", " << d(a.b.y)
           << ", \"" << to_string(a.profile) << "\", " << d(a.amplitude) << "]";
      }
      os << "]\n";
    }
  }
}

}  // namespace mpqd
