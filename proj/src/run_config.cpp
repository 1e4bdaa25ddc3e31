#include "hpte/run_config.hpp"

#include "hpte/ed_oracle.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace hpte {

std::string to_string(Solver solver) {
  switch (solver) {
    case Solver::Tebd: return "tebd";
    case Solver::Gaussian: return "gaussian";
    case Solver::Ed: return "ed";
  }
  return "?";
}

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : "\n") + p;
  return out;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& s) {
  size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

long to_long(const std::string& s) {
  size_t pos = 0;
  const long v = std::stol(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("not an integer: '" + s + "'");
  return v;
}

std::vector<double> to_doubles(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) out.push_back(to_double(item));
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "no" || s == "0") return false;
  throw std::invalid_argument("not a boolean: '" + s + "'");
}

// shortest text that reads back to the same double
std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fmt_list(const std::vector<double>& v) {
  std::string out;
  for (double x : v) out += (out.empty() ? "" : ", ") + fmt(x);
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"name", [](RunConfig& c, const std::string& v) { c.name = v; }},
      {"kind", [](RunConfig& c, const std::string& v) { c.kind = parse_spin_kind(v); }},
      {"L", [](RunConfig& c, const std::string& v) { c.length = static_cast<int>(to_long(v)); }},
      {"delta", [](RunConfig& c, const std::string& v) { c.deltas = to_doubles(v); }},
      {"operator",
       [](RunConfig& c, const std::string& v) {
         c.op = parse_operator_spec(v);
         c.op_text = to_string(c.op);
       }},
      {"chi_max", [](RunConfig& c, const std::string& v) { c.chi_max = static_cast<int>(to_long(v)); }},
      {"cutoff", [](RunConfig& c, const std::string& v) { c.cutoff = to_double(v); }},
      {"dt", [](RunConfig& c, const std::string& v) { c.dts = to_doubles(v); }},
      {"trotter_order", [](RunConfig& c, const std::string& v) { c.trotter_order = static_cast<int>(to_long(v)); }},
      {"t_final", [](RunConfig& c, const std::string& v) { c.t_final = to_double(v); }},
      {"measure_every", [](RunConfig& c, const std::string& v) { c.measure_every = to_double(v); }},
      {"alpha", [](RunConfig& c, const std::string& v) { c.alphas = to_doubles(v); }},
      {"solvers",
       [](RunConfig& c, const std::string& v) {
         c.solvers.clear();
         for (const auto& item : split_list(v)) {
           Solver s;
           if (item == "tebd") s = Solver::Tebd;
           else if (item == "gaussian") s = Solver::Gaussian;
           else if (item == "ed") s = Solver::Ed;
           else throw std::invalid_argument("unknown solver '" + item + "' (tebd, gaussian, ed)");
           if (std::find(c.solvers.begin(), c.solvers.end(), s) == c.solvers.end()) c.solvers.push_back(s);
         }
       }},
      {"seed", [](RunConfig& c, const std::string& v) { c.seed = to_long(v); }},
      {"output_dir", [](RunConfig& c, const std::string& v) { c.output_dir = v; }},
      {"tol_itac", [](RunConfig& c, const std::string& v) { c.tol_itac = to_double(v); }},
      {"tol_s2", [](RunConfig& c, const std::string& v) { c.tol_s2 = to_double(v); }},
      {"compare_until", [](RunConfig& c, const std::string& v) { c.compare_until = to_double(v); }},
      {"abort_discarded", [](RunConfig& c, const std::string& v) { c.abort_discarded = to_double(v); }},
      {"fit_window",
       [](RunConfig& c, const std::string& v) {
         const auto w = to_doubles(v);
         if (w.size() != 2) throw std::invalid_argument("expects two values t_min, t_max");
         c.fit_window = {w[0], w[1]};
       }},
      {"threads", [](RunConfig& c, const std::string& v) { c.threads = static_cast<int>(to_long(v)); }},
      {"checkpoint", [](RunConfig& c, const std::string& v) { c.checkpoint = to_bool(v); }},
      {"resume", [](RunConfig& c, const std::string& v) { c.resume = v; }},
  };
  return table;
}

void apply(RunConfig& config, std::set<std::string>& seen, const std::string& key, const std::string& value,
           const std::string& where, std::vector<std::string>& problems) {
  const auto it = setters().find(key);
  if (it == setters().end()) {
    problems.push_back(where + "unknown key '" + key + "'");
    return;
  }
  try {
    it->second(config, value);
    seen.insert(key);
  } catch (const std::exception& e) {
    problems.push_back(where + key + ": " + e.what());
  }
}

void validate(const RunConfig& c, const std::set<std::string>& seen, std::vector<std::string>& problems) {
  for (const char* key : {"kind", "L", "delta", "operator"})
    if (!seen.count(key)) problems.push_back(std::string("missing required key '") + key + "'");
  if (!problems.empty()) return;

  if (c.length < 2) problems.push_back("L: must be at least 2");
  const int max_site = c.op.name == OperatorName::StringZ ? c.length + 1 : c.length;
  if (c.op.site < 1 || c.op.site > max_site)
    problems.push_back("operator: site " + std::to_string(c.op.site) + " outside 1.." + std::to_string(max_site));
  if (c.chi_max < 1) problems.push_back("chi_max: must be positive");
  if (c.cutoff < 0.0) problems.push_back("cutoff: must be non-negative");
  for (double dt : c.dts)
    if (dt <= 0.0) problems.push_back("dt: must be positive");
  if (c.trotter_order != 2 && c.trotter_order != 4) problems.push_back("trotter_order: must be 2 or 4");
  if (!(c.t_final >= 0.0)) problems.push_back("t_final: must not be negative");
  if (c.measure_every <= 0.0) problems.push_back("measure_every: must be positive");
  for (double a : c.alphas)
    if (a <= 0.0) problems.push_back("alpha: must be positive");
  if (c.solvers.empty()) problems.push_back("solvers: at least one solver required");
  if (c.tol_itac < 0.0 || c.tol_s2 < 0.0) problems.push_back("tolerances must be non-negative");
  if (c.abort_discarded <= 0.0) problems.push_back("abort_discarded: must be positive");
  if (c.threads < 1) problems.push_back("threads: must be at least 1");
  if (c.fit_window.second < c.fit_window.first || c.fit_window.first < 0.0)
    problems.push_back("fit_window: needs 0 <= t_min <= t_max");

  // Schedules must land on the measurement grid.
  for (double dt : c.dts) {
    const double steps = c.measure_every / dt;
    if (dt > 0.0 && std::abs(steps - std::round(steps)) > 1e-9 * steps)
      problems.push_back("measure_every: must be a multiple of dt = " + fmt(dt));
  }

  if (c.has_solver(Solver::Gaussian)) {
    if (c.kind != SpinKind::Half) problems.push_back("solvers: gaussian requires kind = half");
    for (double d : c.deltas)
      if (d != 0.0) problems.push_back("solvers: gaussian requires delta = 0 (free fermions only at the XX point), got " + fmt(d));
    if (c.op.name == OperatorName::SPlus)
      problems.push_back("solvers: gaussian needs a single Majorana monomial; s_plus is a superposition");
  }
  if (c.has_solver(Solver::Ed) && c.length > ed::max_length(c.kind))
    problems.push_back("solvers: ed limited to L <= " + std::to_string(ed::max_length(c.kind)) + " for kind = " +
                       to_string(c.kind) + ", got L = " + std::to_string(c.length));
  if (!c.resume.empty() && !c.has_solver(Solver::Tebd)) problems.push_back("resume: only meaningful with tebd");
  if (!c.resume.empty() && (c.deltas.size() > 1 || c.dts.size() > 1))
    problems.push_back("resume: needs a single delta and dt");
}

}  // namespace

bool RunConfig::has_solver(Solver solver) const {
  return std::find(solvers.begin(), solvers.end(), solver) != solvers.end();
}

std::string RunConfig::echo() const {
  std::ostringstream os;
  std::string solver_list;
  for (auto s : solvers) solver_list += (solver_list.empty() ? "" : ", ") + to_string(s);
  os << "name = " << name << "\n"
     << "kind = " << to_string(kind) << "\n"
     << "L = " << length << "\n"
     << "delta = " << fmt_list(deltas) << "\n"
     << "operator = " << to_string(op) << "\n"
     << "chi_max = " << chi_max << "\n"
     << "cutoff = " << fmt(cutoff) << "\n"
     << "dt = " << fmt_list(dts) << "\n"
     << "trotter_order = " << trotter_order << "\n"
     << "t_final = " << fmt(t_final) << "\n"
     << "measure_every = " << fmt(measure_every) << "\n"
     << "alpha = " << fmt_list(alphas) << "\n"
     << "solvers = " << solver_list << "\n"
     << "seed = " << seed << "\n"
     << "output_dir = " << output_dir << "\n"
     << "tol_itac = " << fmt(tol_itac) << "\n"
     << "tol_s2 = " << fmt(tol_s2) << "\n"
     << "compare_until = " << fmt(comparison_end()) << "\n"
     << "abort_discarded = " << fmt(abort_discarded) << "\n"
     << "fit_window = " << fmt(fit_window.first) << ", " << fmt(fit_window.second) << "\n"
     << "threads = " << threads << "\n"
     << "checkpoint = " << (checkpoint ? "true" : "false") << "\n";
  if (!resume.empty()) os << "resume = " << resume << "\n";
  return os.str();
}

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error("invalid configuration:\n" + join(problems)), problems_(std::move(problems)) {}

RunConfig parse_config(const std::string& text) { return parse_config(text, {}); }

RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides) {
  RunConfig config;
  std::set<std::string> seen;
  std::vector<std::string> problems;

  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "line " + std::to_string(number) + ": ";
    if (eq == std::string::npos) {
      problems.push_back(where + "expected key = value");
      continue;
    }
    apply(config, seen, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), where, problems);
  }
  for (const auto& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      problems.push_back("override '" + item + "': expected key=value");
      continue;
    }
    apply(config, seen, trim(item.substr(0, eq)), trim(item.substr(eq + 1)), "override: ", problems);
  }

  if (problems.empty()) validate(config, seen, problems);
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return config;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), overrides);
}

std::string preset_directory() {
  if (const char* env = std::getenv("HPTE_PRESET_DIR"); env && *env) return env;
  return HPTE_PRESET_DIR;
}

std::string preset_path(const std::string& name) {
  const auto path = std::filesystem::path(preset_directory()) / (name + ".cfg");
  if (!std::filesystem::exists(path)) throw std::runtime_error("no preset named '" + name + "' in " + preset_directory());
  return path.string();
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  const std::filesystem::path dir(preset_directory());
  if (!std::filesystem::is_directory(dir)) return names;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.path().extension() == ".cfg") names.push_back(entry.path().stem().string());
  std::sort(names.begin(), names.end());
  return names;
}

}  // namespace hpte
