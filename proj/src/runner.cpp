#include "hpte/runner.hpp"

#include "hpte/ed_oracle.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace hpte {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr double kTimeMatch = 1e-9;

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12e", v == 0.0 ? 0.0 : v);
  return buf;
}

std::string short_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string tag(double delta) { return "delta" + short_num(delta); }
std::string tag(double delta, double dt) { return tag(delta) + "_dt" + short_num(dt); }

std::string series_label(const SolverSeries& s) {
  return to_string(s.solver) + "_" + (s.solver == Solver::Tebd ? tag(s.delta, s.dt) : tag(s.delta));
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<double> measured_alphas(const std::vector<double>& configured) {
  std::set<double> all(configured.begin(), configured.end());
  all.insert(1.0);
  all.insert(2.0);
  return {all.begin(), all.end()};
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

std::string record_csv(const std::vector<TimeSeriesRecord>& records, int length, const std::vector<double>& alphas) {
  std::ostringstream os;
  const int centre = length / 2;
  os << "t,S2_bond_center,S1_bond_center,Smax_over_bonds,itac_re,itac_im,abs_itac,bound_rhs_alpha2,"
        "discarded_weight,chi_used";
  for (double a : alphas)
    if (a != 1.0 && a != 2.0) os << ",S" << short_num(a) << "_bond_center";
  os << "\n";
  for (const auto& r : records) {
    os << num(r.t) << "," << num(r.entropy(2.0, centre)) << "," << num(r.entropy(1.0, centre)) << ","
       << num(r.max_entropy(2.0)) << "," << num(r.itac.real()) << "," << num(r.itac.imag()) << ","
       << num(std::abs(r.itac)) << "," << num(entropy_bound_rhs(r.itac, 2.0)) << "," << num(r.discarded_weight)
       << "," << r.chi_used;
    for (double a : alphas)
      if (a != 1.0 && a != 2.0) os << "," << num(r.entropy(a, centre));
    os << "\n";
  }
  return os.str();
}

std::string gaussian_csv(const std::vector<GaussianRow>& rows) {
  std::ostringstream os;
  os << "t,delta_N2,S2_gaussian,lower_bound,upper_bound,delta_N2_chain0,delta_N2_chain1\n";
  for (const auto& r : rows)
    os << num(r.t) << "," << num(r.delta_n2) << "," << num(r.s2) << "," << num(r.lower) << "," << num(r.upper)
       << "," << num(r.chain_delta_n2[0]) << "," << num(r.chain_delta_n2[1]) << "\n";
  return os.str();
}

int count_bound_violations(const std::vector<TimeSeriesRecord>& records, const std::vector<double>& alphas) {
  int violations = 0;
  for (const auto& r : records)
    for (double a : alphas)
      if (a > 1.0 && !check_entropy_bound(r, a).holds) ++violations;
  return violations;
}

int measurement_count(const RunConfig& c) {
  return static_cast<int>(std::floor(c.t_final / c.measure_every + 1e-9));
}

SolverSeries run_tebd(const RunConfig& c, double delta, double dt, const fs::path& dir,
                      const std::vector<double>& alphas, int threads) {
  SolverSeries out;
  out.solver = Solver::Tebd;
  out.delta = delta;
  out.dt = dt;
  const auto start = std::chrono::steady_clock::now();

  const auto hamiltonian = make_bond_hamiltonian(c.kind, delta);
  EvolveOptions options;
  options.policy.chi_max = c.chi_max;
  options.policy.cutoff = c.cutoff;
  options.t_final = c.t_final;
  options.measure_every = c.measure_every;
  options.alphas = alphas;
  options.abort_discarded = c.abort_discarded;
  options.threads = threads;
  if (std::getenv("HPTE_VERBOSE"))
    options.on_record = [&](const TimeSeriesRecord& r) {
      std::cerr << "  tebd " << tag(delta, dt) << " t=" << r.t << " chi=" << r.chi_used
                << " S2max=" << r.max_entropy(2.0) << " discarded=" << r.discarded_weight << std::endl;
    };
  const auto schedule = build_schedule(c.trotter_order, dt);

  EvolveResult result;
  if (!c.resume.empty()) {
    const auto checkpoint = read_checkpoint(c.resume);
    if (checkpoint.state.length != c.length || checkpoint.state.kind != c.kind)
      throw std::runtime_error("checkpoint " + c.resume + " does not match L and kind");
    result = evolve_from(checkpoint.state, checkpoint.initial, checkpoint.t, hamiltonian, schedule, options);
  } else {
    const auto initial = from_product_operator(operator_factors(c.op, c.kind, c.length), c.length, c.kind);
    result = evolve(initial, hamiltonian, schedule, options);
    if (c.checkpoint) {
      Checkpoint ck{result.records.empty() ? 0.0 : result.records.back().t, result.final_state, initial};
      write_checkpoint((dir / ("tebd_" + tag(delta, dt) + ".ckpt")).string(), ck);
    }
  }

  out.records = std::move(result.records);
  out.aborted = result.aborted;
  out.abort_reason = result.abort_reason;
  out.degenerate_cuts = result.degenerate_cuts;
  out.light_cone_time = result.light_cone_time;
  out.bound_violations = count_bound_violations(out.records, alphas);
  out.csv_path = (dir / ("tebd_" + tag(delta, dt) + ".csv")).string();
  write_file(out.csv_path, record_csv(out.records, c.length, alphas));
  out.wall_seconds = seconds_since(start);
  return out;
}

SolverSeries run_ed(const RunConfig& c, double delta, const fs::path& dir, const std::vector<double>& alphas) {
  SolverSeries out;
  out.solver = Solver::Ed;
  out.delta = delta;
  const auto start = std::chrono::steady_clock::now();

  const auto bond = make_bond_hamiltonian(c.kind, delta);
  const auto op0 = ed::normalized(ed::from_spec(c.op, c.length, c.kind));
  const ed::ExactPropagator propagator(ed::chain_hamiltonian(bond, c.length));
  for (int k = 0; k <= measurement_count(c); ++k) {
    const double t = k * c.measure_every;
    out.records.push_back(ed::measure_exact(propagator.evolve(op0, t), op0, t, alphas));
  }
  out.light_cone_time = light_cone_time(c.length);
  out.bound_violations = count_bound_violations(out.records, alphas);
  out.csv_path = (dir / ("ed_" + tag(delta) + ".csv")).string();
  write_file(out.csv_path, record_csv(out.records, c.length, alphas));
  out.wall_seconds = seconds_since(start);
  return out;
}

ff::GrowthFit fit_window(const std::vector<GaussianRow>& rows, int chain, std::pair<double, double> window) {
  std::vector<std::pair<double, double>> points;
  for (const auto& r : rows)
    if (r.t >= window.first - kTimeMatch && r.t <= window.second + kTimeMatch && r.t > 0.0)
      points.emplace_back(r.t, r.chain_delta_n2[chain]);
  return ff::fit_antal_growth(points, 1);
}

SolverSeries run_gaussian(const RunConfig& c, const fs::path& dir) {
  SolverSeries out;
  out.solver = Solver::Gaussian;
  out.delta = 0.0;
  const auto start = std::chrono::steady_clock::now();

  const auto mapped = ff::map_operator(c.op.name, c.op.site, c.length);
  const auto* occupation = std::get_if<ff::ModeOccupation>(&mapped);
  if (!occupation) throw std::runtime_error("gaussian solver needs a single occupation pattern");
  const ff::GaussianPropagator propagator(ff::xx_hamiltonian(c.length));
  const int centre = c.length / 2;
  for (int k = 0; k <= measurement_count(c); ++k) {
    const double t = k * c.measure_every;
    const auto state = propagator.evolve(*occupation, t);
    const auto bounds = ff::fluctuation_bounds(state, centre);
    GaussianRow row{t, bounds.delta_n2, bounds.s2, bounds.lower, bounds.upper, {0.0, 0.0}};
    for (int chain = 0; chain < 2; ++chain) row.chain_delta_n2[chain] = ff::chain_fluctuation(state, centre, chain);
    if (!bounds.holds) ++out.bound_violations;
    out.gaussian.push_back(row);
  }
  if (c.fit_window.second > 0.0)
    out.chain_fits = std::array<ff::GrowthFit, 2>{fit_window(out.gaussian, 0, c.fit_window),
                                                  fit_window(out.gaussian, 1, c.fit_window)};
  out.light_cone_time = light_cone_time(c.length);
  out.csv_path = (dir / ("gaussian_" + tag(0.0) + ".csv")).string();
  write_file(out.csv_path, gaussian_csv(out.gaussian));
  out.wall_seconds = seconds_since(start);
  return out;
}

struct Sample {
  double t;
  cplx itac;
  double s2;
  bool has_itac;
};

std::vector<Sample> samples(const SolverSeries& s, int length) {
  std::vector<Sample> out;
  for (const auto& r : s.records) out.push_back({r.t, r.itac, r.entropy(2.0, length / 2), true});
  for (const auto& r : s.gaussian) out.push_back({r.t, {}, r.s2, false});
  return out;
}

void judge(ComparisonReport& report) {
  for (const auto& [name, tol] : report.tolerance) {
    const auto it = report.max_abs_error.find(name);
    report.passed[name] = it != report.max_abs_error.end() && it->second < tol;
  }
}

json fit_json(const ff::GrowthFit& fit) {
  return {{"slope", fit.slope},
          {"offset", fit.offset},
          {"residual", fit.residual},
          {"low_confidence", fit.low_confidence}};
}

}  // namespace

bool ComparisonReport::all_passed() const {
  return std::all_of(passed.begin(), passed.end(), [](const auto& p) { return p.second; });
}

const SolverSeries& RunReport::find(Solver solver, double delta, double dt) const {
  for (const auto& s : series)
    if (s.solver == solver && s.delta == delta && (solver != Solver::Tebd || s.dt == dt)) return s;
  throw std::out_of_range("no " + to_string(solver) + " series for " + tag(delta, dt));
}

int effective_threads(int configured) {
  if (const char* env = std::getenv("HPTE_NUM_THREADS"); env && *env) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return configured;
}

ComparisonReport compare_series(const SolverSeries& reference, const SolverSeries& candidate, int length,
                                 double until, double tol_itac, double tol_s2) {
  ComparisonReport report;
  report.reference = series_label(reference);
  report.candidate = series_label(candidate);
  const auto a = samples(reference, length);
  const auto b = samples(candidate, length);
  const bool with_itac = !a.empty() && !b.empty() && a.front().has_itac && b.front().has_itac;
  if (with_itac) report.observables.push_back("itac");
  report.observables.push_back("S2_bond_center");
  report.deltas.resize(report.observables.size());

  size_t j = 0;
  for (const auto& x : a) {
    if (x.t > until + kTimeMatch) break;
    while (j < b.size() && b[j].t < x.t - kTimeMatch) ++j;
    if (j == b.size()) break;
    if (std::abs(b[j].t - x.t) > kTimeMatch) continue;
    report.times.push_back(x.t);
    size_t o = 0;
    if (with_itac) report.deltas[o++].push_back(std::abs(b[j].itac - x.itac));
    report.deltas[o].push_back(b[j].s2 - x.s2);
  }
  for (size_t o = 0; o < report.observables.size(); ++o) {
    double m = 0.0;
    for (double d : report.deltas[o]) m = std::max(m, std::abs(d));
    report.max_abs_error[report.observables[o]] = m;
  }
  if (with_itac && tol_itac > 0.0) report.tolerance["itac"] = tol_itac;
  if (tol_s2 > 0.0) report.tolerance["S2_bond_center"] = tol_s2;
  judge(report);
  return report;
}

namespace {

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + " is empty");
  std::stringstream header(line);
  for (std::string col; std::getline(header, col, ',');) table.columns.push_back(col == "S2_gaussian" ? "S2_bond_center" : col);
  if (table.columns.empty() || table.columns.front() != "t") throw std::runtime_error(path + ": first column must be t");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) row.push_back(std::stod(cell));
    if (row.size() != table.columns.size()) throw std::runtime_error(path + ": ragged row");
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace

ComparisonReport compare_csv(const std::string& path_a, const std::string& path_b, double tolerance) {
  const auto a = read_csv(path_a);
  const auto b = read_csv(path_b);
  ComparisonReport report;
  report.reference = path_a;
  report.candidate = path_b;
  std::vector<std::pair<size_t, size_t>> pairs;
  for (size_t i = 1; i < a.columns.size(); ++i)
    for (size_t k = 1; k < b.columns.size(); ++k)
      if (a.columns[i] == b.columns[k]) {
        report.observables.push_back(a.columns[i]);
        pairs.emplace_back(i, k);
      }
  if (pairs.empty()) throw std::runtime_error("no shared columns between " + path_a + " and " + path_b);
  report.deltas.resize(pairs.size());

  size_t j = 0;
  for (const auto& row : a.rows) {
    while (j < b.rows.size() && b.rows[j][0] < row[0] - kTimeMatch) ++j;
    if (j == b.rows.size()) break;
    if (std::abs(b.rows[j][0] - row[0]) > kTimeMatch) continue;
    report.times.push_back(row[0]);
    for (size_t o = 0; o < pairs.size(); ++o) report.deltas[o].push_back(b.rows[j][pairs[o].second] - row[pairs[o].first]);
  }
  for (size_t o = 0; o < pairs.size(); ++o) {
    double m = 0.0;
    for (double d : report.deltas[o]) m = std::max(m, std::abs(d));
    report.max_abs_error[report.observables[o]] = m;
    report.tolerance[report.observables[o]] = tolerance;
  }
  for (const auto& [name, tol] : report.tolerance) report.passed[name] = report.max_abs_error[name] <= tol;
  return report;
}

std::string comparison_csv(const ComparisonReport& report) {
  std::ostringstream os;
  os << "t";
  for (const auto& o : report.observables) os << ",delta_" << o;
  os << "\n";
  for (size_t k = 0; k < report.times.size(); ++k) {
    os << num(report.times[k]);
    for (const auto& d : report.deltas) os << "," << num(d[k]);
    os << "\n";
  }
  return os.str();
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line needs at least two points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
  LineFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.offset = (sy - fit.slope * sx) / n;
  double ss = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.slope * x[i] + fit.offset);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

RunReport run(const RunConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  report.config = config;
  const fs::path dir = fs::path(config.output_dir) / config.name;
  fs::create_directories(dir);
  report.directory = dir.string();
  const auto alphas = measured_alphas(config.alphas);
  const int threads = effective_threads(config.threads);

  auto log = [&](const SolverSeries& s) {
    std::cerr << config.name << ": " << series_label(s) << " done in " << short_num(s.wall_seconds) << " s"
              << (s.aborted ? " (aborted: " + s.abort_reason + ")" : "") << "\n";
  };

  if (config.has_solver(Solver::Gaussian)) {
    report.series.push_back(run_gaussian(config, dir));
    log(report.series.back());
  }
  for (double delta : config.deltas) {
    if (config.has_solver(Solver::Ed)) {
      report.series.push_back(run_ed(config, delta, dir, alphas));
      log(report.series.back());
    }
    if (config.has_solver(Solver::Tebd))
      for (double dt : config.dts) {
        report.series.push_back(run_tebd(config, delta, dt, dir, alphas, threads));
        log(report.series.back());
      }
  }

  // TEBD runs are judged against the exact solvers that cover the same delta.
  for (const auto& candidate : report.series) {
    if (candidate.solver != Solver::Tebd) continue;
    for (const auto& reference : report.series) {
      if (reference.solver == Solver::Tebd || reference.delta != candidate.delta) continue;
      auto cmp = compare_series(reference, candidate, config.length, config.comparison_end(), config.tol_itac,
                                config.tol_s2);
      write_file(dir / ("compare_" + series_label(reference) + "_vs_" + series_label(candidate) + ".csv"),
                 comparison_csv(cmp));
      report.comparisons.push_back(std::move(cmp));
    }
  }

  for (const auto& s : report.series) {
    if (s.aborted) report.failures.push_back(series_label(s) + " aborted: " + s.abort_reason);
    if (s.bound_violations > 0)
      report.failures.push_back(series_label(s) + ": " + std::to_string(s.bound_violations) + " bound violations");
  }
  for (const auto& cmp : report.comparisons)
    for (const auto& [name, ok] : cmp.passed)
      if (!ok)
        report.failures.push_back(cmp.candidate + " vs " + cmp.reference + ": max |delta " + name +
                                  "| = " + num(cmp.max_abs_error.at(name)) + " exceeds " + num(cmp.tolerance.at(name)));
  report.passed = report.failures.empty();
  report.wall_seconds = seconds_since(start);

  json manifest;
  manifest["schema_version"] = kManifestSchemaVersion;
  manifest["name"] = config.name;
  json cfg;
  std::istringstream echo(config.echo());
  for (std::string line; std::getline(echo, line);) {
    const auto eq = line.find(" = ");
    cfg[line.substr(0, eq)] = line.substr(eq + 3);
  }
  manifest["config"] = cfg;
  manifest["threads"] = threads;
  manifest["wall_seconds"] = report.wall_seconds;
  json runs = json::array();
  for (const auto& s : report.series) {
    json r = {{"solver", to_string(s.solver)},
              {"delta", s.delta},
              {"csv", fs::path(s.csv_path).filename().string()},
              {"rows", s.solver == Solver::Gaussian ? s.gaussian.size() : s.records.size()},
              {"wall_seconds", s.wall_seconds},
              {"aborted", s.aborted},
              {"abort_reason", s.abort_reason},
              {"bound_violations", s.bound_violations},
              {"light_cone_time", s.light_cone_time}};
    if (s.solver == Solver::Tebd) {
      r["dt"] = s.dt;
      r["degenerate_cuts"] = s.degenerate_cuts;
      r["final_discarded_weight"] = s.records.empty() ? 0.0 : s.records.back().discarded_weight;
      r["max_chi"] = s.records.empty() ? 1 : s.records.back().chi_used;
    }
    if (s.chain_fits) r["growth_fit"] = {fit_json((*s.chain_fits)[0]), fit_json((*s.chain_fits)[1])};
    runs.push_back(r);
  }
  manifest["runs"] = runs;
  json comparisons = json::array();
  for (const auto& cmp : report.comparisons) {
    json c = {{"reference", cmp.reference}, {"candidate", cmp.candidate}, {"points", cmp.times.size()}};
    for (const auto& o : cmp.observables) {
      json entry = {{"max_abs_error", cmp.max_abs_error.at(o)}};
      if (cmp.tolerance.count(o)) {
        entry["tolerance"] = cmp.tolerance.at(o);
        entry["passed"] = cmp.passed.at(o);
      }
      c[o] = entry;
    }
    comparisons.push_back(c);
  }
  manifest["comparisons"] = comparisons;
  manifest["passed"] = report.passed;
  manifest["failures"] = report.failures;
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  return report;
}

}  // namespace hpte
