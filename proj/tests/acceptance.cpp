// Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails. Everything except the randomized property checks is
// driven through the shipped presets.

#include "hpte/ed_oracle.hpp"
#include "hpte/free_fermion.hpp"
#include "hpte/run_config.hpp"
#include "hpte/runner.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

using namespace hpte;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  std::vector<std::string> info;
};

std::string num(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct PresetRun {
  std::string label;
  RunConfig config;
  RunReport report;
};

class Runs {
 public:
  explicit Runs(fs::path root) : root_(std::move(root)) {}

  const RunReport& get(const std::string& preset, const std::vector<std::string>& overrides = {},
                       const std::string& label = "") {
    const std::string key = label.empty() ? preset : label;
    for (const auto& r : runs_)
      if (r.label == key) return r.report;
    auto args = overrides;
    args.push_back("output_dir=" + (root_ / "runs").string());
    if (!label.empty()) args.push_back("name=" + label);
    auto config = load_config(preset_path(preset), args);
    const auto start = std::chrono::steady_clock::now();
    auto report = run(config);
    std::cout << "  ran " << key << " in " << num(seconds_since(start), 4) << " s" << std::endl;
    runs_.push_back({key, config, std::move(report)});
    return runs_.back().report;
  }

  void get_all() {
    for (const auto& name : preset_names()) get(name);
  }

  const std::deque<PresetRun>& all() const { return runs_; }
  const fs::path& root() const { return root_; }

  static double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }

 private:
  fs::path root_;
  std::deque<PresetRun> runs_;  // references handed out must survive later runs
};

// ---- helpers over series ----

double center_s2(const TimeSeriesRecord& r, int length) { return r.entropy(2.0, length / 2); }

LineFit log_fit(const SolverSeries& s, int length, double t0, double t1) {
  std::vector<double> x, y;
  for (const auto& r : s.records)
    if (r.t >= t0 - 1e-9 && r.t <= t1 + 1e-9) {
      x.push_back(std::log2(r.t));
      y.push_back(center_s2(r, length));
    }
  return fit_line(x, y);
}

std::string label_of(const SolverSeries& s) {
  return (s.solver == Solver::Tebd ? "tebd" : s.solver == Solver::Ed ? "ed" : "gaussian") + std::string(" delta=") +
         num(s.delta);
}

ComparisonReport versus_exact(const RunReport& report, double delta, double dt) {
  const auto& c = report.config;
  return compare_series(report.find(Solver::Ed, delta), report.find(Solver::Tebd, delta, dt), c.length, c.t_final,
                        0.0, 0.0);
}

// ---- criteria ----

Outcome criterion_1(Runs& runs) {
  const auto& report = runs.get("oracle_small");
  Outcome out{true, "", {}};
  double itac = 0.0, s2 = 0.0;
  for (const auto& cmp : report.comparisons) {
    itac = std::max(itac, cmp.max_abs_error.at("itac"));
    s2 = std::max(s2, cmp.max_abs_error.at("S2_bond_center"));
    out.pass = out.pass && cmp.all_passed() && cmp.times.back() >= 4.0 - 1e-9;
  }
  out.pass = out.pass && report.comparisons.size() == 3 && itac < 1e-5 && s2 < 1e-5;
  out.detail = "L=8 delta 0/0.5/1 vs exact: max |dITAC| = " + num(itac) + ", max |dS2| = " + num(s2) + " (tol 1e-5)";
  return out;
}

Outcome criterion_2(Runs& runs) {
  const auto& report = runs.get("trotter_convergence");
  const auto& c = report.config;
  Outcome out{true, "ITAC error ratios per halving:", {}};
  for (double delta : c.deltas) {
    std::vector<double> errors;
    for (double dt : c.dts) errors.push_back(versus_exact(report, delta, dt).max_abs_error.at("itac"));
    out.detail += " delta=" + num(delta) + ":";
    for (size_t k = 0; k + 1 < errors.size(); ++k) {
      const double ratio = errors[k] / errors[k + 1];
      out.pass = out.pass && ratio >= 8.0 && ratio <= 32.0;
      out.detail += " " + num(ratio);
    }
    std::string e;
    for (double v : errors) e += " " + num(v);
    out.info.push_back("delta=" + num(delta) + " max |dITAC| at dt " + num(c.dts[0]) + ".." + num(c.dts.back()) + ":" + e);
  }
  out.detail += " (need [8, 32])";
  return out;
}

Outcome criterion_3(Runs& runs) {
  const auto& fermionic = runs.get("xx_equivalence");
  const auto& finite = runs.get("xx_equivalence", {"operator=sz(20)", "chi_max=16", "tol_s2=1e-4"}, "xx_equivalence_sz");
  Outcome out{true, "", {}};
  auto judge = [&](const RunReport& r, const std::string& what) {
    for (const auto& cmp : r.comparisons) {
      out.pass = out.pass && cmp.all_passed() && cmp.times.back() >= 10.0 - 1e-9;
      out.detail += what + " max |dS2| = " + num(cmp.max_abs_error.at("S2_bond_center")) + " (tol " +
                    num(cmp.tolerance.at("S2_bond_center")) + ", t <= " + num(cmp.times.back()) + "); ";
    }
    out.pass = out.pass && r.comparisons.size() == 1;
  };
  judge(finite, "sz(20) chi=16:");
  judge(fermionic, "string_z(20) chi=200:");
  return out;
}

Outcome criterion_4(Runs& runs) {
  const auto& z = runs.get("fig1_sigma_z");
  const auto& x = runs.get("fig1_sigma_x");
  const int L = z.config.length;
  Outcome out{true, "", {}};

  // finite index: saturation over the last third
  const auto& xx = z.find(Solver::Tebd, 0.0, z.config.dts[0]);
  double lo = 1e300, hi = -1e300;
  for (const auto& r : xx.records)
    if (r.t >= 2.0 * z.config.t_final / 3.0 - 1e-9) {
      lo = std::min(lo, center_s2(r, L));
      hi = std::max(hi, center_s2(r, L));
    }
  out.pass = hi - lo < 0.05;
  out.detail = "sz delta=0 variation over last third = " + num(hi - lo) + " (< 0.05);";

  auto growth = [&](const RunReport& r, double delta, const std::string& what) {
    const auto fit = log_fit(r.find(Solver::Tebd, delta, r.config.dts[0]), L, 4.0, 12.0);
    out.pass = out.pass && fit.residual < 0.05 && fit.slope > 0.0;
    out.detail += " " + what + " a=" + num(fit.slope) + " res=" + num(fit.residual) + ";";
  };
  growth(x, 0.0, "sx delta=0");
  growth(z, 0.5, "sz delta=0.5");
  growth(z, 1.0, "sz delta=1");
  out.detail += " (log2 fit on [4, 12], res < 0.05, a > 0)";

  // Not judged: the bare string has parity oscillations at the centre cut.
  const auto& f = runs.get("xx_equivalence");
  const auto& g = f.find(Solver::Gaussian, 0.0);
  std::vector<double> gx, gy;
  for (const auto& row : g.gaussian)
    if (row.t >= 4.0 - 1e-9 && row.t <= 12.0 + 1e-9) {
      gx.push_back(std::log2(row.t));
      gy.push_back(row.s2);
    }
  const auto sf = fit_line(gx, gy);
  out.info.push_back("string_z(20) delta=0 (exact Gaussian, t <= " + num(f.config.t_final) + "): a=" + num(sf.slope) +
                     " res=" + num(sf.residual));
  return out;
}

Outcome criterion_5(Runs& runs) {
  const auto& report = runs.get("antal_fit");
  const auto& s = report.find(Solver::Gaussian, 0.0);
  Outcome out{s.chain_fits.has_value(), "", {}};
  if (!out.pass) {
    out.detail = "no growth fit produced";
    return out;
  }
  const double expected = ff::antal_slope();
  out.detail = "L=" + std::to_string(report.config.length) + " fit on ln t in [" + num(report.config.fit_window.first) +
               ", " + num(report.config.fit_window.second) + "]: per chain slopes";
  for (const auto& fit : *s.chain_fits) {
    const double rel = std::abs(fit.slope - expected) / expected;
    out.pass = out.pass && rel < 0.15;
    out.detail += " " + num(fit.slope, 5) + " (" + num(100.0 * rel, 2) + "%)";
  }
  out.detail += " vs 1/(2 pi^2) = " + num(expected, 5) + " (within 15%)";
  return out;
}

Outcome criterion_6(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g;
  const std::vector<OperatorName> names{OperatorName::Sz, OperatorName::Sx, OperatorName::Sy, OperatorName::StringZ};
  int violations = 0;
  double worst = 1e300;
  for (int sample = 0; sample < 100; ++sample) {
    const int L = 4 + static_cast<int>(u(rng) * 37);
    const auto h = ff::xx_hamiltonian(L);
    ff::GaussianState state;
    if (sample % 2 == 0) {
      // operator mapped through Jordan-Wigner
      const auto name = names[sample / 2 % names.size()];
      const int site = 1 + static_cast<int>(u(rng) * L);
      state = ff::from_occupation(std::get<ff::ModeOccupation>(ff::map_operator(name, site, L)));
    } else {
      // random Slater determinant
      const int n = 2 * L;
      const int rank = 1 + static_cast<int>(u(rng) * (n - 1));
      Matrix a(n, rank);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < rank; ++j) a(i, j) = cplx(g(rng), g(rng));
      Eigen::HouseholderQR<Matrix> qr(a);
      const Matrix q = qr.householderQ() * Matrix::Identity(n, rank);
      state = ff::GaussianState{n, q * q.adjoint()};
    }
    state = ff::evolve_gaussian(state, h, 30.0 * u(rng));
    const int cut = 1 + static_cast<int>(u(rng) * (L - 1));
    const auto b = ff::fluctuation_bounds(state, cut);
    const double margin = std::min(b.upper - b.s2, b.s2 - b.lower);
    worst = std::min(worst, margin);
    if (margin < -1e-9) ++violations;
  }
  return {violations == 0, "100 random evolutions and cuts: " + std::to_string(violations) +
                               " violations, smallest margin " + num(worst) + " (tol 1e-9)", {}};
}

Outcome criterion_7(std::mt19937& rng, Runs& runs) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g;
  const std::vector<OperatorName> names{OperatorName::Sz, OperatorName::Sx, OperatorName::Sy, OperatorName::SPlus};
  int violations = 0;
  for (int sample = 0; sample < 100; ++sample) {
    const SpinKind kind = sample % 4 == 3 ? SpinKind::One : SpinKind::Half;
    const int L = kind == SpinKind::One ? 3 + sample % 2 : 3 + sample % 4;
    ed::DenseOperator op;
    if (sample % 2 == 0) {
      const int n = static_cast<int>(std::pow(local_dim(kind), L));
      Matrix m(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = cplx(g(rng), g(rng));
      op = ed::normalized({L, kind, (m + m.adjoint()) / 2.0});
    } else {
      const auto name = names[sample / 2 % names.size()];
      op = ed::normalized(ed::from_spec({name, 1 + static_cast<int>(u(rng) * L)}, L, kind));
    }
    const auto h = ed::chain_hamiltonian(make_bond_hamiltonian(kind, 2.0 * u(rng) - 0.5), L);
    const double t = 6.0 * u(rng);
    const int cut = 1 + static_cast<int>(u(rng) * (L - 1));
    if (!ed::verify_inequality_chain(op, h, t, 2.0, cut).all_hold) ++violations;
  }

  runs.get_all();
  int bound_violations = 0, checked = 0;
  for (const auto& r : runs.all())
    for (const auto& s : r.report.series)
      if (s.solver != Solver::Gaussian) {
        bound_violations += s.bound_violations;
        checked += static_cast<int>(s.records.size());
      }
  return {violations == 0 && bound_violations == 0,
          "100 exact samples at L <= 6: " + std::to_string(violations) + " chain violations (tol 1e-10); entropy bound: " +
              std::to_string(bound_violations) + " violations over " + std::to_string(checked) + " preset records", {}};
}

Outcome criterion_8(Runs& runs) {
  const auto& z = runs.get("fig2_spin1_sz");
  const auto& p = runs.get("fig2_spin1_splus");
  const int L = z.config.length;
  const double T = z.config.t_final;
  Outcome out{true, "", {}};

  const auto& z05 = z.find(Solver::Tebd, 0.5, z.config.dts[0]);
  const auto fit = log_fit(z05, L, T / 2.0, T);
  out.pass = fit.residual < 0.1 && !z05.aborted;
  out.detail = "sz delta=0.5 log fit on second half res=" + num(fit.residual) + " (< 0.1);";

  const auto& p05 = p.find(Solver::Tebd, 0.5, p.config.dts[0]);
  const auto& p1 = p.find(Solver::Tebd, 1.0, p.config.dts[0]);
  const size_t n = std::min(p05.records.size(), p1.records.size());
  const double s05 = center_s2(p05.records[n - 1], L), s1 = center_s2(p1.records[n - 1], L);
  out.pass = out.pass && s05 > s1;
  out.detail += " s_plus S2 at t=" + num(p05.records[n - 1].t) + ": delta=0.5 " + num(s05, 4) + " vs delta=1 " +
                num(s1, 4) + ";";
  auto late_rate = [&](const SolverSeries& s) {
    std::vector<double> t, y;
    for (size_t i = 0; i < n; ++i)
      if (s.records[i].t >= 0.75 * s.records[n - 1].t - 1e-9) {
        t.push_back(s.records[i].t);
        y.push_back(center_s2(s.records[i], L));
      }
    return fit_line(t, y).slope;
  };
  out.info.push_back("s_plus late dS2/dt (last quarter): delta=0.5 " + num(late_rate(p05), 4) + " vs delta=1 " +
                     num(late_rate(p1), 4));

  // |ITAC| decay: log-log line against semi-log line over the whole run (t > 0)
  auto decay_fits = [](const SolverSeries& s, double from) {
    std::vector<double> lt, t, la;
    for (const auto& r : s.records)
      if (r.t > 0.0 && r.t >= from - 1e-9) {
        lt.push_back(std::log(r.t));
        t.push_back(r.t);
        la.push_back(std::log(std::abs(r.itac)));
      }
    return std::pair{fit_line(lt, la).residual, fit_line(t, la).residual};
  };
  for (double delta : z.config.deltas) {
    const auto& s = z.find(Solver::Tebd, delta, z.config.dts[0]);
    const auto [power, expo] = decay_fits(s, 0.0);
    out.pass = out.pass && power < expo;
    out.detail += " sz delta=" + num(delta) + " |ITAC| res log-log " + num(power) + " vs semi-log " + num(expo) + ";";
    const auto [p2, e2] = decay_fits(s, T / 2.0);
    out.info.push_back("sz delta=" + num(delta) + " |ITAC| second half only: log-log " + num(p2) + " vs semi-log " +
                       num(e2) + " (edge reflections at this L)");
  }
  for (const auto* s : {&z05, &p05, &p1})
    out.info.push_back(label_of(*s) + " final discarded weight " + num(s->records.back().discarded_weight) +
                       ", chi " + std::to_string(s->records.back().chi_used));
  return out;
}

Outcome criterion_9(Runs& runs) {
  runs.get_all();
  Outcome out{true, "", {}};
  int files = 0;
  std::vector<std::string> differing;
  const fs::path rerun_root = runs.root() / "rerun";
  for (const auto& r : runs.all()) {
    RunConfig config = r.config;
    config.threads = r.config.threads == 1 ? 2 : 1;
    config.output_dir = rerun_root.string();
    const auto start = std::chrono::steady_clock::now();
    run(config);
    std::cout << "  reran " << r.label << " with " << config.threads << " threads in "
              << num(Runs::seconds_since(start), 4) << " s" << std::endl;
    for (const auto& entry : fs::directory_iterator(r.report.directory)) {
      if (entry.path().extension() != ".csv") continue;
      ++files;
      const fs::path other = rerun_root / config.name / entry.path().filename();
      if (!fs::exists(other) || slurp(entry.path()) != slurp(other))
        differing.push_back(config.name + "/" + entry.path().filename().string());
    }
  }
  out.pass = differing.empty() && files > 0;
  out.detail = std::to_string(runs.all().size()) + " preset runs, " + std::to_string(files) + " CSV files compared, " +
               std::to_string(differing.size()) + " differ";
  for (const auto& d : differing) out.info.push_back("differs: " + d);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::string output_dir = "acceptance_out";
  std::vector<int> only;
  app.add_option("--output-dir", output_dir, "Where preset runs write their artifacts");
  app.add_option("--only", only, "Evaluate just these criteria")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  // thread counts must come from the configs for the determinism check
  ::unsetenv("HPTE_NUM_THREADS");

  const fs::path root(output_dir);
  fs::remove_all(root);
  fs::create_directories(root);
  Runs runs(root);
  std::mt19937 rng(20240611);

  std::set<int> selected(only.begin(), only.end());
  auto wanted = [&](int k) { return selected.empty() || selected.count(k); };

  // Criterion 7 judges every preset run and criterion 9 reruns them, so both go last.
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, [&] { return criterion_1(runs); }},
      {2, [&] { return criterion_2(runs); }},
      {3, [&] { return criterion_3(runs); }},
      {4, [&] { return criterion_4(runs); }},
      {5, [&] { return criterion_5(runs); }},
      {6, [&] { return criterion_6(rng); }},
      {8, [&] { return criterion_8(runs); }},
      {7, [&] { return criterion_7(rng, runs); }},
      {9, [&] { return criterion_9(runs); }},
  };

  std::map<int, Outcome> results;
  for (const auto& [k, check] : criteria) {
    if (!wanted(k)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what(), {}};
    }
    std::cout << "criterion " << k << " " << (o.pass ? "PASS" : "FAIL") << ": " << o.detail << " ["
              << num(Runs::seconds_since(start), 4) << " s]" << std::endl;
    for (const auto& line : o.info) std::cout << "  info: " << line << std::endl;
    results[k] = o;
  }

  int failed = 0;
  std::cout << "\nsummary\n";
  for (const auto& [k, o] : results) {
    std::cout << "criterion " << k << " " << (o.pass ? "PASS" : "FAIL") << "\n";
    failed += !o.pass;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
