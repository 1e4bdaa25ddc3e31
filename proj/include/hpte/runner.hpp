#pragma once

// Orchestrates the solvers for a RunConfig, writes CSV series, a JSON manifest
// and comparison reports.

#include "hpte/free_fermion.hpp"
#include "hpte/run_config.hpp"
#include "hpte/tebd_engine.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hpte {

constexpr int kManifestSchemaVersion = 1;

struct GaussianRow {
  double t = 0.0;
  double delta_n2 = 0.0;
  double s2 = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::array<double, 2> chain_delta_n2{0.0, 0.0};
};

struct SolverSeries {
  Solver solver = Solver::Tebd;
  double delta = 0.0;
  double dt = 0.0;                 // tebd only
  std::string csv_path;
  std::vector<TimeSeriesRecord> records;  // tebd, ed
  std::vector<GaussianRow> gaussian;      // gaussian
  double wall_seconds = 0.0;
  bool aborted = false;
  std::string abort_reason;
  int bound_violations = 0;        // entropy bound, alpha > 1
  int degenerate_cuts = 0;
  double light_cone_time = 0.0;
  std::optional<std::array<ff::GrowthFit, 2>> chain_fits;  // gaussian with fit_window
};

/// Pointwise differences between two series on their common time grid.
struct ComparisonReport {
  std::string reference;
  std::string candidate;
  std::vector<std::string> observables;
  std::vector<double> times;
  std::vector<std::vector<double>> deltas;       // [observable][time], candidate - reference
  std::map<std::string, double> max_abs_error;
  std::map<std::string, double> tolerance;       // only observables with a tolerance are judged
  std::map<std::string, bool> passed;

  bool all_passed() const;
};

struct RunReport {
  RunConfig config;
  std::string directory;
  std::vector<SolverSeries> series;
  std::vector<ComparisonReport> comparisons;
  double wall_seconds = 0.0;
  bool passed = false;
  std::vector<std::string> failures;

  /// Series lookup; dt is ignored for ed and gaussian.
  const SolverSeries& find(Solver solver, double delta, double dt = 0.0) const;
};

/// Thread count after the HPTE_NUM_THREADS override.
int effective_threads(int configured);

RunReport run(const RunConfig& config);

/// Observables compared: tebd/ed vs tebd/ed -> itac (complex modulus of the
/// difference) and S2 at the centre bond; anything vs gaussian -> S2 only.
ComparisonReport compare_series(const SolverSeries& reference, const SolverSeries& candidate, int length,
                                double until, double tol_itac, double tol_s2);

/// Compares all shared numeric columns of two CSV files over the common t grid.
/// S2_gaussian is matched with S2_bond_center.
ComparisonReport compare_csv(const std::string& path_a, const std::string& path_b, double tolerance);

std::string comparison_csv(const ComparisonReport& report);

/// Least squares y = slope * x + offset.
struct LineFit {
  double slope = 0.0;
  double offset = 0.0;
  double residual = 0.0;  // RMS
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace hpte
