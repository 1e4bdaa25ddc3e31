#pragma once

// Run configurations: plain "key = value" text, one entry per line, '#' starts
// a comment, lists are comma separated. See README for the key table.

#include "hpte/spin_algebra.hpp"

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hpte {

enum class Solver { Tebd, Gaussian, Ed };

std::string to_string(Solver solver);

struct RunConfig {
  std::string name = "run";
  SpinKind kind = SpinKind::Half;
  int length = 0;
  std::vector<double> deltas;     // one run per value
  OperatorSpec op{OperatorName::Sz, 1};
  std::string op_text;
  int chi_max = 256;
  double cutoff = 1e-14;
  std::vector<double> dts{0.05};  // one run per value
  int trotter_order = 4;
  double t_final = 10.0;
  double measure_every = 0.25;
  std::vector<double> alphas{1.0, 2.0};
  std::vector<Solver> solvers{Solver::Tebd};
  long seed = 0;
  std::string output_dir = "out";
  double tol_itac = 0.0;          // 0 disables the check
  double tol_s2 = 0.0;
  double compare_until = -1.0;    // comparisons restricted to t <= this; < 0 means t_final
  double abort_discarded = 1.0;
  std::pair<double, double> fit_window{0.0, 0.0};  // Gaussian growth fit, disabled when empty
  int threads = 1;
  bool checkpoint = false;        // write the final MPO next to the CSV
  std::string resume;             // checkpoint to continue from

  bool has_solver(Solver solver) const;
  double comparison_end() const { return compare_until < 0.0 ? t_final : compare_until; }
  /// Effective configuration in the same key = value syntax.
  std::string echo() const;
};

/// Thrown with one line per problem found.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

/// Parses and validates; later occurrences of a key replace earlier ones.
RunConfig parse_config(const std::string& text);

/// Applies "key=value" overrides on top of config text before validation.
RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides);

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Directory holding the shipped presets (HPTE_PRESET_DIR overrides the built-in path).
std::string preset_directory();
std::string preset_path(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace hpte
