// hpte: run configurations, shipped presets, and CSV comparisons.

#include "hpte/linalg.hpp"
#include "hpte/run_config.hpp"
#include "hpte/runner.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

int report(const hpte::RunReport& r) {
  std::cout << r.config.name << ": " << (r.passed ? "PASS" : "FAIL") << " (" << r.series.size() << " series, "
            << r.comparisons.size() << " comparisons) -> " << r.directory << "\n";
  for (const auto& cmp : r.comparisons)
    for (const auto& [name, err] : cmp.max_abs_error) {
      std::cout << "  " << cmp.candidate << " vs " << cmp.reference << " " << name << " max_abs_error=" << err;
      if (cmp.tolerance.count(name))
        std::cout << " tol=" << cmp.tolerance.at(name) << (cmp.passed.at(name) ? " ok" : " FAILED");
      std::cout << "\n";
    }
  for (const auto& f : r.failures) std::cout << "  failure: " << f << "\n";
  return r.passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  hpte::linalg::pin_blas_threads();

  CLI::App app{"Heisenberg-picture TEBD for operator entanglement in spin chains"};
  app.require_subcommand(1);

  std::string config_path, preset_name, output_dir, csv_a, csv_b;
  std::vector<std::string> overrides;
  double tolerance = 1e-8;

  auto* run_cmd = app.add_subcommand("run", "Run a configuration file");
  run_cmd->add_option("config", config_path, "Configuration file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("-s,--set", overrides, "Override a key, e.g. --set chi_max=64");
  run_cmd->add_option("-o,--output-dir", output_dir, "Output directory");

  auto* preset_cmd = app.add_subcommand("preset", "Run a shipped preset");
  preset_cmd->add_option("name", preset_name, "Preset name")->required();
  preset_cmd->add_option("-s,--set", overrides, "Override a key");
  preset_cmd->add_option("-o,--output-dir", output_dir, "Output directory");

  app.add_subcommand("presets", "List shipped presets");

  auto* compare_cmd = app.add_subcommand("compare", "Compare two CSV series on their common time grid");
  compare_cmd->add_option("csv_a", csv_a)->required()->check(CLI::ExistingFile);
  compare_cmd->add_option("csv_b", csv_b)->required()->check(CLI::ExistingFile);
  compare_cmd->add_option("--tol", tolerance, "Maximum absolute difference per column");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("presets")) {
      for (const auto& name : hpte::preset_names()) std::cout << name << "\n";
      return 0;
    }
    if (app.got_subcommand("compare")) {
      const auto cmp = hpte::compare_csv(csv_a, csv_b, tolerance);
      for (const auto& o : cmp.observables)
        std::cout << o << " max_abs_error=" << cmp.max_abs_error.at(o) << (cmp.passed.at(o) ? " ok" : " FAILED")
                  << "\n";
      std::cout << cmp.times.size() << " common time points\n";
      return cmp.all_passed() ? 0 : 1;
    }
    if (!output_dir.empty()) overrides.push_back("output_dir=" + output_dir);
    const std::string path = app.got_subcommand("run") ? config_path : hpte::preset_path(preset_name);
    return report(hpte::run(hpte::load_config(path, overrides)));
  } catch (const hpte::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
