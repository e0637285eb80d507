#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "gridins/csv.hpp"
#include "gridins/pipeline.hpp"

namespace {

int dispatch(CLI::App& app, CLI::App* validate, CLI::App* simulate,
             CLI::App* premiums, CLI::App* report,
             const std::string& config_path,
             gridins::pipeline::SimulateOptions& sim,
             std::int64_t seed_value, int years_value, double corr_value,
             const std::string& scenario_value,
             gridins::pipeline::PremiumsOptions& prem,
             const std::string& run_dir, const std::string& format) {
  using gridins::csv::format_number;

  if (app.got_subcommand(validate))
    return gridins::pipeline::run_validate(config_path);

  if (app.got_subcommand(simulate)) {
    if (simulate->count("--seed")) sim.seed = seed_value;
    if (simulate->count("--years")) sim.years = years_value;
    if (simulate->count("--scenario")) sim.scenario = scenario_value;
    if (simulate->count("--correlation")) sim.correlation = corr_value;
    const auto outcome = gridins::pipeline::run_simulate(sim);
    std::cout << "scenario=" << outcome.scenario_label
              << " seed=" << outcome.seed
              << " elc=" << format_number(outcome.elc)
              << " efc=" << format_number(outcome.efc) << "\n"
              << "wrote " << outcome.losses_path << ", "
              << outcome.reliability_path << ", " << outcome.manifest_path
              << "\n";
    return 0;
  }

  if (app.got_subcommand(premiums)) {
    gridins::pipeline::run_premiums(prem);
    std::cout << "wrote premiums.csv, loss_stats.csv under " << prem.out_dir
              << "\n";
    return 0;
  }

  if (app.got_subcommand(report)) {
    gridins::pipeline::run_report(run_dir, format);
    std::cout << "wrote summary." << format << " under " << run_dir << "\n";
    return 0;
  }
  return 0;  // unreachable: a subcommand is required
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cyberattack load-loss simulation and mutual insurance pricing"};
  app.require_subcommand(1);

  std::string config_path;
  auto* validate = app.add_subcommand("validate", "Check a model config");
  validate->add_option("--config", config_path, "Model config file")
      ->required();

  gridins::pipeline::SimulateOptions sim;
  std::int64_t seed_value = 0;
  int years_value = 1;
  double corr_value = 0.0;
  std::string scenario_value;
  auto* simulate =
      app.add_subcommand("simulate", "Sample losses over the horizon");
  simulate->add_option("--config", sim.config_path, "Model config file")
      ->required();
  simulate->add_option("--seed", seed_value, "Master seed");
  simulate->add_option("--years", years_value, "Override horizon years");
  simulate->add_option("--scenario", scenario_value,
                       "Named hardening scenario S1..S6");
  simulate->add_option("--correlation", corr_value,
                       "Override threat correlation");
  simulate->add_option("--out", sim.out_dir, "Output directory");
  simulate->add_option("--workers", sim.workers, "Worker threads");

  gridins::pipeline::PremiumsOptions prem;
  auto* premiums =
      app.add_subcommand("premiums", "Price the three premium designs");
  premiums->add_option("--losses", prem.losses_path, "losses.csv input")
      ->required();
  premiums->add_option("--risk-level", prem.risk_level, "Tail level in (0,1)")
      ->required();
  premiums->add_option("--delta", prem.delta,
                       "No-claim probability mode: tail or ecdf:<threshold>");
  premiums->add_option("--pi2", prem.pi2, "Design-2 premium rule");
  premiums->add_option("--pi1", prem.pi1,
                       "Design-1 mode: tce or allocated");
  premiums->add_option("--out", prem.out_dir, "Output directory");

  std::string run_dir;
  std::string format = "csv";
  auto* report = app.add_subcommand("report", "Join run tables into a summary");
  report->add_option("--run", run_dir, "Run directory")->required();
  report->add_option("--format", format, "csv or json");

  CLI11_PARSE(app, argc, argv);

  try {
    return dispatch(app, validate, simulate, premiums, report, config_path,
                    sim, seed_value, years_value, corr_value, scenario_value,
                    prem, run_dir, format);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
