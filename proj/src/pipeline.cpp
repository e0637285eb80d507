#include "gridins/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "gridins/cps.hpp"
#include "gridins/csv.hpp"
#include "gridins/epidemic.hpp"
#include "gridins/opf.hpp"
#include "gridins/rng.hpp"

namespace gridins::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class StageClock {
 public:
  explicit StageClock(std::vector<StageTiming>& out) : out_(out) {}

  template <typename F>
  auto run(const std::string& stage, F&& body) {
    const auto t0 = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(body())>) {
      body();
      record(stage, t0);
    } else {
      auto result = body();
      record(stage, t0);
      return result;
    }
  }

 private:
  void record(const std::string& stage,
              std::chrono::steady_clock::time_point t0) {
    const auto dt = std::chrono::steady_clock::now() - t0;
    out_.push_back({stage, std::chrono::duration<double>(dt).count()});
  }

  std::vector<StageTiming>& out_;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

const char* thread_token(JobThreads t) {
  switch (t) {
    case JobThreads::J1: return "J1";
    case JobThreads::J2: return "J2";
    default: return "J3";
  }
}

json scenario_to_json(const ScenarioConfig& s, const std::string& label) {
  json j;
  j["label"] = label;
  j["job_threads"] = thread_token(s.default_job_threads);
  json jt_over = json::object();
  for (const auto& [host, t] : s.job_threads_overrides)
    jt_over[host] = thread_token(t);
  j["job_threads_overrides"] = jt_over;
  j["smart_monitoring"] = s.default_smart_monitoring;
  json sm_over = json::object();
  for (const auto& [host, on] : s.smart_monitoring_overrides) sm_over[host] = on;
  j["smart_monitoring_overrides"] = sm_over;
  j["correlation"] = s.correlation;
  j["risk_level"] = s.risk_level;
  j["epidemic"] = {{"epsilon", s.epidemic.reproduction_hours},
                   {"c", s.epidemic.coupling},
                   {"z_epi", s.epidemic.external_infection_hours},
                   {"r_epi", s.epidemic.external_recovery_hours}};
  j["horizon_years"] = s.horizon_years;
  j["steps_per_year"] = s.steps_per_year;
  j["voll"] = s.voll;
  j["reachability_gating"] = s.reachability_gating;
  if (s.power_base_mw) j["power_base_mw"] = *s.power_base_mw;
  return j;
}

json timings_to_json(const std::vector<StageTiming>& timings) {
  json arr = json::array();
  for (const auto& t : timings)
    arr.push_back({{"stage", t.stage}, {"seconds", t.seconds}});
  return arr;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace

std::int64_t resolve_seed(const std::optional<std::int64_t>& flag,
                          const std::optional<std::int64_t>& config_seed) {
  if (flag) return *flag;
  if (config_seed) return *config_seed;
  if (const char* env = std::getenv("GRIDINS_SEED")) {
    try {
      size_t pos = 0;
      const long long v = std::stoll(env, &pos);
      if (pos != std::string(env).size())
        throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      throw std::runtime_error(std::string("GRIDINS_SEED is not an integer: ") +
                               env);
    }
  }
  return 1;
}

void apply_scenario(ScenarioConfig& scenario, const std::string& name) {
  JobThreads threads;
  bool monitoring;
  if (name == "S1") { threads = JobThreads::J1; monitoring = false; }
  else if (name == "S2") { threads = JobThreads::J2; monitoring = false; }
  else if (name == "S3") { threads = JobThreads::J3; monitoring = false; }
  else if (name == "S4") { threads = JobThreads::J1; monitoring = true; }
  else if (name == "S5") { threads = JobThreads::J2; monitoring = true; }
  else if (name == "S6") { threads = JobThreads::J3; monitoring = true; }
  else throw std::domain_error("unknown scenario name: " + name +
                               " (expected S1..S6)");
  scenario.default_job_threads = threads;
  scenario.default_smart_monitoring = monitoring;
  scenario.job_threads_overrides.clear();
  scenario.smart_monitoring_overrides.clear();
}

SimulateOutcome run_simulate(const SimulateOptions& options) {
  if (options.workers < 1)
    throw std::domain_error("simulate: workers must be at least 1");
  SimulateOutcome outcome;
  StageClock clock(outcome.timings);

  const std::string config_text = read_file(options.config_path);
  LoadedModel model = clock.run("load-model", [&] {
    return load_model(config_text);
  });
  ScenarioConfig& scenario = model.scenario;

  outcome.scenario_label = options.scenario.value_or("config");
  if (options.scenario) apply_scenario(scenario, *options.scenario);
  if (options.years) scenario.horizon_years = *options.years;
  if (options.correlation) scenario.correlation = *options.correlation;
  scenario.validate(model.grid);

  outcome.seed = resolve_seed(options.seed, scenario.seed);
  const auto seed = static_cast<std::uint64_t>(outcome.seed);

  const cps::CompromiseAnalysis analysis =
      clock.run("compromise-times", [&] {
        return cps::compromise_times(model.grid, model.attack_graph, scenario,
                                     seed);
      });
  outcome.clipped_chains = analysis.clipped_chains;

  const epidemic::StateSequences seq = clock.run("state-sampling", [&] {
    return epidemic::generate_state_sequences(model.grid, model.attack_graph,
                                              analysis.hours_by_host, scenario,
                                              seed, options.workers);
  });

  const opf::LossSeries series = clock.run("mcs", [&] {
    return opf::run_mcs(model.grid, seq, scenario, options.workers);
  });

  const opf::LossDistribution losses = clock.run("monetize", [&] {
    return opf::monetize(series, scenario.voll, scenario.steps_per_year);
  });
  outcome.elc = opf::elc(series, scenario.power_base_mw);
  outcome.efc = opf::efc(series);

  fs::create_directories(options.out_dir);
  const fs::path out(options.out_dir);
  outcome.manifest_path = (out / "manifest.json").string();
  outcome.losses_path = (out / "losses.csv").string();
  outcome.reliability_path = (out / "reliability.csv").string();

  json manifest;
  manifest["version"] = GRIDINS_VERSION;
  manifest["command"] = "simulate";
  manifest["config_path"] = options.config_path;
  manifest["config_digest"] = hex64(fnv1a64(config_text));
  manifest["seed"] = outcome.seed;
  manifest["scenario"] = scenario_to_json(scenario, outcome.scenario_label);
  manifest["workers"] = options.workers;
  manifest["out_dir"] = options.out_dir;
  manifest["outputs"] = {"losses.csv", "reliability.csv"};
  manifest["clipped_chains"] = outcome.clipped_chains;
  manifest["timings"] = timings_to_json(outcome.timings);
  write_text(outcome.manifest_path, manifest.dump(2) + "\n");

  csv::write_losses(outcome.losses_path, losses);
  csv::write_reliability(outcome.reliability_path, outcome.scenario_label,
                         outcome.elc, outcome.efc);
  return outcome;
}

actuarial::PremiumReport run_premiums(const PremiumsOptions& options) {
  const std::string losses_text = read_file(options.losses_path);
  const actuarial::LossMatrix losses = csv::read_losses(options.losses_path);

  actuarial::PremiumOptions popts;
  popts.tail_level = options.risk_level;
  if (options.delta == "tail") {
    popts.delta_mode = actuarial::DeltaMode::TailLevel;
  } else if (options.delta.rfind("ecdf:", 0) == 0) {
    popts.delta_mode = actuarial::DeltaMode::EcdfThreshold;
    const std::string arg = options.delta.substr(5);
    try {
      size_t pos = 0;
      popts.ecdf_threshold = std::stod(arg, &pos);
      if (pos != arg.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw std::domain_error("premiums: bad ecdf threshold: " + arg);
    }
  } else {
    throw std::domain_error("premiums: unknown delta mode: " + options.delta +
                            " (expected tail or ecdf:<threshold>)");
  }
  if (options.pi2 == "coalitional")
    popts.pi2_rule = actuarial::coalitional_premiums;
  else
    throw std::domain_error("premiums: unknown pi2 rule: " + options.pi2);
  if (options.pi1 == "tce")
    popts.pi1_mode = actuarial::Pi1Mode::OwnTce;
  else if (options.pi1 == "allocated")
    popts.pi1_mode = actuarial::Pi1Mode::Allocated;
  else
    throw std::domain_error("premiums: unknown pi1 mode: " + options.pi1);

  const actuarial::PremiumReport report =
      actuarial::build_premium_report(losses, popts);

  fs::create_directories(options.out_dir);
  const fs::path out(options.out_dir);
  json manifest;
  manifest["version"] = GRIDINS_VERSION;
  manifest["command"] = "premiums";
  manifest["losses_path"] = options.losses_path;
  manifest["losses_digest"] = hex64(fnv1a64(losses_text));
  manifest["risk_level"] = options.risk_level;
  manifest["delta"] = options.delta;
  manifest["pi2"] = options.pi2;
  manifest["pi1"] = options.pi1;
  manifest["out_dir"] = options.out_dir;
  manifest["outputs"] = {"premiums.csv", "loss_stats.csv"};
  write_text((out / "premiums_manifest.json").string(), manifest.dump(2) + "\n");

  csv::write_premiums((out / "premiums.csv").string(), report);
  csv::write_loss_stats((out / "loss_stats.csv").string(), report);
  return report;
}

namespace {

struct RunTables {
  std::string scenario;
  double elc = 0.0, efc = 0.0;
  csv::Table loss_stats;
  csv::Table premiums;
};

double parse_field(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size())
    throw std::runtime_error("malformed numeric field: " + s);
  return v;
}

RunTables read_run(const fs::path& dir) {
  std::vector<std::string> missing;
  for (const char* name :
       {"reliability.csv", "losses.csv", "premiums.csv", "loss_stats.csv"})
    if (!fs::exists(dir / name)) missing.push_back((dir / name).string());
  if (!missing.empty()) {
    std::string msg = "report: missing inputs:";
    for (const auto& m : missing) msg += " " + m;
    throw std::runtime_error(msg);
  }

  RunTables run;
  const csv::Table rel = csv::read_table((dir / "reliability.csv").string());
  if (rel.rows.size() != 1 || rel.rows[0].size() != 3)
    throw std::runtime_error("report: malformed reliability table under " +
                             dir.string());
  run.scenario = rel.rows[0][0];
  run.elc = parse_field(rel.rows[0][1]);
  run.efc = parse_field(rel.rows[0][2]);
  run.loss_stats = csv::read_table((dir / "loss_stats.csv").string());
  run.premiums = csv::read_table((dir / "premiums.csv").string());
  return run;
}

}  // namespace

void run_report(const std::string& run_dir, const std::string& format) {
  if (format != "csv" && format != "json")
    throw std::domain_error("report: format must be csv or json");
  const fs::path root(run_dir);
  if (!fs::is_directory(root))
    throw std::runtime_error("report: not a directory: " + run_dir);

  std::vector<fs::path> run_dirs;
  if (fs::exists(root / "reliability.csv")) {
    run_dirs.push_back(root);
  } else {
    for (const auto& entry : fs::directory_iterator(root))
      if (entry.is_directory() && fs::exists(entry.path() / "reliability.csv"))
        run_dirs.push_back(entry.path());
    std::sort(run_dirs.begin(), run_dirs.end());
  }
  if (run_dirs.empty())
    throw std::runtime_error("report: missing inputs: " +
                             (root / "reliability.csv").string());

  std::vector<RunTables> runs;
  for (const auto& dir : run_dirs) runs.push_back(read_run(dir));

  if (format == "csv") {
    std::ostringstream out;
    out << "scenario,tg,design,elc,efc,mean,sd,cov,premium,indemnity,rlc,"
           "insolvency\n";
    for (const auto& run : runs) {
      std::map<std::string, std::vector<std::string>> stats_by_tg;
      for (const auto& row : run.loss_stats.rows) stats_by_tg[row[0]] = row;
      for (const auto& row : run.premiums.rows) {
        const auto& stats = stats_by_tg.at(row[0]);
        out << run.scenario << ',' << row[0] << ',' << row[1] << ','
            << csv::format_number(run.elc) << ','
            << csv::format_number(run.efc) << ',' << stats[1] << ','
            << stats[2] << ',' << stats[3] << ',' << row[2] << ',' << row[3]
            << ',' << row[4] << ',' << row[5] << '\n';
      }
    }
    write_text((root / "summary.csv").string(), out.str());
    return;
  }

  json blocks = json::array();
  for (const auto& run : runs) {
    json block;
    block["scenario"] = run.scenario;
    block["elc"] = run.elc;
    block["efc"] = run.efc;
    json stats = json::array();
    for (const auto& row : run.loss_stats.rows)
      stats.push_back({{"tg", row[0]},
                       {"mean", parse_field(row[1])},
                       {"sd", parse_field(row[2])},
                       {"cov", parse_field(row[3])}});
    block["loss_stats"] = stats;
    json prem = json::array();
    for (const auto& row : run.premiums.rows)
      prem.push_back({{"tg", row[0]},
                      {"design", row[1]},
                      {"premium", parse_field(row[2])},
                      {"indemnity", parse_field(row[3])},
                      {"rlc", parse_field(row[4])},
                      {"insolvency", parse_field(row[5])}});
    block["premiums"] = prem;
    blocks.push_back(block);
  }
  json summary;
  summary["scenarios"] = blocks;
  write_text((root / "summary.json").string(), summary.dump(2) + "\n");
}

int run_validate(const std::string& config_path) {
  json diag;
  try {
    const LoadedModel model = load_model_file(config_path);
    diag["valid"] = true;
    diag["buses"] = model.grid.buses.size();
    diag["lines"] = model.grid.lines.size();
    diag["tgs"] = model.grid.tgs.size();
    diag["vulnerabilities"] = model.attack_graph.nodes.size();
    std::cout << diag.dump() << "\n";
    return 0;
  } catch (const std::exception& e) {
    diag["valid"] = false;
    diag["error"] = e.what();
    std::cout << diag.dump() << "\n";
    return 1;
  }
}

}  // namespace gridins::pipeline
