#include "iekf/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>

#include "iekf/checks.hpp"
#include "iekf/config.hpp"
#include "iekf/parallel.hpp"

namespace iekf {
namespace {

namespace fs = std::filesystem;

struct RunOptions {
  std::vector<std::string> configs;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::string noise;
  int jobs = 1;
};

int cmd_run(const RunOptions& opt, std::ostream& out, std::ostream& err) {
  std::vector<Scenario> scenarios;
  std::set<std::string> names;
  for (const auto& path : opt.configs) {
    Scenario sc;
    try {
      sc = load_config(path);
    } catch (const ConfigError& e) {
      err << path << ": " << e.what() << '\n';
      return kExitConfig;
    }
    if (opt.seed) sc.seed = *opt.seed;
    if (!opt.noise.empty()) sc.inject_noise = opt.noise == "on";
    if (!names.insert(sc.name).second) {
      err << path << ": output name '" << sc.name << "' is used by another config\n";
      return kExitConfig;
    }
    scenarios.push_back(std::move(sc));
  }

  std::error_code ec;
  fs::create_directories(opt.out_dir, ec);
  if (ec) {
    err << "cannot create " << opt.out_dir << ": " << ec.message() << '\n';
    return kExitConfig;
  }

  const std::vector<RunLog> logs = opt.jobs == 1 ? serial::run_batch(scenarios) : omp::run_batch(scenarios, opt.jobs);
  bool failed = false;
  for (const auto& log : logs) {
    const fs::path csv = fs::path(opt.out_dir) / (log.name + ".csv");
    const fs::path txt = fs::path(opt.out_dir) / (log.name + "_summary.txt");
    std::ofstream c(csv);
    write_csv(log, c);
    const std::string summary = format_summary(metrics(log));
    std::ofstream s(txt);
    s << summary;
    if (!c || !s) {
      err << "cannot write outputs for " << log.name << '\n';
      return kExitConfig;
    }
    out << summary;
    failed = failed || any_failed(log);
  }
  return failed ? kExitNumerical : kExitOk;
}

int cmd_check(const std::string& model, const std::string& landmarks, std::ostream& out, std::ostream& err) {
  std::optional<std::vector<Eigen::VectorXd>> lms;
  try {
    if (!landmarks.empty()) lms = parse_landmarks(landmarks);
  } catch (const ConfigError& e) {
    err << "--landmarks: " << e.what() << '\n';
    return kExitConfig;
  }
  std::vector<CheckRow> rows;
  try {
    rows = model_checks(model == "car" ? ModelKind::Car : ModelKind::Nav, lms);
  } catch (const InvalidArgument& e) {
    err << e.what() << '\n';
    return kExitConfig;
  }
  out << "model " << model << '\n' << format_checks(rows);
  for (const auto& r : rows) {
    if (!r.passed) return kExitCheckFailed;
  }
  return kExitOk;
}

int cmd_observability(const std::string& path, int window, std::ostream& out, std::ostream& err) {
  Scenario sc;
  try {
    sc = load_config(path);
  } catch (const ConfigError& e) {
    err << path << ": " << e.what() << '\n';
    return kExitConfig;
  }
  const LinearSystemSignals sys = linear_system_signals(sc);
  std::vector<WindowReport> reps;
  try {
    reps = sweep_deyst_price(sys, 0.0, sc.duration, window);
  } catch (const InvalidArgument& e) {
    err << e.what() << '\n';
    return kExitConfig;
  }
  if (reps.empty()) {
    err << "the scenario is shorter than one window\n";
    return kExitConfig;
  }
  out << "scenario " << sc.name << ", window of " << window << " updates\n";
  const char* head[] = {"t0", "t1", "phi_min", "phi_max", "q_min", "n_min", "alpha1", "alpha2", "beta1", "beta2"};
  for (const char* h : head) out << std::setw(13) << h;
  out << "  rank  i ii iii iv v\n";
  bool ok = true;
  for (const auto& r : reps) {
    for (double v : {r.t0, r.t1, r.phi_eig_min, r.phi_eig_max, r.q_eig_min, r.n_eig_min, r.alpha1, r.alpha2, r.beta1,
                     r.beta2}) {
      out << std::setw(13) << std::setprecision(5) << v;
    }
    out << std::setw(6) << r.rank_HPhi << ' ';
    for (bool c : r.conditions) out << ' ' << (c ? 'y' : 'n');
    out << '\n';
    ok = ok && r.all_met();
  }
  out << (ok ? "all conditions met\n" : "some conditions fail\n");
  return ok ? kExitOk : kExitCheckFailed;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Invariant EKF experiments"};
  app.require_subcommand(1);

  RunOptions run_opt;
  CLI::App* run = app.add_subcommand("run", "Run scenarios and write CSV logs plus summaries");
  run->add_option("configs", run_opt.configs, "Scenario config files")->required()->check(CLI::ExistingFile);
  run->add_option("--out", run_opt.out_dir, "Output directory");
  run->add_option("--seed", run_opt.seed, "Override the seed of every config");
  run->add_option("--noise", run_opt.noise, "Override noise injection")->check(CLI::IsMember({"on", "off"}));
  run->add_option("--jobs", run_opt.jobs, "Scenarios run in parallel")->check(CLI::PositiveNumber);

  std::string model;
  std::string landmarks;
  CLI::App* check = app.add_subcommand("check", "Property checks for one model");
  check->add_option("--model", model, "car or nav")->required()->check(CLI::IsMember({"car", "nav"}));
  check->add_option("--landmarks", landmarks, "Landmark layout for the rank test, 'x y [z]; ...'");

  std::string obs_config;
  int window = 5;
  CLI::App* obs = app.add_subcommand("observability", "Stability conditions along a scenario");
  obs->add_option("config", obs_config, "Scenario config file")->required()->check(CLI::ExistingFile);
  obs->add_option("--window", window, "Update periods per window")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_opt, out, err);
    if (*check) return cmd_check(model, landmarks, out, err);
    return cmd_observability(obs_config, window, out, err);
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace iekf
