#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "iekf/cli.hpp"
#include "iekf/config.hpp"

using namespace iekf;
namespace fs = std::filesystem;

namespace {

const std::string kConfigs = IEKF_CONFIG_DIR;

std::string conf(const std::string& name) { return kConfigs + "/" + name; }

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "iekf");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("iekf_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

const std::string kMinimal =
    "model = car\n"
    "init.sigma = 0.1, 0, 0\n"
    "tuning.Q_diag = 1e-4, 1e-4, 1e-4\n"
    "tuning.N_diag = 1, 1\n"
    "tuning.P0_diag = 0.01, 0.01, 0.01\n";

int error_line(const std::string& text) {
  try {
    parse_config_string(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST(Config, Minimal) {
  const Scenario sc = parse_config_string("# comment\n" + kMinimal);
  EXPECT_EQ(sc.model, ModelKind::Car);
  EXPECT_EQ(sc.filters, (std::vector<std::string>{"iekf", "ekf"}));
  EXPECT_DOUBLE_EQ(sc.init_sigma(0), 0.1);
}

TEST(Config, ErrorsCarryLineNumbers) {
  EXPECT_EQ(error_line(kMinimal + "bogus = 1\n"), 6);
  EXPECT_EQ(error_line(kMinimal + "model = car\n"), 6);
  EXPECT_EQ(error_line("model = boat\n" + kMinimal.substr(kMinimal.find('\n') + 1)), 1);
  EXPECT_EQ(error_line(kMinimal + "seed =\n"), 6);
  EXPECT_EQ(error_line(kMinimal + "rates.imu = fast\n"), 6);
  EXPECT_EQ(error_line("model = car\n"), 0);
  // Semantic failures have no single line to blame.
  EXPECT_EQ(error_line(kMinimal + "filters = mekf\n"), 0);
}

TEST(Config, Landmarks) {
  const auto lms = parse_landmarks("0 0 5; 10 0 0; 0 10 2");
  ASSERT_EQ(lms.size(), 3u);
  EXPECT_EQ(lms[2], Eigen::Vector3d(0, 10, 2));
  EXPECT_THROW(parse_landmarks(""), ConfigError);
}

TEST(Config, RoundTrip) {
  for (const char* name : {"fig1_small.conf", "fig1_large.conf", "standstill.conf", "fig2_q1.conf", "fig2_q2.conf"}) {
    const Scenario a = load_config(conf(name));
    const Scenario b = parse_config_string(format_config(a));
    EXPECT_EQ(format_config(a), format_config(b)) << name;
  }
}

TEST(Config, FilesMatchBuiltinScenarios) {
  EXPECT_EQ(format_config(load_config(conf("fig1_large.conf"))), format_config(scenarios::fig1(true)));
  EXPECT_EQ(format_config(load_config(conf("fig1_small.conf"))), format_config(scenarios::fig1(false)));
  EXPECT_EQ(format_config(load_config(conf("fig2_q1.conf"))), format_config(scenarios::fig2(1)));
  EXPECT_EQ(format_config(load_config(conf("fig2_q2.conf"))), format_config(scenarios::fig2(2)));
}

TEST(Cli, RunWritesCsvAndSummary) {
  const fs::path dir = scratch("run");
  const CliResult r = cli({"run", conf("fig1_small.conf"), "--out", dir.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::ifstream in(dir / "fig1_small.csv");
  int lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  EXPECT_EQ(lines, 4002);
  EXPECT_TRUE(fs::exists(dir / "fig1_small_summary.txt"));
  EXPECT_NE(r.out.find("iekf: final_att_deg="), std::string::npos);
}

TEST(Cli, BadConfigExitsWithOne) {
  const fs::path dir = scratch("bad");
  std::ofstream(dir / "bad.conf") << kMinimal << "bogus = 1\n";
  const CliResult r = cli({"run", (dir / "bad.conf").string(), "--out", dir.string()});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find("line 6"), std::string::npos) << r.err;
}

TEST(Cli, DuplicateOutputNames) {
  const fs::path dir = scratch("dup");
  const CliResult r = cli({"run", conf("fig1_small.conf"), conf("fig1_small.conf"), "--out", dir.string()});
  EXPECT_EQ(r.code, kExitConfig);
}

TEST(Cli, Check) {
  EXPECT_EQ(cli({"check", "--model", "car"}).code, kExitOk);
  EXPECT_EQ(cli({"check", "--model", "nav"}).code, kExitOk);
  EXPECT_EQ(cli({"check", "--model", "nav", "--landmarks", "0 0 0; 1 1 1; 2 2 2"}).code, kExitCheckFailed);
  EXPECT_EQ(cli({"check", "--model", "boat"}).code, kExitConfig);
}

TEST(Cli, Observability) {
  const CliResult ok = cli({"observability", conf("fig1_large.conf")});
  EXPECT_EQ(ok.code, kExitOk) << ok.out;
  EXPECT_NE(ok.out.find("all conditions met"), std::string::npos);
  EXPECT_EQ(cli({"observability", conf("standstill.conf")}).code, kExitCheckFailed);
}

TEST(Cli, SerialAndParallelRunsAgree) {
  const fs::path a = scratch("jobs1");
  const fs::path b = scratch("jobs2");
  const std::vector<std::string> confs{conf("fig1_large.conf"), conf("fig2_q2.conf")};
  std::vector<std::string> args{"run"};
  args.insert(args.end(), confs.begin(), confs.end());
  auto with = [&](const fs::path& dir, const char* jobs) {
    auto v = args;
    v.insert(v.end(), {"--out", dir.string(), "--jobs", jobs, "--noise", "on"});
    return v;
  };
  ASSERT_EQ(cli(with(a, "1")).code, kExitOk);
  ASSERT_EQ(cli(with(b, "2")).code, kExitOk);
  for (const char* f : {"fig1_large.csv", "fig2_q2.csv"}) {
    std::ifstream ia(a / f), ib(b / f);
    std::stringstream sa, sb;
    sa << ia.rdbuf();
    sb << ib.rdbuf();
    EXPECT_EQ(sa.str(), sb.str()) << f;
  }
}
