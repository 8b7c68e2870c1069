#include <gtest/gtest.h>

#include <numbers>
#include <sstream>

#include "iekf/sim.hpp"

using namespace iekf;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

const FilterTrace& trace(const RunLog& log, const std::string& name) {
  for (const auto& f : log.filters) {
    if (f.name == name) return f;
  }
  throw InvalidArgument("missing filter " + name);
}

double max_gap(const std::vector<double>& a, const std::vector<double>& b) {
  EXPECT_EQ(a.size(), b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::string csv(const RunLog& log) {
  std::ostringstream os;
  write_csv(log, os);
  return os.str();
}

}  // namespace

TEST(Trajectory, CarCircle) {
  const Scenario sc = scenarios::fig1(false);
  const Trajectory tr = synthesize_inputs(sc);
  EXPECT_NEAR(tr.input(1), std::numbers::pi * 10.0 / 40.0, 1e-15);
  EXPECT_NEAR(tr.input(0) * tr.input(1), 2.0 * std::numbers::pi / 40.0, 1e-15);
  const Eigen::MatrixXd end = tr.truth(40.0).matrix();
  EXPECT_LT((end - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Trajectory, NavInputsReproduceTruth) {
  const Scenario sc = scenarios::fig2(1);
  const Trajectory tr = synthesize_inputs(sc);
  const Dynamics d = nav::dynamics(sc.gravity);
  const double dt = 0.01;
  auto rhs = [&](double, const Eigen::MatrixXd& m) -> Eigen::MatrixXd { return d.f(tr.input, m); };
  GroupElement x = tr.truth(0.0);
  double worst = 0.0;
  for (int k = 1; k <= sc.steps(); ++k) {
    x = lie::project_to_group(Group::SE2_3, rk4_step<Eigen::MatrixXd>(x.matrix(), 0.0, dt, rhs));
    worst = std::max(worst, (x.matrix() - tr.truth(k * dt).matrix()).cwiseAbs().maxCoeff());
  }
  EXPECT_LE(worst, 1e-9);
}

TEST(Run, ZeroDurationGivesOneSample) {
  Scenario sc = scenarios::standstill();
  sc.duration = 0.0;
  const RunLog log = run(sc);
  EXPECT_EQ(log.t.size(), 1u);
}

TEST(Run, ExactInitStaysExact) {
  for (Scenario sc : {scenarios::fig1(false), scenarios::fig2(1)}) {
    sc.init_mode = InitMode::Fixed;
    sc.init_sigma.setZero();
    const RunLog log = run(sc);
    for (const auto& f : log.filters) {
      for (std::size_t i = 0; i < log.t.size(); ++i) {
        ASSERT_LE(f.err_att_deg[i], 1e-8) << sc.name << ' ' << f.name << " t=" << log.t[i];
        ASSERT_LE(f.err_pos_m[i], 1e-8) << sc.name << ' ' << f.name << " t=" << log.t[i];
      }
    }
  }
}

TEST(Run, InitialAttitudeError) {
  Scenario sc = scenarios::fig2(1);
  sc.init_mode = InitMode::Fixed;
  sc.init_sigma.setZero();
  sc.init_sigma(0) = 15.0 * kDeg;
  const RunLog log = run(sc);
  EXPECT_NEAR(trace(log, "iekf").err_att_deg.front(), 15.0, 1e-9);
  EXPECT_NEAR(trace(log, "mekf").err_att_deg.front(), 15.0, 1e-9);
}

TEST(Run, Deterministic) {
  Scenario sc = scenarios::fig2(2);
  sc.inject_noise = true;
  sc.seed = 9;
  EXPECT_EQ(csv(run(sc)), csv(run(sc)));
  Scenario other = sc;
  other.seed = 10;
  EXPECT_NE(csv(run(sc)), csv(run(other)));
}

TEST(Run, CsvLayout) {
  const std::string text = csv(run(scenarios::fig1(false)));
  std::istringstream in(text);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header,
            "t,true_theta,true_x1,true_x2,iekf_err_att_deg,iekf_err_pos_m,iekf_err_log_norm,iekf_trace_P,iekf_updated,"
            "ekf_err_att_deg,ekf_err_pos_m,ekf_err_log_norm,ekf_trace_P,ekf_updated");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, 4001);
}

TEST(Fig1, LargeHeadingError) {
  const Summary s = metrics(run(scenarios::fig1(true)));
  EXPECT_LT(s.at("iekf").final_att_deg, 2.0);
  EXPECT_LT(s.at("iekf").final_att_deg, s.at("ekf").final_att_deg);
}

TEST(Fig1, SmallHeadingErrorFiltersAgree) {
  const RunLog log = run(scenarios::fig1(false));
  const auto& a = trace(log, "iekf").err_att_deg;
  const auto& b = trace(log, "ekf").err_att_deg;
  for (std::size_t i = 0; i < log.t.size() && log.t[i] <= 10.0; ++i) EXPECT_LT(std::abs(a[i] - b[i]), 0.5);
}

TEST(Fig1, StandstillKeepsHeadingError) {
  const Summary s = metrics(run(scenarios::standstill()));
  EXPECT_NEAR(s.at("iekf").final_att_deg, 1.0, 1e-9);
}

TEST(StateIndependence, CarGpsLeftShift) {
  Scenario sc = scenarios::fig1(true);
  sc.inject_noise = true;
  sc.filters = {"iekf"};
  Scenario shifted = sc;
  shifted.truth_shift = TruthShift{car::embed({2.0, Eigen::Vector2d(30.0, -12.0)}), ErrorSide::Left};
  const RunLog a = run(sc);
  const RunLog b = run(shifted);
  EXPECT_LT(max_gap(a.filters[0].err_log_norm, b.filters[0].err_log_norm), 1e-10);
  EXPECT_LT(max_gap(a.filters[0].err_att_deg, b.filters[0].err_att_deg), 1e-10);
}

TEST(StateIndependence, CarLandmarksRightShift) {
  Scenario sc = scenarios::fig1(true);
  sc.observation = ObservationKind::Landmarks;
  sc.landmarks = {Eigen::Vector2d(3, -1), Eigen::Vector2d(-2, 4)};
  sc.inject_noise = true;
  sc.filters = {"iekf"};
  Scenario shifted = sc;
  shifted.truth_shift = TruthShift{car::embed({std::numbers::pi, Eigen::Vector2d::Zero()}), ErrorSide::Right};
  const RunLog a = run(sc);
  const RunLog b = run(shifted);
  EXPECT_LT(max_gap(a.filters[0].err_log_norm, b.filters[0].err_log_norm), 1e-10);
}

TEST(StateIndependence, NavRightShift) {
  Scenario sc = scenarios::fig2(2);
  sc.inject_noise = true;
  sc.filters = {"iekf"};
  Scenario shifted = sc;
  nav::NavState g;
  g.R = Eigen::AngleAxisd(0.9, Eigen::Vector3d(1, -2, 2).normalized()).toRotationMatrix();
  shifted.truth_shift = TruthShift{nav::embed(g), ErrorSide::Right};
  const RunLog a = run(sc);
  const RunLog b = run(shifted);
  EXPECT_LT(max_gap(a.filters[0].err_log_norm, b.filters[0].err_log_norm), 1e-10);
}

TEST(Lyapunov, InvariantFilterMonotone) {
  for (const Scenario& sc : {scenarios::fig1(true), scenarios::fig2(1), scenarios::fig2(2)}) {
    const Summary s = metrics(run(sc));
    EXPECT_TRUE(s.at("iekf").lyapunov_monotone) << sc.name;
    EXPECT_GE(s.at("iekf").min_P_eig, -1e-10) << sc.name;
  }
}

TEST(Scenario, Validation) {
  Scenario sc = scenarios::fig1(false);
  sc.filters = {"mekf"};
  EXPECT_THROW(sc.validate(), InvalidArgument);
  sc = scenarios::fig1(false);
  sc.obs_rate = 3.0;
  EXPECT_THROW(sc.validate(), InvalidArgument);
  sc = scenarios::fig2(1);
  sc.landmarks.clear();
  EXPECT_THROW(sc.validate(), InvalidArgument);
}
