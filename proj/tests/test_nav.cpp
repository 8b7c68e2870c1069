#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "iekf/checks.hpp"
#include "iekf/estimators.hpp"
#include "iekf/nav.hpp"
#include "iekf/observability.hpp"

using namespace iekf;

namespace {

GroupElement fly(const Dynamics& d, const Eigen::VectorXd& u, GroupElement x, double t1, double dt) {
  auto rhs = [&](double, const Eigen::MatrixXd& m) -> Eigen::MatrixXd { return d.f(u, m); };
  for (int i = 0, n = step_count(t1, dt); i < n; ++i) {
    x = lie::project_to_group(Group::SE2_3, rk4_step<Eigen::MatrixXd>(x.matrix(), 0.0, dt, rhs));
  }
  return x;
}

GroupElement random_state(std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(9);
  for (int i = 0; i < 9; ++i) v(i) = normal(rng);
  return lie::exp(TangentVector(Group::SE2_3, v));
}

const std::vector<Eigen::Vector3d> kLandmarks{{0, 0, 5}, {10, 0, 0}, {0, 10, 2}};

}  // namespace

TEST(NavDynamics, CoastingWithoutGravity) {
  nav::NavState s;
  s.v = Eigen::Vector3d(1, 0, 0);
  const nav::NavState out =
      nav::extract(fly(nav::dynamics(Eigen::Vector3d::Zero()), Eigen::VectorXd::Zero(6), nav::embed(s), 1.0, 0.01));
  EXPECT_LT((out.x - Eigen::Vector3d(1, 0, 0)).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((out.R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(NavDynamics, FreeFall) {
  const Eigen::Vector3d g = nav::kDefaultGravity;
  const nav::NavState out =
      nav::extract(fly(nav::dynamics(g), Eigen::VectorXd::Zero(6), GroupElement::identity(Group::SE2_3), 1.0, 0.01));
  EXPECT_LT((out.v - g).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LT((out.x - 0.5 * g).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(NavDynamics, GroupAffine) {
  const AffineCheck c = check_group_affine(nav::dynamics(), 100, 1);
  EXPECT_TRUE(c.holds);
  EXPECT_LT(c.max_residual, 1e-9);
}

TEST(NavLandmarks, JacobianAndInnovation) {
  const std::vector<Eigen::Vector3d> p{{1, 2, 3}};
  const std::vector<Eigen::Matrix3d> covs{Eigen::Matrix3d::Identity()};
  const ObservationModel obs = nav::landmark_observation(p, covs);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 10; ++i) {
    const FilterState fs{random_state(rng), Eigen::MatrixXd::Identity(9, 9), 0.0};
    EXPECT_LT((obs.H(fs) - numeric_H(fs, obs)).cwiseAbs().maxCoeff(), 1e-5);
  }
  const ObservationModel all = nav::landmark_observation(kLandmarks, std::vector<Eigen::Matrix3d>(3, Eigen::Matrix3d::Identity()));
  const GroupElement x = random_state(rng);
  std::vector<Eigen::VectorXd> Y;
  for (const auto& q : kLandmarks) Y.push_back(nav::lift_landmark(nav::measure_landmark(x, q)));
  EXPECT_TRUE(innovation({x, Eigen::MatrixXd::Identity(9, 9), 0.0}, all, Y).isZero(1e-12));
}

TEST(NavLandmarks, IsotropicNoiseIsInvariant) {
  const ObservationModel obs = nav::landmark_observation({{1, 2, 3}}, {0.04 * Eigen::Matrix3d::Identity()});
  std::mt19937_64 rng(2);
  const FilterState fs{random_state(rng), Eigen::MatrixXd::Identity(9, 9), 0.0};
  EXPECT_LT((obs.N_hat(fs) - 0.04 * Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(NavLandmarks, ObservabilityRank) {
  const Eigen::MatrixXd A = nav::A_right();
  const LinearizedDynamics lin{ErrorSide::Right, Group::SE2_3, [A](const Eigen::VectorXd&) { return A; }};
  const Eigen::MatrixXd Phi = transition_matrix(lin, constant_input(Eigen::VectorXd::Zero(6)), 0.0, 1.0, 1e-3);
  EXPECT_EQ(rank_H_HPhi(nav::landmark_H(kLandmarks), Phi), 9);
  EXPECT_LT(rank_H_HPhi(nav::landmark_H({{0, 0, 0}, {1, 1, 1}, {2, 2, 2}}), Phi), 9);
  EXPECT_TRUE(nav::non_collinear(kLandmarks));
  EXPECT_FALSE(nav::non_collinear({{0, 0, 0}, {1, 1, 1}, {2, 2, 2}}));
}

TEST(NavMekfModel, Jacobians) {
  Eigen::MatrixXd F = nav::mekf_F(Eigen::Matrix3d::Identity(), Eigen::Vector3d(0, 0, 1));
  EXPECT_EQ(Eigen::Matrix3d(F.block<3, 3>(3, 0)), Eigen::Matrix3d(-lie::skew(Eigen::Vector3d::UnitZ())));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  for (int i = 0; i < 5; ++i) {
    const nav::NavState est = nav::extract(random_state(rng));
    Eigen::VectorXd u(6);
    for (int j = 0; j < 6; ++j) u(j) = normal(rng);
    EXPECT_LT((nav::mekf_F(est.R, u.tail<3>()) - numeric_mekf_F(est, u, nav::kDefaultGravity)).cwiseAbs().maxCoeff(),
              1e-5);
    EXPECT_LT((nav::mekf_H(est.R, est.x, kLandmarks) - numeric_mekf_H(est, kLandmarks)).cwiseAbs().maxCoeff(), 1e-5);
  }
}

TEST(NavMekfModel, CorrectInvertsError) {
  std::mt19937_64 rng(4);
  const nav::NavState est = nav::extract(random_state(rng));
  Eigen::VectorXd eps(9);
  eps << 0.1, -0.2, 0.05, 0.3, 0.1, -0.1, 1.0, -0.5, 0.25;
  const nav::NavState truth = nav::mekf_correct(est, eps);
  EXPECT_LT((nav::mekf_error(truth, est) - eps).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(NavMekfModel, ExactStartStaysExact) {
  Eigen::VectorXd u(6);
  u << 0, 0, 0.2, 0, 0.2, 9.81;
  const Dynamics d = nav::dynamics();
  GroupElement truth = GroupElement::identity(Group::SE2_3);
  NavMekf mekf(truth, Eigen::MatrixXd::Identity(9, 9), 1e-4 * Eigen::MatrixXd::Identity(9, 9), kLandmarks,
               std::vector<Eigen::Matrix3d>(3, 0.01 * Eigen::Matrix3d::Identity()), nav::kDefaultGravity);
  double worst = 0.0;
  for (int k = 1; k <= 3000; ++k) {
    mekf.propagate(u, 0.01);
    truth = fly(d, u, truth, 0.01, 0.01);
    if (k % 100 == 0) {
      std::vector<Eigen::VectorXd> raw;
      for (const auto& p : kLandmarks) raw.push_back(nav::measure_landmark(truth, p));
      mekf.update(raw);
    }
    worst = std::max(worst, mekf.error_coordinates(truth).cwiseAbs().maxCoeff());
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(NavShift, RightShiftInput) {
  const Dynamics d = nav::dynamics();
  Eigen::VectorXd u(6);
  u << 0.1, -0.2, 0.3, 1.0, 0.5, 9.0;
  nav::NavState gs;
  gs.R = Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, 2).normalized()).toRotationMatrix();
  const GroupElement gamma = nav::embed(gs);
  std::mt19937_64 rng(5);
  const GroupElement x0 = random_state(rng);
  const GroupElement a = fly(d, u, x0, 2.0, 1e-3) * gamma;
  const GroupElement b = fly(d, nav::right_shift_input(u, gamma), x0 * gamma, 2.0, 1e-3);
  EXPECT_LT((a.matrix() - b.matrix()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(NavNoise, AdjointTransport) {
  std::mt19937_64 rng(6);
  const FilterState fs{random_state(rng), Eigen::MatrixXd::Identity(9, 9), 0.0};
  const Eigen::MatrixXd cov = Eigen::VectorXd::LinSpaced(9, 0.1, 0.9).asDiagonal();
  const Eigen::MatrixXd ad = lie::adjoint(fs.x);
  EXPECT_LT((nav::Q_hat(fs, cov) - ad * cov * ad.transpose()).cwiseAbs().maxCoeff(), 1e-14);
}
