#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "iekf/car.hpp"
#include "iekf/error_dynamics.hpp"
#include "iekf/nav.hpp"

using namespace iekf;

namespace {

GroupElement random_element(Group g, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Eigen::VectorXd v(algebra_dim(g));
  for (int i = 0; i < v.size(); ++i) v(i) = normal(rng);
  return lie::exp(TangentVector(g, v));
}

// f(chi) = nu chi + chi omega with fixed algebra elements.
Dynamics two_sided(Group g, const Eigen::MatrixXd& nu, const Eigen::MatrixXd& om) {
  return {g, 0, [nu, om](const Eigen::VectorXd&, const Eigen::MatrixXd& chi) -> Eigen::MatrixXd {
            return nu * chi + chi * om;
          }};
}

Eigen::MatrixXd hat(Group g, const Eigen::VectorXd& v) { return lie::hat(TangentVector(g, v)).m; }

GroupElement integrate(const Dynamics& d, const Eigen::VectorXd& u, GroupElement x, double t1, double dt) {
  auto rhs = [&](double, const Eigen::MatrixXd& m) -> Eigen::MatrixXd { return d.f(u, m); };
  for (int i = 0, n = step_count(t1, dt); i < n; ++i) {
    x = lie::project_to_group(d.group, rk4_step<Eigen::MatrixXd>(x.matrix(), i * dt, dt, rhs));
  }
  return x;
}

}  // namespace

TEST(InvariantError, EqualStatesGiveIdentity) {
  std::mt19937_64 rng(1);
  const GroupElement x = random_element(Group::SE2_3, rng);
  EXPECT_TRUE(left_error(x, x).matrix().isApprox(Eigen::MatrixXd::Identity(5, 5), 1e-14));
  EXPECT_TRUE(right_error(x, x).matrix().isApprox(Eigen::MatrixXd::Identity(5, 5), 1e-14));
}

TEST(InvariantError, LeftErrorIgnoresLeftMultiplication) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 50; ++i) {
    const GroupElement x = random_element(Group::SE2, rng);
    const GroupElement xh = random_element(Group::SE2, rng);
    const GroupElement gamma = random_element(Group::SE2, rng, 3.0);
    EXPECT_LT((left_error(gamma * x, gamma * xh).matrix() - left_error(x, xh).matrix()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((right_error(x * gamma, xh * gamma).matrix() - right_error(x, xh).matrix()).cwiseAbs().maxCoeff(),
              1e-12);
  }
}

TEST(InvariantError, PureTranslation) {
  const GroupElement x = lie::exp(TangentVector(Group::SE2, Eigen::Vector3d(0, 1, 0)));
  const GroupElement e = left_error(x, GroupElement::identity(Group::SE2));
  EXPECT_TRUE(e.matrix().isApprox(lie::exp(TangentVector(Group::SE2, Eigen::Vector3d(0, -1, 0))).matrix(), 1e-15));
}

TEST(GroupAffine, TwoSidedDynamicsHold) {
  std::mt19937_64 rng(3);
  const Eigen::MatrixXd nu = hat(Group::SE2_3, Eigen::VectorXd::Random(9));
  const Eigen::MatrixXd om = hat(Group::SE2_3, Eigen::VectorXd::Random(9));
  const AffineCheck c = check_group_affine(two_sided(Group::SE2_3, nu, om), 100, 1);
  EXPECT_TRUE(c.holds);
  EXPECT_LT(c.max_residual, 1e-9);
}

TEST(GroupAffine, ModelsHold) {
  EXPECT_LT(check_group_affine(car::dynamics(), 100, 2).max_residual, 1e-9);
  EXPECT_LT(check_group_affine(nav::dynamics(), 100, 2).max_residual, 1e-9);
}

TEST(GroupAffine, QuadraticDynamicsFail) {
  const Eigen::MatrixXd nu = hat(Group::SE2, Eigen::Vector3d(0.4, 1.0, -0.5));
  const Dynamics quad{Group::SE2, 0, [nu](const Eigen::VectorXd&, const Eigen::MatrixXd& chi) -> Eigen::MatrixXd {
                        return chi * nu * chi;
                      }};
  const auto samples = draw_affine_samples(Group::SE2, 0, 1, 4);
  EXPECT_GT(affine_residual(quad, samples[0]), 1e-3);
  EXPECT_FALSE(check_group_affine(quad, 100, 4).holds);
}

TEST(ErrorDynamics, VanishesAtIdentity) {
  const Eigen::Vector2d u(0.3, 1.2);
  for (ErrorSide side : {ErrorSide::Left, ErrorSide::Right}) {
    const ErrorFunction g = error_dynamics(car::dynamics(), side);
    EXPECT_TRUE(g(u, Eigen::Matrix3d::Identity()).isZero(0.0));
  }
}

TEST(ErrorDynamics, RightErrorOfLeftInvariantField) {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd nu = hat(Group::SE2, Eigen::Vector3d(0.4, 1.0, -0.5));
  const ErrorFunction g = error_dynamics(two_sided(Group::SE2, nu, Eigen::Matrix3d::Zero()), ErrorSide::Right);
  const Eigen::MatrixXd eta = random_element(Group::SE2, rng).matrix();
  EXPECT_LT((g(Eigen::VectorXd(), eta) - (nu * eta - eta * nu)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ErrorDynamics, MatchesDualTrajectoryDerivative) {
  std::mt19937_64 rng(6);
  const Dynamics d = car::dynamics();
  const Eigen::Vector2d u(0.3, 1.2);
  const GroupElement x = random_element(Group::SE2, rng);
  const GroupElement xh = random_element(Group::SE2, rng);
  const double h = 1e-4;
  // Both trajectories are exact arcs, so eta is known at any time.
  auto flow = [&](const GroupElement& g, double t) {
    return g * lie::exp(TangentVector(Group::SE2, t * car::twist(u)));
  };
  const Eigen::MatrixXd plus = left_error(flow(x, h), flow(xh, h)).matrix();
  const Eigen::MatrixXd minus = left_error(flow(x, -h), flow(xh, -h)).matrix();
  const Eigen::MatrixXd fd = (plus - minus) / (2 * h);
  const Eigen::MatrixXd g = error_dynamics(d, ErrorSide::Left)(u, left_error(x, xh).matrix());
  EXPECT_LT((fd - g).cwiseAbs().maxCoeff(), 1e-8);
  // RK4 reproduces the arcs.
  EXPECT_LT((integrate(d, u, x, 0.5, 1e-3).matrix() - flow(x, 0.5).matrix()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Linearize, CarLeftMatrix) {
  const double u = 0.3;
  const double v = 2.0;
  Eigen::Matrix3d expect;
  expect << 0, 0, 0, 0, 0, u * v, v, -u * v, 0;
  EXPECT_EQ(car::A_left(Eigen::Vector2d(u, v)), Eigen::MatrixXd(expect));
  EXPECT_LT((numeric_A(car::dynamics(), ErrorSide::Left, Eigen::Vector2d(u, v)) - expect).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_NO_THROW(linearize(car::dynamics(), ErrorSide::Left, car::A_left));
}

TEST(Linearize, NavRightMatrix) {
  const Eigen::Vector3d g(0, 0, -9.81);
  Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(9, 9);
  expect.block<3, 3>(3, 0) = lie::skew(g);
  expect.block<3, 3>(6, 3).setIdentity();
  EXPECT_EQ(nav::A_right(g), expect);
  Eigen::VectorXd u(6);
  u << 0.1, -0.2, 0.3, 1.0, 0.5, 9.0;
  EXPECT_LT((numeric_A(nav::dynamics(g), ErrorSide::Right, u) - expect).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Linearize, ZeroFieldGivesZero) {
  const Dynamics zero{Group::SE2_3, 0,
                      [](const Eigen::VectorXd&, const Eigen::MatrixXd& m) -> Eigen::MatrixXd {
                        return Eigen::MatrixXd::Zero(m.rows(), m.cols());
                      }};
  EXPECT_TRUE(numeric_A(zero, ErrorSide::Left, Eigen::VectorXd()).isZero(0.0));
}

TEST(Linearize, WrongAnalyticMatrixIsRejected) {
  auto wrong = [](const Eigen::VectorXd& u) -> Eigen::MatrixXd { return -car::A_left(u); };
  EXPECT_THROW(linearize(car::dynamics(), ErrorSide::Left, wrong), ModelInconsistency);
}

TEST(ExactErrorFlow, IdentityIsEquilibrium) {
  const GroupElement e = propagate_error_exact(car::dynamics(), ErrorSide::Left, GroupElement::identity(Group::SE2),
                                               constant_input(Eigen::Vector2d(0.3, 1.0)), 0.0, 2.0, 1e-2);
  EXPECT_LT((e.matrix() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(ExactErrorFlow, MatchesDualIntegration) {
  std::mt19937_64 rng(7);
  const Dynamics d = nav::dynamics();
  Eigen::VectorXd u(6);
  u << 0.1, -0.2, 0.3, 1.0, 0.5, 9.0;
  const GroupElement x = random_element(Group::SE2_3, rng);
  const GroupElement xh = random_element(Group::SE2_3, rng, 0.3) * x;
  const GroupElement eta = propagate_error_exact(d, ErrorSide::Right, right_error(x, xh), constant_input(u), 0.0,
                                                 2.0, 1e-3);
  const GroupElement ref = right_error(integrate(d, u, x, 2.0, 1e-3), integrate(d, u, xh, 2.0, 1e-3));
  EXPECT_LT((eta.matrix() - ref.matrix()).cwiseAbs().maxCoeff(), 1e-7);
}

TEST(ExactErrorFlow, CarAtRestKeepsError) {
  std::mt19937_64 rng(8);
  const GroupElement e0 = random_element(Group::SE2, rng);
  const GroupElement e = propagate_error_exact(car::dynamics(), ErrorSide::Left, e0,
                                               constant_input(Eigen::Vector2d::Zero()), 0.0, 1.0, 1e-2);
  EXPECT_EQ(e.matrix(), e0.matrix());
}

TEST(LogLinear, ZeroStaysZero) {
  const auto lin = linearize(car::dynamics(), ErrorSide::Left, car::A_left);
  const TangentVector xi = propagate_log_linear(lin, TangentVector::zero(Group::SE2),
                                                constant_input(Eigen::Vector2d(0.3, 1.0)), 0.0, 1.0, 1e-2);
  EXPECT_TRUE(xi.v.isZero(0.0));
  const LogLinearReport r = verify_log_linear(car::dynamics(), lin, TangentVector::zero(Group::SE2),
                                              constant_input(Eigen::Vector2d(0.3, 1.0)), 0.0, 1.0, 1e-2);
  EXPECT_EQ(r.max_deviation, 0.0);
}

TEST(LogLinear, ConstantSystemMatchesMatrixExponential) {
  const auto lin = linearize(car::dynamics(), ErrorSide::Left, car::A_left);
  const Eigen::Vector2d u(0.3, 1.0);
  const Eigen::Vector3d xi0(0.2, -0.4, 0.7);
  const TangentVector xi = propagate_log_linear(lin, TangentVector(Group::SE2, xi0), constant_input(u), 0.0, 2.0, 1e-3);
  // A is nilpotent-free here; use a long power series for expm(2A).
  const Eigen::Matrix3d A = car::A_left(u) * 2.0;
  Eigen::Matrix3d E = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d term = Eigen::Matrix3d::Identity();
  for (int k = 1; k < 40; ++k) {
    term = term * A / k;
    E += term;
  }
  EXPECT_LT((xi.v - E * xi0).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(LogLinear, CarSinusoidalInputs) {
  const Dynamics d = car::dynamics();
  const auto lin = linearize(d, ErrorSide::Left, car::A_left);
  const InputSignal u = [](double t) { return Eigen::VectorXd(Eigen::Vector2d(0.3 * std::sin(t), 1.0 + 0.5 * std::cos(2 * t))); };
  const TangentVector xi0(Group::SE2, Eigen::Vector3d(0.6, -0.5, 0.62).normalized());
  const LogLinearReport r = verify_log_linear(d, lin, xi0, u, 0.0, 10.0, 1e-3);
  EXPECT_TRUE(r.feasible);
  EXPECT_LE(r.max_deviation, 1e-6);
}

TEST(LogLinear, NavCircle) {
  const Dynamics d = nav::dynamics();
  const Eigen::MatrixXd A = nav::A_right();
  const LinearizedDynamics lin{ErrorSide::Right, Group::SE2_3, [A](const Eigen::VectorXd&) { return A; }};
  Eigen::VectorXd u(6);
  u << 0, 0, 0.2, 0, 0.2, 9.81;
  Eigen::VectorXd v(9);
  v << 0.3, -0.2, 0.4, 0.1, 0.5, -0.2, 0.3, 0.4, -0.5;
  const LogLinearReport r = verify_log_linear(d, lin, TangentVector(Group::SE2_3, v.normalized()), constant_input(u),
                                              0.0, 10.0, 1e-3);
  EXPECT_TRUE(r.feasible);
  EXPECT_LE(r.max_deviation, 1e-6);
}

TEST(FlowHomomorphism, IdentityAndRandomPairs) {
  std::mt19937_64 rng(9);
  const Dynamics d = car::dynamics();
  const InputSignal u = constant_input(Eigen::Vector2d(0.3, 1.0));
  const GroupElement a = random_element(Group::SE2, rng);
  const GroupElement b = random_element(Group::SE2, rng);
  EXPECT_LT(check_flow_homomorphism(d, ErrorSide::Left, a, GroupElement::identity(Group::SE2), u, 1.0, 1e-3), 1e-9);
  EXPECT_LT(check_flow_homomorphism(d, ErrorSide::Left, a, b, u, 1.0, 1e-3), 1e-7);
}

TEST(FlowHomomorphism, Powers) {
  std::mt19937_64 rng(10);
  const Dynamics d = car::dynamics();
  const InputSignal u = constant_input(Eigen::Vector2d(0.3, 1.0));
  const GroupElement a = random_element(Group::SE2, rng, 0.4);
  const GroupElement a3 = a * a * a;
  const GroupElement pa = propagate_error_exact(d, ErrorSide::Left, a, u, 0.0, 1.0, 1e-3);
  const GroupElement pa3 = propagate_error_exact(d, ErrorSide::Left, a3, u, 0.0, 1.0, 1e-3);
  EXPECT_LT((pa3.matrix() - (pa * pa * pa).matrix()).cwiseAbs().maxCoeff(), 1e-7);
}

TEST(IntroExample, ZeroAtReference) {
  EXPECT_TRUE(intro_example_xi(0.4, Eigen::Vector2d(1, 2), 0.4, Eigen::Vector2d(1, 2)).v.isZero(0.0));
}

TEST(IntroExample, EqualsLogOfLeftError) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ang(-3.0, 3.0);
  std::normal_distribution<double> pos(0.0, 3.0);
  for (int i = 0; i < 100; ++i) {
    const double th = ang(rng);
    const double thb = ang(rng);
    if (std::abs(std::remainder(th - thb, 2 * std::numbers::pi)) > 3.1) continue;
    const Eigen::Vector2d X(pos(rng), pos(rng));
    const Eigen::Vector2d Xb(pos(rng), pos(rng));
    const Eigen::VectorXd xi = intro_example_xi(th, X, thb, Xb).v;
    const Eigen::VectorXd ref = lie::log(left_error(car::embed({thb, Xb}), car::embed({th, X}))).v;
    EXPECT_LT((xi - ref).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(IntroExample, DerivativeObeysLinearSystem) {
  // Two cars driven by the same (omega, u); xi must satisfy d/dt xi = A xi.
  const double omega = 0.4;
  const double speed = 1.5;
  auto state = [&](double th0, const Eigen::Vector2d& x0, double t) {
    const GroupElement g =
        car::embed({th0, x0}) * lie::exp(TangentVector(Group::SE2, Eigen::Vector3d(omega * t, speed * t, 0)));
    const car::CarState s = car::extract(g);
    return std::make_pair(th0 + omega * t, s.x);
  };
  const double h = 1e-5;
  for (double t : {0.0, 0.7, 2.3}) {
    auto xi_at = [&](double s) {
      const auto [th, X] = state(0.5, Eigen::Vector2d(1.0, -2.0), s);
      const auto [thb, Xb] = state(0.1, Eigen::Vector2d(0.3, 0.4), s);
      return intro_example_xi(th, X, thb, Xb).v;
    };
    const Eigen::VectorXd fd = (xi_at(t + h) - xi_at(t - h)) / (2 * h);
    EXPECT_LT((fd - intro_example_A(omega, speed) * xi_at(t)).cwiseAbs().maxCoeff(), 1e-6);
  }
}
