#include "iekf/error_dynamics.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace iekf {
namespace {

constexpr double kJacobianStep = 1e-6;
constexpr double kAnalyticTolerance = 1e-5;

Eigen::MatrixXd identity_matrix(Group g) {
  const int n = matrix_size(g);
  return Eigen::MatrixXd::Identity(n, n);
}

TangentVector random_tangent(Group g, double max_norm, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> radius(0.0, max_norm);
  Eigen::VectorXd v(algebra_dim(g));
  for (int i = 0; i < v.size(); ++i) v(i) = normal(rng);
  const double n = v.norm();
  if (n > 0.0) v *= radius(rng) / n;
  return TangentVector(g, v);
}

GroupElement rk4_group_step(Group g, const ErrorFunction& fn, const InputSignal& u, const GroupElement& x, double t,
                            double dt) {
  auto rhs = [&](double s, const Eigen::MatrixXd& m) -> Eigen::MatrixXd { return fn(u(s), m); };
  const Eigen::MatrixXd next = rk4_step<Eigen::MatrixXd>(x.matrix(), t, dt, rhs);
  if (!next.allFinite()) throw NumericalFailure("non-finite error state during integration");
  return lie::project_to_group(g, next);
}

}  // namespace

GroupElement left_error(const GroupElement& chi, const GroupElement& chi_hat) { return chi.inverse() * chi_hat; }

GroupElement right_error(const GroupElement& chi, const GroupElement& chi_hat) { return chi_hat * chi.inverse(); }

std::vector<AffineSample> draw_affine_samples(Group g, int input_dim, int count, std::uint64_t seed) {
  if (count < 1) throw InvalidArgument("sample count must be at least 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  std::vector<AffineSample> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    Eigen::VectorXd u(input_dim);
    for (int k = 0; k < input_dim; ++k) u(k) = uni(rng);
    GroupElement a = lie::exp(random_tangent(g, 2.0, rng));
    GroupElement b = lie::exp(random_tangent(g, 2.0, rng));
    out.push_back({std::move(u), std::move(a), std::move(b)});
  }
  return out;
}

double affine_residual(const Dynamics& d, const AffineSample& s) {
  const Eigen::MatrixXd& a = s.a.matrix();
  const Eigen::MatrixXd& b = s.b.matrix();
  const Eigen::MatrixXd f_ab = d.f(s.u, a * b);
  const Eigen::MatrixXd fa_b = d.f(s.u, a) * b;
  const Eigen::MatrixXd a_fb = a * d.f(s.u, b);
  const Eigen::MatrixXd a_fi_b = a * d.f(s.u, identity_matrix(d.group)) * b;
  const double scale = std::max(1.0, f_ab.norm() + fa_b.norm() + a_fb.norm() + a_fi_b.norm());
  return (f_ab - fa_b - a_fb + a_fi_b).norm() / scale;
}

AffineCheck check_group_affine(const Dynamics& d, int sample_count, std::uint64_t seed) {
  double worst = 0.0;
  for (const auto& s : draw_affine_samples(d.group, d.input_dim, sample_count, seed)) {
    worst = std::max(worst, affine_residual(d, s));
  }
  return {worst < 1e-9, worst};
}

ErrorFunction error_dynamics(const Dynamics& d, ErrorSide side) {
  const Eigen::MatrixXd id = identity_matrix(d.group);
  if (side == ErrorSide::Left) {
    return [f = d.f, id](const Eigen::VectorXd& u, const Eigen::MatrixXd& eta) -> Eigen::MatrixXd {
      return f(u, eta) - f(u, id) * eta;
    };
  }
  return [f = d.f, id](const Eigen::VectorXd& u, const Eigen::MatrixXd& eta) -> Eigen::MatrixXd {
    return f(u, eta) - eta * f(u, id);
  };
}

Eigen::MatrixXd numeric_A(const Dynamics& d, ErrorSide side, const Eigen::VectorXd& u) {
  const ErrorFunction g = error_dynamics(d, side);
  const int k = algebra_dim(d.group);
  Eigen::MatrixXd A(k, k);
  for (int j = 0; j < k; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(k);
    e(j) = kJacobianStep;
    const Eigen::MatrixXd plus = g(u, lie::exp(TangentVector(d.group, e)).matrix());
    const Eigen::MatrixXd minus = g(u, lie::exp(TangentVector(d.group, -e)).matrix());
    // The O(h^2) part of the quotient is not in the algebra, hence the loose vee tolerance.
    A.col(j) = lie::vee({d.group, (plus - minus) / (2.0 * kJacobianStep)}, 1e-4).v;
  }
  return A;
}

LinearizedDynamics linearize(const Dynamics& d, ErrorSide side) {
  return {side, d.group, [d, side](const Eigen::VectorXd& u) { return numeric_A(d, side, u); }};
}

LinearizedDynamics linearize(const Dynamics& d, ErrorSide side,
                             std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> analytic, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd u(d.input_dim);
    for (int i = 0; i < u.size(); ++i) u(i) = trial == 0 ? 0.0 : uni(rng);
    const Eigen::MatrixXd num = numeric_A(d, side, u);
    const Eigen::MatrixXd ana = analytic(u);
    if (ana.rows() != num.rows() || ana.cols() != num.cols()) {
      throw ModelInconsistency("analytic A has the wrong shape");
    }
    const double diff = (ana - num).cwiseAbs().maxCoeff();
    if (!(diff <= kAnalyticTolerance)) {
      throw ModelInconsistency("analytic A differs from the numeric Jacobian by " + std::to_string(diff));
    }
  }
  return {side, d.group, std::move(analytic)};
}

GroupElement propagate_error_exact(const Dynamics& d, ErrorSide side, const GroupElement& eta0,
                                   const InputSignal& u, double t0, double t1, double dt) {
  const int n = step_count(t1 - t0, dt);
  const ErrorFunction g = error_dynamics(d, side);
  GroupElement eta = eta0;
  for (int i = 0; i < n; ++i) eta = rk4_group_step(d.group, g, u, eta, t0 + i * dt, dt);
  return eta;
}

TangentVector propagate_log_linear(const LinearizedDynamics& lin, const TangentVector& xi0, const InputSignal& u,
                                   double t0, double t1, double dt) {
  const int n = step_count(t1 - t0, dt);
  Eigen::VectorXd xi = xi0.v;
  auto rhs = [&](double s, const Eigen::VectorXd& x) -> Eigen::VectorXd { return lin.A(u(s)) * x; };
  for (int i = 0; i < n; ++i) xi = rk4_step<Eigen::VectorXd>(xi, t0 + i * dt, dt, rhs);
  return TangentVector(lin.group, xi);
}

LogLinearReport verify_log_linear(const Dynamics& d, const LinearizedDynamics& lin, const TangentVector& xi0,
                                  const InputSignal& u, double t0, double t1, double dt) {
  const int n = step_count(t1 - t0, dt);
  const ErrorFunction g = error_dynamics(d, lin.side);
  auto rhs = [&](double s, const Eigen::VectorXd& x) -> Eigen::VectorXd { return lin.A(u(s)) * x; };
  GroupElement eta = lie::exp(xi0);
  Eigen::VectorXd xi = xi0.v;
  double worst = 0.0;
  try {
    for (int i = 0; i < n; ++i) {
      const double t = t0 + i * dt;
      eta = rk4_group_step(d.group, g, u, eta, t, dt);
      xi = rk4_step<Eigen::VectorXd>(xi, t, dt, rhs);
      worst = std::max(worst, (lie::log(eta).v - xi).norm());
    }
  } catch (const BranchCutError&) {
    return {worst, false};
  }
  return {worst, true};
}

double check_flow_homomorphism(const Dynamics& d, ErrorSide side, const GroupElement& eta0,
                               const GroupElement& eta0_prime, const InputSignal& u, double t, double dt) {
  const GroupElement joint = propagate_error_exact(d, side, eta0 * eta0_prime, u, 0.0, t, dt);
  const GroupElement a = propagate_error_exact(d, side, eta0, u, 0.0, t, dt);
  const GroupElement b = propagate_error_exact(d, side, eta0_prime, u, 0.0, t, dt);
  return (joint.matrix() - (a * b).matrix()).norm();
}

TangentVector intro_example_xi(double theta, const Eigen::Vector2d& X, double theta_bar,
                               const Eigen::Vector2d& X_bar) {
  // Principal heading difference, as the logarithm returns it.
  const double s = std::remainder(theta - theta_bar, 2.0 * std::numbers::pi);
  // (s/2) a(s) = (s/2) cot(s/2), which tends to 1 as s -> 0.
  double c1;
  if (std::abs(s) < kTaylorThreshold) {
    c1 = 1.0 - s * s / 12.0 - s * s * s * s / 720.0;
  } else {
    c1 = 0.5 * s * std::cos(0.5 * s) / std::sin(0.5 * s);
  }
  const double c2 = 0.5 * s;
  Eigen::Matrix2d J;
  J << 0.0, -1.0, 1.0, 0.0;
  Eigen::Matrix2d R_neg;
  R_neg << std::cos(theta_bar), std::sin(theta_bar), -std::sin(theta_bar), std::cos(theta_bar);
  const Eigen::Vector2d dx = (c1 * Eigen::Matrix2d::Identity() - c2 * J) * R_neg * (X - X_bar);
  Eigen::Vector3d out(s, dx.x(), dx.y());
  return TangentVector(Group::SE2, out);
}

Eigen::Matrix3d intro_example_A(double omega, double u) {
  Eigen::Matrix3d A;
  A << 0.0, 0.0, 0.0, 0.0, 0.0, omega, u, -omega, 0.0;
  return A;
}

}  // namespace iekf
