#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "iekf/integrate.hpp"
#include "iekf/lie.hpp"

namespace iekf {

enum class ErrorSide { Left, Right };

/// Noise-free dynamics d/dt chi = f(u, chi).
///
/// f takes a raw matrix so RK4 can evaluate it at intermediate stages that sit
/// slightly off the group.
struct Dynamics {
  Group group;
  int input_dim;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd& u, const Eigen::MatrixXd& chi)> f;
};

/// chi^-1 chi_hat
GroupElement left_error(const GroupElement& chi, const GroupElement& chi_hat);
/// chi_hat chi^-1
GroupElement right_error(const GroupElement& chi, const GroupElement& chi_hat);

struct AffineCheck {
  bool holds;
  double max_residual;
};

struct AffineSample {
  Eigen::VectorXd u;
  GroupElement a;
  GroupElement b;
};

/// Random triples: u uniform in [-2, 2]^m, a and b exponentials of tangent
/// vectors with norm at most 2.
std::vector<AffineSample> draw_affine_samples(Group g, int input_dim, int count, std::uint64_t seed);

/// Relative residual of f(ab) = f(a)b + a f(b) - a f(I) b for one triple.
double affine_residual(const Dynamics& d, const AffineSample& s);

AffineCheck check_group_affine(const Dynamics& d, int sample_count, std::uint64_t seed);

using ErrorFunction = std::function<Eigen::MatrixXd(const Eigen::VectorXd& u, const Eigen::MatrixXd& eta)>;

/// g^L(eta) = f(eta) - f(I) eta, or g^R(eta) = f(eta) - eta f(I).
ErrorFunction error_dynamics(const Dynamics& d, ErrorSide side);

struct LinearizedDynamics {
  ErrorSide side;
  Group group;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd& u)> A;
};

/// Central-difference Jacobian of xi -> vee(g_u(exp(xi))) at 0, h = 1e-6.
Eigen::MatrixXd numeric_A(const Dynamics& d, ErrorSide side, const Eigen::VectorXd& u);

LinearizedDynamics linearize(const Dynamics& d, ErrorSide side);

/// Uses the analytic A after checking it against numeric_A at a handful of
/// random inputs; throws ModelInconsistency on any entry differing by > 1e-5.
LinearizedDynamics linearize(const Dynamics& d, ErrorSide side,
                             std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> analytic,
                             std::uint64_t seed = 7);

/// RK4 on d/dt eta = g_u(eta) with projection onto the group after each step.
GroupElement propagate_error_exact(const Dynamics& d, ErrorSide side, const GroupElement& eta0,
                                   const InputSignal& u, double t0, double t1, double dt);

/// RK4 on d/dt xi = A(u_t) xi.
TangentVector propagate_log_linear(const LinearizedDynamics& lin, const TangentVector& xi0, const InputSignal& u,
                                   double t0, double t1, double dt);

struct LogLinearReport {
  double max_deviation;
  /// False when the error's rotation reached the logarithm branch cut.
  bool feasible;
};

/// Integrates eta from exp(xi0) and xi from xi0 side by side and returns the
/// largest |log(eta_t) - xi_t| over the step grid.
LogLinearReport verify_log_linear(const Dynamics& d, const LinearizedDynamics& lin, const TangentVector& xi0,
                                  const InputSignal& u, double t0, double t1, double dt);

/// |Phi_t(eta0 eta0') - Phi_t(eta0) Phi_t(eta0')|_F for the error flow.
double check_flow_homomorphism(const Dynamics& d, ErrorSide side, const GroupElement& eta0,
                               const GroupElement& eta0_prime, const InputSignal& u, double t, double dt);

/// Closed-form xi of the introductory car example, reference trajectory
/// (theta_bar, X_bar). Equals vee(log(left_error(ref, other))).
TangentVector intro_example_xi(double theta, const Eigen::Vector2d& X, double theta_bar, const Eigen::Vector2d& X_bar);

/// Linear system obeyed by intro_example_xi for yaw rate omega and speed u.
Eigen::Matrix3d intro_example_A(double omega, double u);

}  // namespace iekf
