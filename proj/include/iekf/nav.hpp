#pragma once

#include <Eigen/Dense>
#include <vector>

#include "iekf/error_dynamics.hpp"
#include "iekf/filter.hpp"

// Flat-earth inertial navigation on SE_2(3). Input vector is (omega, a):
// gyro rate and specific force, both in the body frame.
namespace iekf::nav {

inline const Eigen::Vector3d kDefaultGravity(0.0, 0.0, -9.81);

struct NavState {
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d v = Eigen::Vector3d::Zero();
  Eigen::Vector3d x = Eigen::Vector3d::Zero();
};

GroupElement embed(const NavState& s);
NavState extract(const GroupElement& g);

/// f(chi) = [[R omega_x, g + R a, v], [0], [0]].
Dynamics dynamics(const Eigen::Vector3d& gravity = kDefaultGravity);

/// Constant right-error A = [[0,0,0],[g_x,0,0],[0,I,0]].
Eigen::MatrixXd A_right(const Eigen::Vector3d& gravity = kDefaultGravity);

// Landmarks: y_k = R^T (p_k - x) = chi^-1 (p_k, 0, 1) restricted to 3 rows.
ObservationModel landmark_observation(const std::vector<Eigen::Vector3d>& landmarks,
                                      const std::vector<Eigen::Matrix3d>& covs);
Eigen::MatrixXd landmark_H(const std::vector<Eigen::Vector3d>& landmarks);
Eigen::VectorXd lift_landmark(const Eigen::Vector3d& y);
Eigen::Vector3d measure_landmark(const GroupElement& chi, const Eigen::Vector3d& p);

/// Ad_x Cov Ad_x^T with Cov in (gyro, accelerometer, position) tangent order.
Eigen::MatrixXd Q_hat(const FilterState& fs, const Eigen::MatrixXd& cov);
NoiseSchedule landmark_noise(const Eigen::MatrixXd& cov);

/// Input producing chi Gamma from chi for a pure rotation Gamma.
Eigen::VectorXd right_shift_input(const Eigen::VectorXd& input, const GroupElement& gamma);

/// True when the landmarks span at least a plane.
bool non_collinear(const std::vector<Eigen::Vector3d>& landmarks);

// Multiplicative EKF. Error (zeta, v_hat - v, x_hat - x) with R_hat R^T = exp(zeta).
Eigen::MatrixXd mekf_F(const Eigen::Matrix3d& R_hat, const Eigen::Vector3d& a);
Eigen::MatrixXd mekf_H(const Eigen::Matrix3d& R_hat, const Eigen::Vector3d& x_hat,
                       const std::vector<Eigen::Vector3d>& landmarks);
Eigen::MatrixXd mekf_noise_gain(const Eigen::Matrix3d& R_hat);
/// Applies an estimated error: R <- exp(-zeta) R, v <- v - e_v, x <- x - e_x.
NavState mekf_correct(const NavState& s, const Eigen::VectorXd& eps);
/// Error coordinates of an estimate relative to the truth.
Eigen::VectorXd mekf_error(const NavState& truth, const NavState& estimate);

}  // namespace iekf::nav
