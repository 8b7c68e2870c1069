#pragma once

#include <Eigen/Dense>
#include <vector>

#include "iekf/error_dynamics.hpp"
#include "iekf/filter.hpp"

// Simplified car on SE(2). Input vector is (u, v): v the odometer speed and
// u the steering coefficient, so that d/dt theta = u v.
namespace iekf::car {

struct CarState {
  double theta = 0.0;
  Eigen::Vector2d x = Eigen::Vector2d::Zero();
};

struct NoiseSpec {
  double q_theta = 0.0;
  double q_l = 0.0;
  double q_tr = 0.0;
  Eigen::Matrix2d gps_cov = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d landmark_cov = Eigen::Matrix2d::Identity();
};

Eigen::Matrix2d rot(double theta);

GroupElement embed(const CarState& s);
/// Heading comes back wrapped to (-pi, pi].
CarState extract(const GroupElement& g);

/// Body-frame twist (u v, v, 0) driving chi.
Eigen::Vector3d twist(const Eigen::VectorXd& input);

/// f(chi) = chi hat(twist).
Dynamics dynamics();

/// Left-error A for input (u, v); the right-error A is identically zero.
Eigen::MatrixXd A_left(const Eigen::VectorXd& input);
Eigen::MatrixXd A_right(const Eigen::VectorXd& input);

/// Process noise covariance in (theta, longitudinal, transversal) coordinates.
Eigen::Matrix3d process_cov(const NoiseSpec& spec);

// GPS: Y = chi (0,0,1) + (V, 0). Left-invariant.
ObservationModel gps_observation(const NoiseSpec& spec);
Eigen::Matrix<double, 2, 3> gps_H();
Eigen::VectorXd lift_gps(const Eigen::Vector2d& y);
NoiseSchedule gps_noise(const NoiseSpec& spec);

// Landmarks: y_k = R^T (x - p_k), i.e. Y = chi^-1 (-(p_k; 1)) + (V; 0). Right-invariant.
ObservationModel landmark_observation(const std::vector<Eigen::Vector2d>& landmarks, const NoiseSpec& spec);
Eigen::MatrixXd landmark_H(const std::vector<Eigen::Vector2d>& landmarks);
Eigen::VectorXd lift_landmark(const Eigen::Vector2d& y);
NoiseSchedule landmark_noise(const NoiseSpec& spec);

/// Noise-free raw measurements from a true state.
Eigen::Vector2d measure_gps(const GroupElement& chi);
Eigen::Vector2d measure_landmark(const GroupElement& chi, const Eigen::Vector2d& p);

/// Input producing chi Gamma from chi. Only rotations by 0 or pi keep the
/// transversal velocity zero; anything else throws InvalidArgument.
Eigen::VectorXd right_shift_input(const Eigen::VectorXd& input, const GroupElement& gamma);

// Conventional EKF on (theta, x1, x2) with error (truth - estimate).
Eigen::Matrix3d ekf_F(double theta_hat, double v);
Eigen::Matrix<double, 2, 3> ekf_gps_H();
/// Jacobian of y = R(theta)^T (x - p) at the estimate.
Eigen::Matrix<double, 2, 3> ekf_landmark_H(double theta_hat, const Eigen::Vector2d& x_hat, const Eigen::Vector2d& p);
/// Maps (w_theta, w_l, w_tr) into (theta, x) rates.
Eigen::Matrix3d ekf_noise_gain(double theta_hat);

}  // namespace iekf::car
