#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "iekf/car.hpp"
#include "iekf/filter.hpp"
#include "iekf/nav.hpp"

namespace iekf {

/// Common face of the invariant filters and the conventional baselines, as
/// driven by the simulation loop. Inputs are held constant over each step.
class Estimator {
 public:
  virtual ~Estimator() = default;

  virtual std::string name() const = 0;
  virtual void propagate(const Eigen::VectorXd& u, double dt) = 0;
  /// Raw measurements, one vector per observed quantity (GPS fix or landmark).
  virtual void update(const std::vector<Eigen::VectorXd>& raw) = 0;
  virtual GroupElement estimate() const = 0;
  virtual const Eigen::MatrixXd& covariance() const = 0;
  /// Estimation error in the filter's own coordinates; its covariance is P.
  virtual Eigen::VectorXd error_coordinates(const GroupElement& truth) const = 0;

  double last_gain_norm() const { return gain_norm_; }

 protected:
  double gain_norm_ = 0.0;
};

using LiftFunction = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

class InvariantFilter : public Estimator {
 public:
  InvariantFilter(std::string name, FilterState initial, Dynamics dynamics, LinearizedDynamics lin,
                  NoiseSchedule noise, ObservationModel obs, LiftFunction lift,
                  CovarianceUpdate mode = CovarianceUpdate::Standard);

  std::string name() const override { return name_; }
  void propagate(const Eigen::VectorXd& u, double dt) override;
  void update(const std::vector<Eigen::VectorXd>& raw) override;
  GroupElement estimate() const override { return state_.x; }
  const Eigen::MatrixXd& covariance() const override { return state_.P; }
  /// log of the invariant error on the filter's side.
  Eigen::VectorXd error_coordinates(const GroupElement& truth) const override;

  const FilterState& state() const { return state_; }

 private:
  std::string name_;
  FilterState state_;
  Dynamics dynamics_;
  LinearizedDynamics lin_;
  NoiseSchedule noise_;
  ObservationModel obs_;
  LiftFunction lift_;
  CovarianceUpdate mode_;
};

/// Conventional EKF on (theta, x1, x2) with additive error (truth - estimate).
class CarEkf : public Estimator {
 public:
  /// Empty landmark list selects GPS.
  CarEkf(const GroupElement& x0, Eigen::Matrix3d P0, car::NoiseSpec spec, std::vector<Eigen::Vector2d> landmarks,
         CovarianceUpdate mode = CovarianceUpdate::Standard);

  std::string name() const override { return "ekf"; }
  void propagate(const Eigen::VectorXd& u, double dt) override;
  void update(const std::vector<Eigen::VectorXd>& raw) override;
  GroupElement estimate() const override;
  const Eigen::MatrixXd& covariance() const override { return P_; }
  Eigen::VectorXd error_coordinates(const GroupElement& truth) const override;

 private:
  double theta_;
  Eigen::Vector2d x_;
  Eigen::MatrixXd P_;
  car::NoiseSpec spec_;
  std::vector<Eigen::Vector2d> landmarks_;
  CovarianceUpdate mode_;
};

/// Multiplicative EKF with error (zeta, v_hat - v, x_hat - x), R_hat R^T = exp(zeta).
class NavMekf : public Estimator {
 public:
  NavMekf(const GroupElement& x0, Eigen::MatrixXd P0, Eigen::MatrixXd Q, std::vector<Eigen::Vector3d> landmarks,
          std::vector<Eigen::Matrix3d> covs, Eigen::Vector3d gravity,
          CovarianceUpdate mode = CovarianceUpdate::Standard);

  std::string name() const override { return "mekf"; }
  void propagate(const Eigen::VectorXd& u, double dt) override;
  void update(const std::vector<Eigen::VectorXd>& raw) override;
  GroupElement estimate() const override { return x_; }
  const Eigen::MatrixXd& covariance() const override { return P_; }
  Eigen::VectorXd error_coordinates(const GroupElement& truth) const override;

 private:
  GroupElement x_;
  Eigen::MatrixXd P_;
  Eigen::MatrixXd Q_;
  std::vector<Eigen::Vector3d> landmarks_;
  std::vector<Eigen::Matrix3d> covs_;
  Dynamics dynamics_;
  CovarianceUpdate mode_;
};

}  // namespace iekf
