#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "iekf/filter.hpp"
#include "iekf/observability.hpp"
#include "iekf/sim.hpp"

namespace iekf {

// Central-difference Jacobians (step 1e-6) built from measurement functions
// and flows only, as references for the hand-derived matrices.

/// -d z / d xi at xi = 0 for noise-free measurements of the truth implied by
/// xi: x_hat exp(-xi) for a left error, exp(-xi) x_hat for a right error.
Eigen::MatrixXd numeric_H(const FilterState& fs, const ObservationModel& obs);

/// Conventional car EKF, error e = truth - estimate.
Eigen::Matrix3d numeric_ekf_F(double theta_hat, const Eigen::Vector2d& x_hat, const Eigen::VectorXd& input);
/// Landmarks empty selects GPS.
Eigen::MatrixXd numeric_ekf_H(double theta_hat, const Eigen::Vector2d& x_hat,
                              const std::vector<Eigen::Vector2d>& landmarks);

/// MEKF with the truth recovered from an error by nav::mekf_correct.
Eigen::MatrixXd numeric_mekf_F(const nav::NavState& est, const Eigen::VectorXd& input, const Eigen::Vector3d& gravity);
Eigen::MatrixXd numeric_mekf_H(const nav::NavState& est, const std::vector<Eigen::Vector3d>& landmarks);

struct CheckRow {
  std::string name;
  bool passed;
  double value;
  double tolerance;
};

/// Property checks for one model: group affinity, log-linearity, analytic
/// against numeric Jacobians, and the rank test. landmarks overrides the
/// default layout of the rank test (2-vectors for the car, 3 for nav).
std::vector<CheckRow> model_checks(ModelKind model, const std::optional<std::vector<Eigen::VectorXd>>& landmarks = {});

std::string format_checks(const std::vector<CheckRow>& rows);

/// The linear system seen by the scenario's invariant filter along the
/// noise-free ground truth.
LinearSystemSignals linear_system_signals(const Scenario& sc);

}  // namespace iekf
