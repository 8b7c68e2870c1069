#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "iekf/error_dynamics.hpp"
#include "iekf/lie.hpp"

namespace iekf {

struct FilterState {
  GroupElement x;
  Eigen::MatrixXd P;
  double t = 0.0;
};

/// Invariant output family Y^i = chi d^i (Left) or Y^i = chi^-1 d^i (Right).
///
/// Measurements are handed over already lifted to N-vectors. `reduce` keeps
/// the r informative rows of each N-vector block. H follows the convention
/// z = -H xi to first order, so that the update xi+ = xi + L z reads
/// xi+ = (I - L H) xi as in the linear case.
struct ObservationModel {
  ErrorSide side;
  std::vector<Eigen::VectorXd> d_list;
  Eigen::MatrixXd reduce;
  std::function<Eigen::MatrixXd(const FilterState&)> H;
  std::function<Eigen::MatrixXd(const FilterState&)> N_hat;
};

struct NoiseSchedule {
  std::function<Eigen::MatrixXd(const FilterState&, const Eigen::VectorXd& u)> Q_hat;
};

enum class CovarianceUpdate { Standard, Joseph };

/// H built from the d vectors alone: reduce(hat(e_j) d) for Left, minus that for Right.
Eigen::MatrixXd invariant_H(Group g, ErrorSide side, const std::vector<Eigen::VectorXd>& d_list,
                            const Eigen::MatrixXd& reduce);

/// Integrates the state over [t, t + span] with RK4 steps of dt, and the
/// Riccati equation dP/dt = A P + P A^T + Q_hat on the same grid. Q_hat is
/// evaluated at the state at the start of each step.
FilterState propagate(const FilterState& fs, const Dynamics& d, const LinearizedDynamics& lin,
                      const NoiseSchedule& ns, const InputSignal& u, double span, double dt);

/// Stacked reduce(x^-1 Y^i - d^i) (Left) or reduce(x Y^i - d^i) (Right).
Eigen::VectorXd innovation(const FilterState& fs, const ObservationModel& obs, const std::vector<Eigen::VectorXd>& Y);

struct Gain {
  Eigen::MatrixXd L;
  Eigen::MatrixXd P_plus;
};

/// S = H P H^T + N, L = P H^T S^-1, P+ = (I - L H) P (or Joseph form), symmetrized.
/// Throws UpdateSkipped when S is not positive definite or cond(S) > 1e12.
Gain gain(const Eigen::MatrixXd& P, const Eigen::MatrixXd& H, const Eigen::MatrixXd& N,
          CovarianceUpdate mode = CovarianceUpdate::Standard);

struct UpdateResult {
  FilterState state;
  Eigen::MatrixXd L;
  Eigen::VectorXd z;
};

UpdateResult update_verbose(const FilterState& fs, const ObservationModel& obs, const std::vector<Eigen::VectorXd>& Y,
                            CovarianceUpdate mode = CovarianceUpdate::Standard);

/// Left: x+ = x exp(L z). Right: x+ = exp(L z) x.
FilterState update(const FilterState& fs, const ObservationModel& obs, const std::vector<Eigen::VectorXd>& Y,
                   CovarianceUpdate mode = CovarianceUpdate::Standard);

/// xi^T P^-1 xi
double lyapunov_value(const FilterState& fs, const TangentVector& xi);
double lyapunov_value(const Eigen::MatrixXd& P, const Eigen::VectorXd& xi);

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& P);

}  // namespace iekf
