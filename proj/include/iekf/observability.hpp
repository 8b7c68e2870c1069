#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <vector>

#include "iekf/error_dynamics.hpp"

namespace iekf {

/// Phi(t1, t0) from d/dt Phi = A(u_t) Phi, Phi(t0) = I, by RK4.
Eigen::MatrixXd transition_matrix(const LinearizedDynamics& lin, const InputSignal& u, double t0, double t1,
                                  double dt);

/// Singular values above rel_tol * sigma_max.
int numerical_rank(const Eigen::MatrixXd& M, double rel_tol = 1e-8);

/// rank of [H; H Phi]
int rank_H_HPhi(const Eigen::MatrixXd& H, const Eigen::MatrixXd& Phi);

struct DeystPriceThresholds {
  double delta = 1e-8;  // floor on eig(Phi^T Phi) per update period
  double q_floor = 1e-8;
  double n_floor = 1e-8;
  double alpha = 1e-8;  // reachability Gramian floor
  double beta = 1e-8;   // observability sum floor
  double ceiling = 1e12;
};

/// Time-varying linear system seen by the error: A from the linearization,
/// H, Q_hat and N_hat as functions of time. Updates happen every `period`
/// seconds; integrals use the step `dt`.
struct LinearSystemSignals {
  LinearizedDynamics lin;
  InputSignal u;
  std::function<Eigen::MatrixXd(double)> H;
  std::function<Eigen::MatrixXd(double)> Q;
  std::function<Eigen::MatrixXd(double)> N;
  double period;
  double dt;
};

struct WindowReport {
  double t0 = 0.0;
  double t1 = 0.0;
  double phi_eig_min = 0.0;
  double phi_eig_max = 0.0;
  double q_eig_min = 0.0;
  double n_eig_min = 0.0;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  int rank_HPhi = 0;
  /// Conditions i to v: transition bounds, Q floor, N floor, reachability, observability.
  std::array<bool, 5> conditions{};

  bool all_met() const;
};

/// Checks the five conditions over `window` update periods starting at t0.
/// Q is tested on its column space, so a rank-deficient Q passes as long as
/// its positive eigenvalues clear the floor.
WindowReport check_deyst_price(const LinearSystemSignals& sys, double t0, int window,
                               const DeystPriceThresholds& thr = {});

/// Consecutive non-overlapping windows covering [t0, t1].
std::vector<WindowReport> sweep_deyst_price(const LinearSystemSignals& sys, double t0, double t1, int window,
                                            const DeystPriceThresholds& thr = {});

}  // namespace iekf
