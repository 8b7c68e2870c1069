#pragma once

#include <vector>

#include "iekf/error_dynamics.hpp"
#include "iekf/sim.hpp"

namespace iekf {

/// Batch kernels, each with a serial reference. The OpenMP versions return
/// exactly what the serial ones do (same order, same arithmetic per item);
/// the tests hold them to bitwise equality.
namespace serial {

std::vector<double> affine_residuals(const Dynamics& d, const std::vector<AffineSample>& samples);
std::vector<LogLinearReport> verify_log_linear_batch(const Dynamics& d, const LinearizedDynamics& lin,
                                                     const std::vector<TangentVector>& xi0s, const InputSignal& u,
                                                     double t0, double t1, double dt);
std::vector<RunLog> run_batch(const std::vector<Scenario>& scenarios);

}  // namespace serial

namespace omp {

std::vector<double> affine_residuals(const Dynamics& d, const std::vector<AffineSample>& samples);
std::vector<LogLinearReport> verify_log_linear_batch(const Dynamics& d, const LinearizedDynamics& lin,
                                                     const std::vector<TangentVector>& xi0s, const InputSignal& u,
                                                     double t0, double t1, double dt);
/// jobs <= 0 leaves the thread count to OpenMP.
std::vector<RunLog> run_batch(const std::vector<Scenario>& scenarios, int jobs = 0);

}  // namespace omp

}  // namespace iekf
