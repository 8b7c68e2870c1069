#include "iekf/parallel.hpp"

#include <exception>
#include <omp.h>

namespace iekf {
namespace {

// Exceptions cannot cross an OpenMP region; keep the first one and rethrow it
// after the loop.
class FirstError {
 public:
  template <class F>
  void guard(F&& f) {
    try {
      f();
    } catch (...) {
#pragma omp critical(iekf_first_error)
      if (!err_) err_ = std::current_exception();
    }
  }
  void rethrow() const {
    if (err_) std::rethrow_exception(err_);
  }

 private:
  std::exception_ptr err_;
};

}  // namespace

namespace serial {

std::vector<double> affine_residuals(const Dynamics& d, const std::vector<AffineSample>& samples) {
  std::vector<double> out(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) out[i] = affine_residual(d, samples[i]);
  return out;
}

std::vector<LogLinearReport> verify_log_linear_batch(const Dynamics& d, const LinearizedDynamics& lin,
                                                     const std::vector<TangentVector>& xi0s, const InputSignal& u,
                                                     double t0, double t1, double dt) {
  std::vector<LogLinearReport> out;
  out.reserve(xi0s.size());
  for (const auto& xi0 : xi0s) out.push_back(verify_log_linear(d, lin, xi0, u, t0, t1, dt));
  return out;
}

std::vector<RunLog> run_batch(const std::vector<Scenario>& scenarios) {
  std::vector<RunLog> out;
  out.reserve(scenarios.size());
  for (const auto& sc : scenarios) out.push_back(run(sc));
  return out;
}

}  // namespace serial

namespace omp {

std::vector<double> affine_residuals(const Dynamics& d, const std::vector<AffineSample>& samples) {
  const int n = static_cast<int>(samples.size());
  std::vector<double> out(n);
  FirstError err;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    err.guard([&] { out[i] = affine_residual(d, samples[i]); });
  }
  err.rethrow();
  return out;
}

std::vector<LogLinearReport> verify_log_linear_batch(const Dynamics& d, const LinearizedDynamics& lin,
                                                     const std::vector<TangentVector>& xi0s, const InputSignal& u,
                                                     double t0, double t1, double dt) {
  const int n = static_cast<int>(xi0s.size());
  std::vector<LogLinearReport> out(n);
  FirstError err;
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < n; ++i) {
    err.guard([&] { out[i] = verify_log_linear(d, lin, xi0s[i], u, t0, t1, dt); });
  }
  err.rethrow();
  return out;
}

std::vector<RunLog> run_batch(const std::vector<Scenario>& scenarios, int jobs) {
  const int n = static_cast<int>(scenarios.size());
  std::vector<RunLog> out(n);
  const int threads = jobs > 0 ? jobs : omp_get_max_threads();
  FirstError err;
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (int i = 0; i < n; ++i) {
    err.guard([&] { out[i] = run(scenarios[i]); });
  }
  err.rethrow();
  return out;
}

}  // namespace omp
}  // namespace iekf
