#include "iekf/observability.hpp"

#include <cmath>
#include <limits>

namespace iekf {
namespace {

struct EigRange {
  double lo;
  double hi;
};

EigRange sym_eig_range(const Eigen::MatrixXd& M) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

// Smallest eigenvalue on the column space, i.e. ignoring the null directions.
double min_positive_eig(const Eigen::MatrixXd& M) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double cut = 1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff());
  double lo = std::numeric_limits<double>::infinity();
  bool negative = false;
  for (int i = 0; i < ev.size(); ++i) {
    if (ev(i) < -cut) negative = true;
    if (ev(i) > cut) lo = std::min(lo, ev(i));
  }
  if (negative) return ev.minCoeff();
  return std::isinf(lo) ? 0.0 : lo;
}

}  // namespace

Eigen::MatrixXd transition_matrix(const LinearizedDynamics& lin, const InputSignal& u, double t0, double t1,
                                  double dt) {
  const int n = step_count(t1 - t0, dt);
  const int k = algebra_dim(lin.group);
  Eigen::MatrixXd Phi = Eigen::MatrixXd::Identity(k, k);
  auto rhs = [&](double s, const Eigen::MatrixXd& P) -> Eigen::MatrixXd { return lin.A(u(s)) * P; };
  for (int i = 0; i < n; ++i) Phi = rk4_step<Eigen::MatrixXd>(Phi, t0 + i * dt, dt, rhs);
  return Phi;
}

int numerical_rank(const Eigen::MatrixXd& M, double rel_tol) {
  if (M.size() == 0) return 0;
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  const Eigen::VectorXd& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int r = 0;
  for (int i = 0; i < s.size(); ++i) r += s(i) > rel_tol * s(0) ? 1 : 0;
  return r;
}

int rank_H_HPhi(const Eigen::MatrixXd& H, const Eigen::MatrixXd& Phi) {
  Eigen::MatrixXd stacked(2 * H.rows(), H.cols());
  stacked << H, H * Phi;
  return numerical_rank(stacked);
}

bool WindowReport::all_met() const {
  for (bool c : conditions) {
    if (!c) return false;
  }
  return true;
}

WindowReport check_deyst_price(const LinearSystemSignals& sys, double t0, int window, const DeystPriceThresholds& thr) {
  if (window < 1) throw InvalidArgument("window must span at least one update period");
  const int per = step_count(sys.period, sys.dt);
  if (per < 1) throw InvalidArgument("update period shorter than the integration step");
  const int K = window * per;
  const int k = algebra_dim(sys.lin.group);

  std::vector<Eigen::MatrixXd> phis(K + 1);
  phis[0] = Eigen::MatrixXd::Identity(k, k);
  auto rhs = [&](double s, const Eigen::MatrixXd& P) -> Eigen::MatrixXd { return sys.lin.A(sys.u(s)) * P; };
  for (int i = 0; i < K; ++i) phis[i + 1] = rk4_step<Eigen::MatrixXd>(phis[i], t0 + i * sys.dt, sys.dt, rhs);
  std::vector<Eigen::MatrixXd> inv(K + 1);
  for (int i = 0; i <= K; ++i) inv[i] = phis[i].partialPivLu().inverse();

  WindowReport rep;
  rep.t0 = t0;
  rep.t1 = t0 + K * sys.dt;

  // (i) one-period transitions
  rep.phi_eig_min = std::numeric_limits<double>::infinity();
  rep.phi_eig_max = 0.0;
  for (int n = 0; n < window; ++n) {
    const Eigen::MatrixXd step = phis[(n + 1) * per] * inv[n * per];
    const EigRange r = sym_eig_range(step.transpose() * step);
    rep.phi_eig_min = std::min(rep.phi_eig_min, r.lo);
    rep.phi_eig_max = std::max(rep.phi_eig_max, r.hi);
  }
  rep.conditions[0] = rep.phi_eig_min >= thr.delta && rep.phi_eig_max <= thr.ceiling;

  // (ii) and (iv): Q floor and reachability Gramian, trapezoid on the grid
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(k, k);
  rep.q_eig_min = std::numeric_limits<double>::infinity();
  double q_max = 0.0;
  for (int i = 0; i <= K; ++i) {
    const Eigen::MatrixXd Q = sys.Q(t0 + i * sys.dt);
    rep.q_eig_min = std::min(rep.q_eig_min, min_positive_eig(Q));
    q_max = std::max(q_max, sym_eig_range(Q).hi);
    const Eigen::MatrixXd to_end = phis[K] * inv[i];
    const double w = (i == 0 || i == K) ? 0.5 : 1.0;
    W += w * sys.dt * to_end * Q * to_end.transpose();
  }
  rep.conditions[1] = rep.q_eig_min >= thr.q_floor && q_max <= thr.ceiling;
  const EigRange wr = sym_eig_range(W);
  rep.alpha1 = wr.lo;
  rep.alpha2 = wr.hi;
  rep.conditions[3] = rep.alpha1 >= thr.alpha && rep.alpha2 <= thr.ceiling;

  // (iii) and (v): N floor and observability sum, measurements at the end of each period
  Eigen::MatrixXd O = Eigen::MatrixXd::Zero(k, k);
  rep.n_eig_min = std::numeric_limits<double>::infinity();
  double n_max = 0.0;
  for (int n = 1; n <= window; ++n) {
    const double tn = t0 + n * per * sys.dt;
    const Eigen::MatrixXd H = sys.H(tn);
    const Eigen::MatrixXd N = sys.N(tn);
    const EigRange nr = sym_eig_range(N);
    rep.n_eig_min = std::min(rep.n_eig_min, nr.lo);
    n_max = std::max(n_max, nr.hi);
    // Maps the state at the window end back to t_n.
    const Eigen::MatrixXd back = phis[n * per] * inv[K];
    const Eigen::MatrixXd HB = H * back;
    O += HB.transpose() * N.ldlt().solve(HB);
  }
  rep.conditions[2] = rep.n_eig_min >= thr.n_floor && n_max <= thr.ceiling;
  const EigRange orng = sym_eig_range(O);
  rep.beta1 = orng.lo;
  rep.beta2 = orng.hi;
  rep.rank_HPhi = numerical_rank(O);
  rep.conditions[4] = rep.beta1 >= thr.beta && rep.beta2 <= thr.ceiling;
  return rep;
}

std::vector<WindowReport> sweep_deyst_price(const LinearSystemSignals& sys, double t0, double t1, int window,
                                            const DeystPriceThresholds& thr) {
  const int periods = step_count(t1 - t0, sys.period);
  std::vector<WindowReport> out;
  for (int start = 0; start + window <= periods; start += window) {
    out.push_back(check_deyst_price(sys, t0 + start * sys.period, window, thr));
  }
  return out;
}

}  // namespace iekf
