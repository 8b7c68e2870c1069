#include "iekf/filter.hpp"

#include <string>

namespace iekf {
namespace {

constexpr double kMaxInnovationCondition = 1e12;

}  // namespace

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& P) { return 0.5 * (P + P.transpose()); }

Eigen::MatrixXd invariant_H(Group g, ErrorSide side, const std::vector<Eigen::VectorXd>& d_list,
                            const Eigen::MatrixXd& reduce) {
  const int k = algebra_dim(g);
  const int r = static_cast<int>(reduce.rows());
  Eigen::MatrixXd H(r * static_cast<int>(d_list.size()), k);
  const double sign = side == ErrorSide::Left ? 1.0 : -1.0;
  for (std::size_t i = 0; i < d_list.size(); ++i) {
    for (int j = 0; j < k; ++j) {
      const Eigen::MatrixXd e = lie::hat(TangentVector(g, Eigen::VectorXd::Unit(k, j))).m;
      H.block(r * static_cast<int>(i), j, r, 1) = sign * reduce * (e * d_list[i]);
    }
  }
  return H;
}

FilterState propagate(const FilterState& fs, const Dynamics& d, const LinearizedDynamics& lin,
                      const NoiseSchedule& ns, const InputSignal& u, double span, double dt) {
  if (!(span > 0.0)) throw InvalidArgument("propagation span must be positive");
  if (dt > span * (1.0 + 1e-12)) throw InvalidArgument("step larger than propagation span");
  const int n = step_count(span, dt);
  FilterState out = fs;
  auto state_rhs = [&](double s, const Eigen::MatrixXd& x) -> Eigen::MatrixXd { return d.f(u(s), x); };
  for (int i = 0; i < n; ++i) {
    const double t = fs.t + i * dt;
    const Eigen::MatrixXd Q = ns.Q_hat ? ns.Q_hat(out, u(t)) : Eigen::MatrixXd();
    auto riccati = [&](double s, const Eigen::MatrixXd& P) -> Eigen::MatrixXd {
      const Eigen::MatrixXd A = lin.A(u(s));
      Eigen::MatrixXd dP = A * P + P * A.transpose();
      if (Q.size() > 0) dP += Q;
      return dP;
    };
    const Eigen::MatrixXd x_next = rk4_step<Eigen::MatrixXd>(out.x.matrix(), t, dt, state_rhs);
    const Eigen::MatrixXd P_next = rk4_step<Eigen::MatrixXd>(out.P, t, dt, riccati);
    if (!x_next.allFinite() || !P_next.allFinite()) {
      throw NumericalFailure("non-finite state or covariance at t = " + std::to_string(t + dt));
    }
    out.x = lie::project_to_group(d.group, x_next);
    out.P = symmetrize(P_next);
    out.t = fs.t + (i + 1) * dt;
  }
  return out;
}

Eigen::VectorXd innovation(const FilterState& fs, const ObservationModel& obs, const std::vector<Eigen::VectorXd>& Y) {
  if (Y.size() != obs.d_list.size()) {
    throw InvalidArgument("expected " + std::to_string(obs.d_list.size()) + " observations, got " +
                          std::to_string(Y.size()));
  }
  const int r = static_cast<int>(obs.reduce.rows());
  Eigen::VectorXd z(r * static_cast<int>(Y.size()));
  const Eigen::MatrixXd T = obs.side == ErrorSide::Left ? fs.x.inverse().matrix() : fs.x.matrix();
  for (std::size_t i = 0; i < Y.size(); ++i) {
    if (Y[i].size() != T.cols()) throw InvalidArgument("observation vector has the wrong length");
    z.segment(r * static_cast<int>(i), r) = obs.reduce * (T * Y[i] - obs.d_list[i]);
  }
  return z;
}

Gain gain(const Eigen::MatrixXd& P, const Eigen::MatrixXd& H, const Eigen::MatrixXd& N, CovarianceUpdate mode) {
  if (H.cols() != P.rows() || N.rows() != H.rows() || N.cols() != H.rows()) {
    throw InvalidArgument("gain: inconsistent P, H, N dimensions");
  }
  const Eigen::MatrixXd S = symmetrize(H * P * H.transpose() + N);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kMaxInnovationCondition) {
    throw UpdateSkipped("innovation covariance is singular or ill-conditioned (eigenvalues " + std::to_string(lo) +
                        ", " + std::to_string(hi) + ")");
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success) throw UpdateSkipped("innovation covariance factorization failed");
  // L = P H^T S^-1 = (S^-1 H P)^T since P and S are symmetric.
  const Eigen::MatrixXd L = llt.solve(H * P).transpose();
  const Eigen::MatrixXd IKH = Eigen::MatrixXd::Identity(P.rows(), P.cols()) - L * H;
  Eigen::MatrixXd P_plus;
  if (mode == CovarianceUpdate::Joseph) {
    P_plus = IKH * P * IKH.transpose() + L * N * L.transpose();
  } else {
    P_plus = IKH * P;
  }
  return {L, symmetrize(P_plus)};
}

UpdateResult update_verbose(const FilterState& fs, const ObservationModel& obs, const std::vector<Eigen::VectorXd>& Y,
                            CovarianceUpdate mode) {
  const Eigen::VectorXd z = innovation(fs, obs, Y);
  const Gain g = gain(fs.P, obs.H(fs), obs.N_hat(fs), mode);
  const GroupElement step = lie::exp(TangentVector(fs.x.group(), g.L * z));
  FilterState out = fs;
  out.x = obs.side == ErrorSide::Left ? fs.x * step : step * fs.x;
  out.P = g.P_plus;
  if (!out.x.matrix().allFinite()) throw NumericalFailure("non-finite state after update");
  return {std::move(out), g.L, z};
}

FilterState update(const FilterState& fs, const ObservationModel& obs, const std::vector<Eigen::VectorXd>& Y,
                   CovarianceUpdate mode) {
  return update_verbose(fs, obs, Y, mode).state;
}

double lyapunov_value(const Eigen::MatrixXd& P, const Eigen::VectorXd& xi) {
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(P);
  if (ldlt.info() != Eigen::Success || ldlt.vectorD().cwiseAbs().minCoeff() <= 0.0) {
    throw NumericalFailure("covariance is singular");
  }
  return xi.dot(ldlt.solve(xi));
}

double lyapunov_value(const FilterState& fs, const TangentVector& xi) { return lyapunov_value(fs.P, xi.v); }

}  // namespace iekf
