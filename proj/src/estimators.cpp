#include "iekf/estimators.hpp"

#include <cmath>
#include <numbers>

namespace iekf {
namespace {

Eigen::MatrixXd riccati_step(const Eigen::MatrixXd& P, const Eigen::MatrixXd& F, const Eigen::MatrixXd& Q, double dt) {
  auto rhs = [&](double, const Eigen::MatrixXd& X) -> Eigen::MatrixXd { return F * X + X * F.transpose() + Q; };
  const Eigen::MatrixXd out = rk4_step<Eigen::MatrixXd>(P, 0.0, dt, rhs);
  if (!out.allFinite()) throw NumericalFailure("non-finite covariance during propagation");
  return symmetrize(out);
}

double wrap_angle(double a) { return std::remainder(a, 2.0 * std::numbers::pi); }

Eigen::MatrixXd block_diag(const std::vector<Eigen::Matrix3d>& blocks) {
  const int k = static_cast<int>(blocks.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(3 * k, 3 * k);
  for (int i = 0; i < k; ++i) out.block<3, 3>(3 * i, 3 * i) = blocks[i];
  return out;
}

}  // namespace

InvariantFilter::InvariantFilter(std::string name, FilterState initial, Dynamics dynamics, LinearizedDynamics lin,
                                 NoiseSchedule noise, ObservationModel obs, LiftFunction lift, CovarianceUpdate mode)
    : name_(std::move(name)),
      state_(std::move(initial)),
      dynamics_(std::move(dynamics)),
      lin_(std::move(lin)),
      noise_(std::move(noise)),
      obs_(std::move(obs)),
      lift_(std::move(lift)),
      mode_(mode) {
  if (lin_.side != obs_.side) throw InvalidArgument("linearization and observation use different error sides");
}

void InvariantFilter::propagate(const Eigen::VectorXd& u, double dt) {
  state_ = iekf::propagate(state_, dynamics_, lin_, noise_, constant_input(u), dt, dt);
}

void InvariantFilter::update(const std::vector<Eigen::VectorXd>& raw) {
  std::vector<Eigen::VectorXd> Y;
  Y.reserve(raw.size());
  for (const auto& y : raw) Y.push_back(lift_(y));
  UpdateResult r = update_verbose(state_, obs_, Y, mode_);
  gain_norm_ = r.L.norm();
  state_ = std::move(r.state);
}

Eigen::VectorXd InvariantFilter::error_coordinates(const GroupElement& truth) const {
  const GroupElement eta = obs_.side == ErrorSide::Left ? left_error(truth, state_.x) : right_error(truth, state_.x);
  return lie::log(eta).v;
}

CarEkf::CarEkf(const GroupElement& x0, Eigen::Matrix3d P0, car::NoiseSpec spec, std::vector<Eigen::Vector2d> landmarks,
               CovarianceUpdate mode)
    : P_(std::move(P0)), spec_(std::move(spec)), landmarks_(std::move(landmarks)), mode_(mode) {
  const car::CarState s = car::extract(x0);
  theta_ = s.theta;
  x_ = s.x;
}

void CarEkf::propagate(const Eigen::VectorXd& u, double dt) {
  const Eigen::Matrix3d F = car::ekf_F(theta_, u(1));
  const Eigen::Matrix3d G = car::ekf_noise_gain(theta_);
  P_ = riccati_step(P_, F, G * car::process_cov(spec_) * G.transpose(), dt);
  // Heading rate is constant over the step, so theta advances exactly; the
  // position uses the same group RK4 as every other propagation.
  const Dynamics d = car::dynamics();
  auto rhs = [&](double, const Eigen::MatrixXd& m) -> Eigen::MatrixXd { return d.f(u, m); };
  const Eigen::MatrixXd next = rk4_step<Eigen::MatrixXd>(car::embed({theta_, x_}).matrix(), 0.0, dt, rhs);
  if (!next.allFinite()) throw NumericalFailure("non-finite EKF state");
  x_ = next.block<2, 1>(0, 2);
  theta_ += u(0) * u(1) * dt;
}

void CarEkf::update(const std::vector<Eigen::VectorXd>& raw) {
  Eigen::MatrixXd H;
  Eigen::VectorXd z;
  Eigen::MatrixXd N;
  if (landmarks_.empty()) {
    if (raw.size() != 1) throw InvalidArgument("GPS update expects one fix");
    H = car::ekf_gps_H();
    z = raw[0] - x_;
    N = spec_.gps_cov;
  } else {
    if (raw.size() != landmarks_.size()) throw InvalidArgument("one measurement per landmark expected");
    const int k = static_cast<int>(landmarks_.size());
    H.resize(2 * k, 3);
    z.resize(2 * k);
    N = Eigen::MatrixXd::Zero(2 * k, 2 * k);
    for (int i = 0; i < k; ++i) {
      H.block<2, 3>(2 * i, 0) = car::ekf_landmark_H(theta_, x_, landmarks_[i]);
      z.segment<2>(2 * i) = raw[i] - car::rot(theta_).transpose() * (x_ - landmarks_[i]);
      N.block<2, 2>(2 * i, 2 * i) = spec_.landmark_cov;
    }
  }
  const Gain g = gain(P_, H, N, mode_);
  const Eigen::Vector3d dx = g.L * z;
  theta_ += dx(0);
  x_ += dx.tail<2>();
  P_ = g.P_plus;
  gain_norm_ = g.L.norm();
}

GroupElement CarEkf::estimate() const { return car::embed({theta_, x_}); }

Eigen::VectorXd CarEkf::error_coordinates(const GroupElement& truth) const {
  const car::CarState s = car::extract(truth);
  return Eigen::Vector3d(wrap_angle(s.theta - theta_), s.x.x() - x_.x(), s.x.y() - x_.y());
}

NavMekf::NavMekf(const GroupElement& x0, Eigen::MatrixXd P0, Eigen::MatrixXd Q, std::vector<Eigen::Vector3d> landmarks,
                 std::vector<Eigen::Matrix3d> covs, Eigen::Vector3d gravity, CovarianceUpdate mode)
    : x_(x0),
      P_(std::move(P0)),
      Q_(std::move(Q)),
      landmarks_(std::move(landmarks)),
      covs_(std::move(covs)),
      dynamics_(nav::dynamics(gravity)),
      mode_(mode) {
  if (covs_.size() != landmarks_.size()) throw InvalidArgument("one covariance per landmark is required");
}

void NavMekf::propagate(const Eigen::VectorXd& u, double dt) {
  const Eigen::Matrix3d R = x_.matrix().topLeftCorner<3, 3>();
  const Eigen::MatrixXd F = nav::mekf_F(R, u.tail<3>());
  const Eigen::MatrixXd G = nav::mekf_noise_gain(R);
  P_ = riccati_step(P_, F, G * Q_ * G.transpose(), dt);
  auto rhs = [&](double, const Eigen::MatrixXd& m) -> Eigen::MatrixXd { return dynamics_.f(u, m); };
  const Eigen::MatrixXd next = rk4_step<Eigen::MatrixXd>(x_.matrix(), 0.0, dt, rhs);
  if (!next.allFinite()) throw NumericalFailure("non-finite MEKF state");
  x_ = lie::project_to_group(Group::SE2_3, next);
}

void NavMekf::update(const std::vector<Eigen::VectorXd>& raw) {
  if (raw.size() != landmarks_.size()) throw InvalidArgument("one measurement per landmark expected");
  const nav::NavState s = nav::extract(x_);
  const int k = static_cast<int>(landmarks_.size());
  Eigen::VectorXd z(3 * k);
  for (int i = 0; i < k; ++i) z.segment<3>(3 * i) = raw[i] - s.R.transpose() * (landmarks_[i] - s.x);
  const Gain g = gain(P_, nav::mekf_H(s.R, s.x, landmarks_), block_diag(covs_), mode_);
  x_ = nav::embed(nav::mekf_correct(s, g.L * z));
  P_ = g.P_plus;
  gain_norm_ = g.L.norm();
}

Eigen::VectorXd NavMekf::error_coordinates(const GroupElement& truth) const {
  return nav::mekf_error(nav::extract(truth), nav::extract(x_));
}

}  // namespace iekf
