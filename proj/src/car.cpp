#include "iekf/car.hpp"

#include <cmath>

namespace iekf::car {

Eigen::Matrix2d rot(double theta) {
  Eigen::Matrix2d r;
  r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return r;
}

GroupElement embed(const CarState& s) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m.topLeftCorner<2, 2>() = rot(s.theta);
  m.block<2, 1>(0, 2) = s.x;
  return GroupElement::unchecked(Group::SE2, m);
}

CarState extract(const GroupElement& g) {
  if (g.group() != Group::SE2) throw InvalidArgument("car state must live in SE2");
  const Eigen::MatrixXd& m = g.matrix();
  return {std::atan2(m(1, 0), m(0, 0)), m.block<2, 1>(0, 2)};
}

Eigen::Vector3d twist(const Eigen::VectorXd& input) {
  if (input.size() != 2) throw InvalidArgument("car input is (u, v)");
  return {input(0) * input(1), input(1), 0.0};
}

Dynamics dynamics() {
  return {Group::SE2, 2, [](const Eigen::VectorXd& u, const Eigen::MatrixXd& chi) -> Eigen::MatrixXd {
            return chi * lie::hat(TangentVector(Group::SE2, twist(u))).m;
          }};
}

Eigen::MatrixXd A_left(const Eigen::VectorXd& input) {
  const double u = input(0), v = input(1);
  Eigen::Matrix3d A;
  A << 0.0, 0.0, 0.0, 0.0, 0.0, u * v, v, -u * v, 0.0;
  return A;
}

Eigen::MatrixXd A_right(const Eigen::VectorXd&) { return Eigen::Matrix3d::Zero(); }

Eigen::Matrix3d process_cov(const NoiseSpec& spec) { return Eigen::Vector3d(spec.q_theta, spec.q_l, spec.q_tr).asDiagonal(); }

Eigen::Matrix<double, 2, 3> gps_H() {
  Eigen::Matrix<double, 2, 3> H;
  H << 0.0, 1.0, 0.0, 0.0, 0.0, 1.0;
  return H;
}

ObservationModel gps_observation(const NoiseSpec& spec) {
  Eigen::Matrix<double, 2, 3> reduce;
  reduce << 1.0, 0.0, 0.0, 0.0, 1.0, 0.0;
  const Eigen::Matrix2d cov = spec.gps_cov;
  return {ErrorSide::Left,
          {Eigen::Vector3d(0.0, 0.0, 1.0)},
          reduce,
          [](const FilterState&) -> Eigen::MatrixXd { return gps_H(); },
          // The noise enters the innovation as R^T V.
          [cov](const FilterState& fs) -> Eigen::MatrixXd {
            const Eigen::Matrix2d r = fs.x.matrix().topLeftCorner<2, 2>();
            return r.transpose() * cov * r;
          }};
}

Eigen::VectorXd lift_gps(const Eigen::Vector2d& y) { return Eigen::Vector3d(y.x(), y.y(), 1.0); }

NoiseSchedule gps_noise(const NoiseSpec& spec) {
  const Eigen::Matrix3d Q = process_cov(spec);
  return {[Q](const FilterState&, const Eigen::VectorXd&) -> Eigen::MatrixXd { return Q; }};
}

Eigen::MatrixXd landmark_H(const std::vector<Eigen::Vector2d>& landmarks) {
  Eigen::MatrixXd H(2 * landmarks.size(), 3);
  for (std::size_t k = 0; k < landmarks.size(); ++k) {
    const Eigen::Vector2d& p = landmarks[k];
    H.block<2, 3>(2 * k, 0) << -p.y(), 1.0, 0.0, p.x(), 0.0, 1.0;
  }
  return H;
}

ObservationModel landmark_observation(const std::vector<Eigen::Vector2d>& landmarks, const NoiseSpec& spec) {
  if (landmarks.empty()) throw InvalidArgument("landmark observation needs at least one landmark");
  Eigen::Matrix<double, 2, 3> reduce;
  reduce << 1.0, 0.0, 0.0, 0.0, 1.0, 0.0;
  std::vector<Eigen::VectorXd> d;
  for (const auto& p : landmarks) d.push_back(Eigen::Vector3d(-p.x(), -p.y(), -1.0));
  const Eigen::MatrixXd H = landmark_H(landmarks);
  const Eigen::Matrix2d cov = spec.landmark_cov;
  const int k = static_cast<int>(landmarks.size());
  return {ErrorSide::Right, d, reduce, [H](const FilterState&) -> Eigen::MatrixXd { return H; },
          [cov, k](const FilterState& fs) -> Eigen::MatrixXd {
            const Eigen::Matrix2d r = fs.x.matrix().topLeftCorner<2, 2>();
            Eigen::MatrixXd N = Eigen::MatrixXd::Zero(2 * k, 2 * k);
            for (int i = 0; i < k; ++i) N.block<2, 2>(2 * i, 2 * i) = r * cov * r.transpose();
            return N;
          }};
}

Eigen::VectorXd lift_landmark(const Eigen::Vector2d& y) { return Eigen::Vector3d(y.x(), y.y(), -1.0); }

NoiseSchedule landmark_noise(const NoiseSpec& spec) {
  const Eigen::Matrix3d Q = process_cov(spec);
  return {[Q](const FilterState& fs, const Eigen::VectorXd&) -> Eigen::MatrixXd {
    const Eigen::MatrixXd ad = lie::adjoint(fs.x);
    return ad * Q * ad.transpose();
  }};
}

Eigen::Vector2d measure_gps(const GroupElement& chi) { return chi.matrix().block<2, 1>(0, 2); }

Eigen::Vector2d measure_landmark(const GroupElement& chi, const Eigen::Vector2d& p) {
  const Eigen::Matrix2d r = chi.matrix().topLeftCorner<2, 2>();
  return r.transpose() * (chi.matrix().block<2, 1>(0, 2) - p);
}

Eigen::VectorXd right_shift_input(const Eigen::VectorXd& input, const GroupElement& gamma) {
  const Eigen::MatrixXd& m = gamma.matrix();
  if (m.block<2, 1>(0, 2).norm() != 0.0 || std::abs(m(1, 0)) > 1e-12) {
    throw InvalidArgument("car right shift must be a rotation by 0 or pi");
  }
  // Rotating the body by pi reverses the odometer; u v is unchanged.
  return m(0, 0) > 0.0 ? input : Eigen::VectorXd(-input);
}

Eigen::Matrix3d ekf_F(double theta_hat, double v) {
  Eigen::Matrix3d F = Eigen::Matrix3d::Zero();
  F(1, 0) = -std::sin(theta_hat) * v;
  F(2, 0) = std::cos(theta_hat) * v;
  return F;
}

Eigen::Matrix<double, 2, 3> ekf_gps_H() { return gps_H(); }

Eigen::Matrix<double, 2, 3> ekf_landmark_H(double theta_hat, const Eigen::Vector2d& x_hat, const Eigen::Vector2d& p) {
  Eigen::Matrix2d J;
  J << 0.0, -1.0, 1.0, 0.0;
  const Eigen::Matrix2d rt = rot(theta_hat).transpose();
  Eigen::Matrix<double, 2, 3> H;
  H.col(0) = -J * rt * (x_hat - p);
  H.rightCols<2>() = rt;
  return H;
}

Eigen::Matrix3d ekf_noise_gain(double theta_hat) {
  Eigen::Matrix3d G = Eigen::Matrix3d::Identity();
  G.bottomRightCorner<2, 2>() = rot(theta_hat);
  return G;
}

}  // namespace iekf::car
