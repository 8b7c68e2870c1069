#include "iekf/nav.hpp"

#include <cmath>

namespace iekf::nav {
namespace {

Eigen::Matrix3d so3_exp(const Eigen::Vector3d& w) {
  return lie::exp(TangentVector(Group::SO3, w)).matrix();
}

}  // namespace

GroupElement embed(const NavState& s) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(5, 5);
  m.topLeftCorner<3, 3>() = s.R;
  m.block<3, 1>(0, 3) = s.v;
  m.block<3, 1>(0, 4) = s.x;
  return GroupElement::unchecked(Group::SE2_3, m);
}

NavState extract(const GroupElement& g) {
  if (g.group() != Group::SE2_3) throw InvalidArgument("nav state must live in SE2_3");
  const Eigen::MatrixXd& m = g.matrix();
  return {m.topLeftCorner<3, 3>(), m.block<3, 1>(0, 3), m.block<3, 1>(0, 4)};
}

Dynamics dynamics(const Eigen::Vector3d& gravity) {
  return {Group::SE2_3, 6, [gravity](const Eigen::VectorXd& u, const Eigen::MatrixXd& chi) -> Eigen::MatrixXd {
            if (u.size() != 6) throw InvalidArgument("nav input is (omega, a)");
            Eigen::MatrixXd f = Eigen::MatrixXd::Zero(5, 5);
            const Eigen::Matrix3d R = chi.topLeftCorner<3, 3>();
            f.topLeftCorner<3, 3>() = R * lie::skew(u.head<3>());
            f.block<3, 1>(0, 3) = gravity + R * u.tail<3>();
            f.block<3, 1>(0, 4) = chi.block<3, 1>(0, 3);
            return f;
          }};
}

Eigen::MatrixXd A_right(const Eigen::Vector3d& gravity) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(9, 9);
  A.block<3, 3>(3, 0) = lie::skew(gravity);
  A.block<3, 3>(6, 3) = Eigen::Matrix3d::Identity();
  return A;
}

Eigen::MatrixXd landmark_H(const std::vector<Eigen::Vector3d>& landmarks) {
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(3 * landmarks.size(), 9);
  for (std::size_t k = 0; k < landmarks.size(); ++k) {
    H.block<3, 3>(3 * k, 0) = lie::skew(landmarks[k]);
    H.block<3, 3>(3 * k, 6) = -Eigen::Matrix3d::Identity();
  }
  return H;
}

ObservationModel landmark_observation(const std::vector<Eigen::Vector3d>& landmarks,
                                      const std::vector<Eigen::Matrix3d>& covs) {
  if (landmarks.empty()) throw InvalidArgument("landmark observation needs at least one landmark");
  if (covs.size() != landmarks.size()) throw InvalidArgument("one covariance per landmark is required");
  Eigen::Matrix<double, 3, 5> reduce = Eigen::Matrix<double, 3, 5>::Zero();
  reduce.leftCols<3>().setIdentity();
  std::vector<Eigen::VectorXd> d;
  for (const auto& p : landmarks) {
    Eigen::VectorXd dk(5);
    dk << p, 0.0, 1.0;
    d.push_back(dk);
  }
  const Eigen::MatrixXd H = landmark_H(landmarks);
  return {ErrorSide::Right, d, reduce, [H](const FilterState&) -> Eigen::MatrixXd { return H; },
          [covs](const FilterState& fs) -> Eigen::MatrixXd {
            const Eigen::Matrix3d r = fs.x.matrix().topLeftCorner<3, 3>();
            const int k = static_cast<int>(covs.size());
            Eigen::MatrixXd N = Eigen::MatrixXd::Zero(3 * k, 3 * k);
            for (int i = 0; i < k; ++i) N.block<3, 3>(3 * i, 3 * i) = r * covs[i] * r.transpose();
            return N;
          }};
}

Eigen::VectorXd lift_landmark(const Eigen::Vector3d& y) {
  Eigen::VectorXd out(5);
  out << y, 0.0, 1.0;
  return out;
}

Eigen::Vector3d measure_landmark(const GroupElement& chi, const Eigen::Vector3d& p) {
  const Eigen::Matrix3d r = chi.matrix().topLeftCorner<3, 3>();
  return r.transpose() * (p - chi.matrix().block<3, 1>(0, 4));
}

Eigen::MatrixXd Q_hat(const FilterState& fs, const Eigen::MatrixXd& cov) {
  const Eigen::MatrixXd ad = lie::adjoint(fs.x);
  return ad * cov * ad.transpose();
}

NoiseSchedule landmark_noise(const Eigen::MatrixXd& cov) {
  return {[cov](const FilterState& fs, const Eigen::VectorXd&) -> Eigen::MatrixXd { return Q_hat(fs, cov); }};
}

Eigen::VectorXd right_shift_input(const Eigen::VectorXd& input, const GroupElement& gamma) {
  const Eigen::MatrixXd& m = gamma.matrix();
  if (m.block<3, 2>(0, 3).norm() != 0.0) throw InvalidArgument("nav right shift must be a pure rotation");
  const Eigen::Matrix3d rt = m.topLeftCorner<3, 3>().transpose();
  Eigen::VectorXd out(6);
  out << rt * input.head<3>(), rt * input.tail<3>();
  return out;
}

bool non_collinear(const std::vector<Eigen::Vector3d>& landmarks) {
  if (landmarks.size() < 3) return false;
  Eigen::MatrixXd D(3, landmarks.size() - 1);
  for (std::size_t i = 1; i < landmarks.size(); ++i) D.col(i - 1) = landmarks[i] - landmarks[0];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(D);
  const auto& s = svd.singularValues();
  return s.size() >= 2 && s(1) > 1e-8 * std::max(1.0, s(0));
}

Eigen::MatrixXd mekf_F(const Eigen::Matrix3d& R_hat, const Eigen::Vector3d& a) {
  Eigen::MatrixXd F = Eigen::MatrixXd::Zero(9, 9);
  F.block<3, 3>(3, 0) = -lie::skew(R_hat * a);
  F.block<3, 3>(6, 3) = Eigen::Matrix3d::Identity();
  return F;
}

Eigen::MatrixXd mekf_H(const Eigen::Matrix3d& R_hat, const Eigen::Vector3d& x_hat,
                       const std::vector<Eigen::Vector3d>& landmarks) {
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(3 * landmarks.size(), 9);
  for (std::size_t k = 0; k < landmarks.size(); ++k) {
    H.block<3, 3>(3 * k, 0) = -R_hat.transpose() * lie::skew(landmarks[k] - x_hat);
    H.block<3, 3>(3 * k, 6) = R_hat.transpose();
  }
  return H;
}

Eigen::MatrixXd mekf_noise_gain(const Eigen::Matrix3d& R_hat) {
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(9, 9);
  G.block<3, 3>(0, 0) = -R_hat;
  G.block<3, 3>(3, 3) = -R_hat;
  G.block<3, 3>(6, 6) = -R_hat;
  return G;
}

NavState mekf_correct(const NavState& s, const Eigen::VectorXd& eps) {
  NavState out;
  out.R = so3_exp(-eps.head<3>()) * s.R;
  out.v = s.v - eps.segment<3>(3);
  out.x = s.x - eps.segment<3>(6);
  return out;
}

Eigen::VectorXd mekf_error(const NavState& truth, const NavState& estimate) {
  Eigen::VectorXd e(9);
  e << lie::log(GroupElement::unchecked(Group::SO3, estimate.R * truth.R.transpose())).v, estimate.v - truth.v,
      estimate.x - truth.x;
  return e;
}

}  // namespace iekf::nav
