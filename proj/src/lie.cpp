#include "iekf/lie.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "iekf/errors.hpp"

namespace iekf {
namespace {

// Size of the leading rotation block; T3 carries a fixed identity block.
int rotation_size(Group g) {
  switch (g) {
    case Group::SE2:
      return 2;
    case Group::SO3:
    case Group::SE2_3:
    case Group::T3:
      return 3;
  }
  return 0;
}

void require_shape(Group g, const Eigen::MatrixXd& m, const char* what) {
  const int n = matrix_size(g);
  if (m.rows() != n || m.cols() != n) {
    throw InvalidArgument(std::string(what) + ": expected " + std::to_string(n) + "x" + std::to_string(n) +
                          " matrix for " + std::string(group_name(g)) + ", got " + std::to_string(m.rows()) +
                          "x" + std::to_string(m.cols()));
  }
}

void require_same_group(Group a, Group b) {
  if (a != b) {
    throw InvalidArgument("group mismatch: " + std::string(group_name(a)) + " vs " + std::string(group_name(b)));
  }
}

// Structural rows below the rotation/translation block must be identity rows.
bool structural_rows_exact(Group g, const Eigen::MatrixXd& m) {
  const int n = matrix_size(g);
  const int r = rotation_size(g);
  if (g == Group::SO3) return true;
  for (int i = r; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (m(i, j) != (i == j ? 1.0 : 0.0)) return false;
    }
  }
  return true;
}

}  // namespace

int matrix_size(Group g) {
  switch (g) {
    case Group::SE2:
    case Group::SO3:
      return 3;
    case Group::SE2_3:
      return 5;
    case Group::T3:
      return 4;
  }
  return 0;
}

int algebra_dim(Group g) {
  switch (g) {
    case Group::SE2:
    case Group::SO3:
    case Group::T3:
      return 3;
    case Group::SE2_3:
      return 9;
  }
  return 0;
}

std::string_view group_name(Group g) {
  switch (g) {
    case Group::SE2:
      return "SE2";
    case Group::SO3:
      return "SO3";
    case Group::SE2_3:
      return "SE2_3";
    case Group::T3:
      return "T3";
  }
  return "?";
}

TangentVector::TangentVector(Group g, Eigen::VectorXd values) : group(g), v(std::move(values)) {
  if (v.size() != algebra_dim(g)) {
    throw InvalidArgument("tangent vector for " + std::string(group_name(g)) + " needs length " +
                          std::to_string(algebra_dim(g)) + ", got " + std::to_string(v.size()));
  }
}

TangentVector TangentVector::zero(Group g) { return TangentVector(g, Eigen::VectorXd::Zero(algebra_dim(g))); }

GroupElement::GroupElement(Group g, Eigen::MatrixXd m) : group_(g), m_(std::move(m)) {
  require_shape(g, m_, "GroupElement");
  if (!m_.allFinite()) throw NotOnGroup("group element has non-finite entries");
  if (!structural_rows_exact(g, m_)) {
    throw NotOnGroup(std::string(group_name(g)) + " element has wrong structural rows");
  }
  const int r = rotation_size(g);
  const Eigen::MatrixXd rot = m_.topLeftCorner(r, r);
  if (g == Group::T3) {
    if ((rot - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > kGroupTolerance) {
      throw NotOnGroup("T3 element must have an identity linear block");
    }
    return;
  }
  const double ortho = (rot.transpose() * rot - Eigen::MatrixXd::Identity(r, r)).cwiseAbs().maxCoeff();
  if (ortho > kGroupTolerance || rot.determinant() <= 0.0) {
    throw NotOnGroup(std::string(group_name(g)) + " rotation block is not a proper rotation (residual " +
                     std::to_string(ortho) + ")");
  }
}

GroupElement GroupElement::identity(Group g) {
  const int n = matrix_size(g);
  return unchecked(g, Eigen::MatrixXd::Identity(n, n));
}

GroupElement GroupElement::unchecked(Group g, Eigen::MatrixXd m) { return GroupElement(Unchecked{}, g, std::move(m)); }

GroupElement GroupElement::inverse() const {
  const int n = matrix_size(group_);
  const int r = rotation_size(group_);
  Eigen::MatrixXd inv = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd rt = m_.topLeftCorner(r, r).transpose();
  inv.topLeftCorner(r, r) = rt;
  if (n > r) inv.topRightCorner(r, n - r) = -rt * m_.topRightCorner(r, n - r);
  return unchecked(group_, std::move(inv));
}

GroupElement GroupElement::operator*(const GroupElement& other) const {
  require_same_group(group_, other.group_);
  return unchecked(group_, m_ * other.m_);
}

namespace lie {

double sinc(double t) {
  if (std::abs(t) < kTaylorThreshold) {
    const double t2 = t * t;
    return 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
  }
  return std::sin(t) / t;
}

double cosc(double t) {
  if (std::abs(t) < kTaylorThreshold) {
    const double t2 = t * t;
    return 0.5 - t2 / 24.0 + t2 * t2 / 720.0;
  }
  // 1 - cos t = 2 sin^2(t/2) avoids cancellation for moderate t.
  const double s = std::sin(0.5 * t);
  return 2.0 * s * s / (t * t);
}

double sinc3(double t) {
  if (std::abs(t) < kTaylorThreshold) {
    const double t2 = t * t;
    return 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0;
  }
  return (t - std::sin(t)) / (t * t * t);
}

namespace {

// (1 - t sin t / (2 (1 - cos t))) / t^2, the S^2 coefficient of the inverse left Jacobian.
double inv_jacobian_coeff(double t) {
  if (std::abs(t) < 1e-4) {
    const double t2 = t * t;
    return 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0;
  }
  const double half = 0.5 * t;
  return (1.0 - half * std::cos(half) / std::sin(half)) / (t * t);
}

// (t/2) cot(t/2)
double half_cot(double t) {
  if (std::abs(t) < kTaylorThreshold) {
    const double t2 = t * t;
    return 1.0 - t2 / 12.0 - t2 * t2 / 720.0;
  }
  const double half = 0.5 * t;
  return half * std::cos(half) / std::sin(half);
}

Eigen::Vector3d vee_skew(const Eigen::Matrix3d& m) {
  return 0.5 * Eigen::Vector3d(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
}

Eigen::Matrix3d so3_exp(const Eigen::Vector3d& w) {
  const double t = w.norm();
  const Eigen::Matrix3d s = skew(w);
  return Eigen::Matrix3d::Identity() + sinc(t) * s + cosc(t) * s * s;
}

Eigen::Matrix3d so3_left_jacobian(const Eigen::Vector3d& w) {
  const double t = w.norm();
  const Eigen::Matrix3d s = skew(w);
  return Eigen::Matrix3d::Identity() + cosc(t) * s + sinc3(t) * s * s;
}

Eigen::Matrix3d so3_left_jacobian_inv(const Eigen::Vector3d& w) {
  const double t = w.norm();
  const Eigen::Matrix3d s = skew(w);
  return Eigen::Matrix3d::Identity() - 0.5 * s + inv_jacobian_coeff(t) * s * s;
}

Eigen::Vector3d so3_log(const Eigen::Matrix3d& r) {
  const Eigen::Vector3d w = vee_skew(r);  // sin(t) * axis
  const double c = 0.5 * (r.trace() - 1.0);
  const double t = std::atan2(w.norm(), c);
  if (t >= std::numbers::pi - kBranchMargin) {
    throw BranchCutError("rotation angle " + std::to_string(t) + " is at the logarithm branch cut");
  }
  return w / sinc(t);
}

Eigen::Matrix2d rot2(double t) {
  Eigen::Matrix2d r;
  r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
  return r;
}

void require_algebra_size(const AlgebraMatrix& m) { require_shape(m.group, m.m, "AlgebraMatrix"); }

}  // namespace

Eigen::Matrix3d skew(const Eigen::Vector3d& w) {
  Eigen::Matrix3d s;
  s << 0.0, -w.z(), w.y(), w.z(), 0.0, -w.x(), -w.y(), w.x(), 0.0;
  return s;
}

AlgebraMatrix hat(const TangentVector& t) {
  if (t.v.size() != algebra_dim(t.group)) throw InvalidArgument("hat: tangent vector has wrong length");
  const int n = matrix_size(t.group);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  const Eigen::VectorXd& v = t.v;
  switch (t.group) {
    case Group::SE2:
      m(0, 1) = -v(0);
      m(1, 0) = v(0);
      m(0, 2) = v(1);
      m(1, 2) = v(2);
      break;
    case Group::SO3:
      m = skew(v.head<3>());
      break;
    case Group::SE2_3:
      m.topLeftCorner<3, 3>() = skew(v.head<3>());
      m.block<3, 1>(0, 3) = v.segment<3>(3);
      m.block<3, 1>(0, 4) = v.segment<3>(6);
      break;
    case Group::T3:
      m.block<3, 1>(0, 3) = v.head<3>();
      break;
  }
  return {t.group, std::move(m)};
}

TangentVector vee(const AlgebraMatrix& a, double tol) {
  require_algebra_size(a);
  const Eigen::MatrixXd& m = a.m;
  Eigen::VectorXd v(algebra_dim(a.group));
  switch (a.group) {
    case Group::SE2:
      v << 0.5 * (m(1, 0) - m(0, 1)), m(0, 2), m(1, 2);
      break;
    case Group::SO3:
      v = vee_skew(m);
      break;
    case Group::SE2_3:
      v << vee_skew(m.topLeftCorner<3, 3>()), m.block<3, 1>(0, 3), m.block<3, 1>(0, 4);
      break;
    case Group::T3:
      v = m.block<3, 1>(0, 3);
      break;
  }
  TangentVector out(a.group, std::move(v));
  const double residual = (m - hat(out).m).cwiseAbs().maxCoeff();
  if (!(residual <= tol)) {
    throw NotInAlgebra("matrix is not in the Lie algebra of " + std::string(group_name(a.group)) +
                       " (residual " + std::to_string(residual) + ")");
  }
  return out;
}

GroupElement exp(const TangentVector& t) {
  if (t.v.size() != algebra_dim(t.group)) throw InvalidArgument("exp: tangent vector has wrong length");
  const int n = matrix_size(t.group);
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
  const Eigen::VectorXd& v = t.v;
  switch (t.group) {
    case Group::SE2: {
      const double th = v(0);
      Eigen::Matrix2d j;
      j << sinc(th), -th * cosc(th), th * cosc(th), sinc(th);
      m.topLeftCorner<2, 2>() = rot2(th);
      m.block<2, 1>(0, 2) = j * v.segment<2>(1);
      break;
    }
    case Group::SO3:
      m = so3_exp(v.head<3>());
      break;
    case Group::SE2_3: {
      const Eigen::Vector3d w = v.head<3>();
      const Eigen::Matrix3d j = so3_left_jacobian(w);
      m.topLeftCorner<3, 3>() = so3_exp(w);
      m.block<3, 1>(0, 3) = j * v.segment<3>(3);
      m.block<3, 1>(0, 4) = j * v.segment<3>(6);
      break;
    }
    case Group::T3:
      m.block<3, 1>(0, 3) = v.head<3>();
      break;
  }
  return GroupElement::unchecked(t.group, std::move(m));
}

TangentVector log(const GroupElement& g) {
  const Eigen::MatrixXd& m = g.matrix();
  Eigen::VectorXd v(algebra_dim(g.group()));
  switch (g.group()) {
    case Group::SE2: {
      const double th = std::atan2(m(1, 0), m(0, 0));
      if (std::abs(th) >= std::numbers::pi - kBranchMargin) {
        throw BranchCutError("SE2 rotation angle " + std::to_string(th) + " is at the logarithm branch cut");
      }
      Eigen::Matrix2d jinv;
      const double a = half_cot(th);
      jinv << a, 0.5 * th, -0.5 * th, a;
      v << th, jinv * m.block<2, 1>(0, 2);
      break;
    }
    case Group::SO3:
      v = so3_log(m);
      break;
    case Group::SE2_3: {
      const Eigen::Vector3d w = so3_log(m.topLeftCorner<3, 3>());
      const Eigen::Matrix3d jinv = so3_left_jacobian_inv(w);
      v << w, jinv * m.block<3, 1>(0, 3), jinv * m.block<3, 1>(0, 4);
      break;
    }
    case Group::T3:
      v = m.block<3, 1>(0, 3);
      break;
  }
  return TangentVector(g.group(), std::move(v));
}

Eigen::MatrixXd adjoint(const GroupElement& g) {
  const Eigen::MatrixXd& m = g.matrix();
  const int k = algebra_dim(g.group());
  Eigen::MatrixXd ad = Eigen::MatrixXd::Identity(k, k);
  switch (g.group()) {
    case Group::SE2:
      ad.bottomRightCorner<2, 2>() = m.topLeftCorner<2, 2>();
      ad(1, 0) = m(1, 2);
      ad(2, 0) = -m(0, 2);
      break;
    case Group::SO3:
      ad = m;
      break;
    case Group::SE2_3: {
      const Eigen::Matrix3d r = m.topLeftCorner<3, 3>();
      ad.setZero();
      ad.block<3, 3>(0, 0) = r;
      ad.block<3, 3>(3, 3) = r;
      ad.block<3, 3>(6, 6) = r;
      ad.block<3, 3>(3, 0) = skew(m.block<3, 1>(0, 3)) * r;
      ad.block<3, 3>(6, 0) = skew(m.block<3, 1>(0, 4)) * r;
      break;
    }
    case Group::T3:
      break;
  }
  return ad;
}

Eigen::MatrixXd adjoint_alg(const TangentVector& x) {
  const int k = algebra_dim(x.group);
  if (x.v.size() != k) throw InvalidArgument("adjoint_alg: tangent vector has wrong length");
  Eigen::MatrixXd ad = Eigen::MatrixXd::Zero(k, k);
  const Eigen::VectorXd& v = x.v;
  switch (x.group) {
    case Group::SE2:
      ad(1, 0) = v(2);
      ad(2, 0) = -v(1);
      ad(1, 2) = -v(0);
      ad(2, 1) = v(0);
      break;
    case Group::SO3:
      ad = skew(v.head<3>());
      break;
    case Group::SE2_3: {
      const Eigen::Matrix3d w = skew(v.head<3>());
      ad.block<3, 3>(0, 0) = w;
      ad.block<3, 3>(3, 3) = w;
      ad.block<3, 3>(6, 6) = w;
      ad.block<3, 3>(3, 0) = skew(v.segment<3>(3));
      ad.block<3, 3>(6, 0) = skew(v.segment<3>(6));
      break;
    }
    case Group::T3:
      break;
  }
  return ad;
}

GroupElement project_to_group(Group g, const Eigen::MatrixXd& raw) {
  require_shape(g, raw, "project_to_group");
  if (!raw.allFinite()) throw ProjectionFailure("cannot project a matrix with non-finite entries");
  const int n = matrix_size(g);
  const int r = rotation_size(g);
  Eigen::MatrixXd m = raw;
  Eigen::MatrixXd rot;
  if (g == Group::T3) {
    rot = Eigen::Matrix3d::Identity();
  } else if (r == 2) {
    // Closed-form polar factor of a 2x2 matrix.
    const double th = std::atan2(raw(1, 0) - raw(0, 1), raw(0, 0) + raw(1, 1));
    rot = rot2(th);
  } else {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(raw.topLeftCorner(r, r), Eigen::ComputeFullU | Eigen::ComputeFullV);
    rot = svd.matrixU() * svd.matrixV().transpose();
    if (rot.determinant() < 0.0) {
      Eigen::MatrixXd u = svd.matrixU();
      u.col(r - 1) *= -1.0;
      rot = u * svd.matrixV().transpose();
    }
  }
  const double dist = (raw.topLeftCorner(r, r) - rot).norm();
  if (dist > 0.1) {
    throw ProjectionFailure("rotation block is " + std::to_string(dist) + " away from the nearest rotation");
  }
  m.topLeftCorner(r, r) = rot;
  for (int i = r; i < n; ++i) {
    m.row(i).setZero();
    m(i, i) = 1.0;
  }
  return GroupElement::unchecked(g, std::move(m));
}

double rotation_angle(const Eigen::Matrix3d& r) {
  return std::atan2(vee_skew(r).norm(), 0.5 * (r.trace() - 1.0));
}

}  // namespace lie
}  // namespace iekf
