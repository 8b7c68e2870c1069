#pragma once

#include <Eigen/Dense>
#include <string_view>

namespace iekf {

/// Matrix Lie groups supported by the library.
///
/// T3 is the abelian group of 3D translations embedded as 4x4 homogeneous
/// matrices; it is where the invariant filter collapses to a linear Kalman
/// filter and is used to check that reduction.
enum class Group { SE2, SO3, SE2_3, T3 };

int matrix_size(Group g);
int algebra_dim(Group g);
std::string_view group_name(Group g);

/// Tangent-space coordinates, ordered as the hat map expects.
/// SE2: (theta, u1, u2). SE2_3: (rotation, velocity, position).
struct TangentVector {
  TangentVector(Group g, Eigen::VectorXd values);
  static TangentVector zero(Group g);

  Group group;
  Eigen::VectorXd v;
};

struct AlgebraMatrix {
  Group group;
  Eigen::MatrixXd m;
};

/// An N x N matrix known to satisfy the group constraints.
class GroupElement {
 public:
  /// Validates rotation orthonormality (1e-9), det +1, and exact structural rows.
  GroupElement(Group g, Eigen::MatrixXd m);

  static GroupElement identity(Group g);
  /// Skips validation. For results of closed-form maps and group products.
  static GroupElement unchecked(Group g, Eigen::MatrixXd m);

  Group group() const { return group_; }
  const Eigen::MatrixXd& matrix() const { return m_; }

  GroupElement inverse() const;
  GroupElement operator*(const GroupElement& other) const;

 private:
  struct Unchecked {};
  GroupElement(Unchecked, Group g, Eigen::MatrixXd m) : group_(g), m_(std::move(m)) {}

  Group group_;
  Eigen::MatrixXd m_;
};

/// Membership tolerance for rotation blocks.
inline constexpr double kGroupTolerance = 1e-9;
/// Below this rotation magnitude the trigonometric coefficients use Taylor series.
inline constexpr double kTaylorThreshold = 1e-7;
/// Logarithm refuses rotation angles at or above pi minus this margin.
inline constexpr double kBranchMargin = 1e-6;

namespace lie {

Eigen::Matrix3d skew(const Eigen::Vector3d& w);

AlgebraMatrix hat(const TangentVector& v);
TangentVector vee(const AlgebraMatrix& m, double tol = 1e-9);

GroupElement exp(const TangentVector& v);
TangentVector log(const GroupElement& g);

/// Ad_g, defined by g hat(xi) g^-1 = hat(Ad_g xi).
Eigen::MatrixXd adjoint(const GroupElement& g);
/// ad_x, defined by the commutator [hat(x), hat(xi)] = hat(ad_x xi).
Eigen::MatrixXd adjoint_alg(const TangentVector& x);

/// Nearest group element: polar projection of the rotation block and exact
/// structural rows. Throws ProjectionFailure when the rotation block is more
/// than 0.1 (Frobenius) away from an orthogonal matrix.
GroupElement project_to_group(Group g, const Eigen::MatrixXd& raw);

/// Rotation angle of a 3x3 rotation matrix, in [0, pi].
double rotation_angle(const Eigen::Matrix3d& r);

/// sin(t)/t, (1-cos t)/t^2 and (t-sin t)/t^3 with small-angle fallbacks.
double sinc(double t);
double cosc(double t);
double sinc3(double t);

}  // namespace lie
}  // namespace iekf
