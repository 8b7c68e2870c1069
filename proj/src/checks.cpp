#include "iekf/checks.hpp"

#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

#include "iekf/car.hpp"
#include "iekf/nav.hpp"
#include "iekf/parallel.hpp"

namespace iekf {
namespace {

constexpr double kStep = 1e-6;
constexpr double kJacobianTol = 1e-5;

// Flow step used to time-differentiate the MEKF error.
constexpr double kFlowStep = 1e-4;

template <class F>
Eigen::MatrixXd central_jacobian(int rows, int cols, double h, F&& fn) {
  Eigen::MatrixXd J(rows, cols);
  for (int j = 0; j < cols; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(cols);
    e(j) = h;
    J.col(j) = (fn(e) - fn(-e)) / (2.0 * h);
  }
  return J;
}

double max_abs(const Eigen::MatrixXd& M) { return M.size() ? M.cwiseAbs().maxCoeff() : 0.0; }

// theta' = sin(theta) style coupling makes the field depend nonlinearly on chi.
Dynamics non_affine(Group g, int input_dim) {
  const int k = algebra_dim(g);
  return {g, input_dim, [g, k](const Eigen::VectorXd&, const Eigen::MatrixXd& chi) -> Eigen::MatrixXd {
            return chi * lie::hat(TangentVector(g, Eigen::VectorXd::Unit(k, 0))).m * chi(1, 0);
          }};
}

std::vector<Eigen::VectorXd> random_inputs(int dim, int count, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  std::vector<Eigen::VectorXd> out;
  for (int i = 0; i < count; ++i) {
    Eigen::VectorXd u(dim);
    for (int j = 0; j < dim; ++j) u(j) = uni(rng);
    out.push_back(u);
  }
  return out;
}

GroupElement random_element(Group g, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(algebra_dim(g));
  for (int i = 0; i < v.size(); ++i) v(i) = normal(rng);
  return lie::exp(TangentVector(g, v));
}

std::vector<TangentVector> unit_tangents(Group g, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<TangentVector> out;
  for (int i = 0; i < count; ++i) {
    Eigen::VectorXd v(algebra_dim(g));
    for (int j = 0; j < v.size(); ++j) v(j) = normal(rng);
    out.emplace_back(g, v.normalized());
  }
  return out;
}

CheckRow log_linear_row(const std::string& name, const Dynamics& d, const LinearizedDynamics& lin,
                        const Eigen::VectorXd& input) {
  const auto reports =
      omp::verify_log_linear_batch(d, lin, unit_tangents(d.group, 20, 11), constant_input(input), 0.0, 10.0, 1e-3);
  double worst = 0.0;
  bool feasible = true;
  for (const auto& r : reports) {
    worst = std::max(worst, r.max_deviation);
    feasible = feasible && r.feasible;
  }
  return {name, feasible && worst <= 1e-6, worst, 1e-6};
}

CheckRow linearization_row(const std::string& name, const Dynamics& d, ErrorSide side,
                           const std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>& analytic) {
  std::mt19937_64 rng(3);
  double worst = 0.0;
  for (const auto& u : random_inputs(d.input_dim, 10, rng)) {
    worst = std::max(worst, max_abs(analytic(u) - numeric_A(d, side, u)));
  }
  return {name, worst <= kJacobianTol, worst, kJacobianTol};
}

CheckRow H_row(const std::string& name, const ObservationModel& obs, Group g) {
  std::mt19937_64 rng(5);
  double worst = 0.0;
  const int k = algebra_dim(g);
  for (int i = 0; i < 10; ++i) {
    const FilterState fs{random_element(g, rng), Eigen::MatrixXd::Identity(k, k), 0.0};
    worst = std::max(worst, max_abs(obs.H(fs) - numeric_H(fs, obs)));
  }
  return {name, worst <= kJacobianTol, worst, kJacobianTol};
}

std::vector<CheckRow> car_checks(const std::optional<std::vector<Eigen::VectorXd>>& override_lms) {
  std::vector<CheckRow> rows;
  const Dynamics d = car::dynamics();
  const AffineCheck ac = check_group_affine(d, 100, 1);
  rows.push_back({"group_affine", ac.holds, ac.max_residual, 1e-9});
  const AffineCheck bad = check_group_affine(non_affine(Group::SE2, 2), 100, 1);
  rows.push_back({"non_affine_rejected", !bad.holds, bad.max_residual, 1e-9});

  const Eigen::Vector2d circle(0.2, std::numbers::pi / 4.0);
  rows.push_back(log_linear_row("log_linear_left", d, linearize(d, ErrorSide::Left, car::A_left), circle));
  rows.push_back(log_linear_row("log_linear_right", d, linearize(d, ErrorSide::Right, car::A_right), circle));

  rows.push_back(linearization_row("A_left", d, ErrorSide::Left, car::A_left));
  rows.push_back(linearization_row("A_right", d, ErrorSide::Right, car::A_right));

  const car::NoiseSpec spec;
  const std::vector<Eigen::Vector2d> lms{{3.0, -1.0}, {-2.0, 4.0}};
  rows.push_back(H_row("H_gps", car::gps_observation(spec), Group::SE2));
  rows.push_back(H_row("H_landmarks", car::landmark_observation(lms, spec), Group::SE2));

  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal;
  double f_err = 0.0;
  double h_err = 0.0;
  for (const auto& u : random_inputs(2, 10, rng)) {
    const double th = normal(rng);
    const Eigen::Vector2d x(normal(rng), normal(rng));
    f_err = std::max(f_err, max_abs(car::ekf_F(th, u(1)) - numeric_ekf_F(th, x, u)));
    h_err = std::max(h_err, max_abs(car::ekf_gps_H() - numeric_ekf_H(th, x, {})));
    for (const auto& p : lms) h_err = std::max(h_err, max_abs(car::ekf_landmark_H(th, x, p) - numeric_ekf_H(th, x, {p})));
  }
  rows.push_back({"ekf_F", f_err <= kJacobianTol, f_err, kJacobianTol});
  rows.push_back({"ekf_H", h_err <= kJacobianTol, h_err, kJacobianTol});

  std::vector<Eigen::Vector2d> rank_lms = lms;
  if (override_lms) {
    rank_lms.clear();
    for (const auto& p : *override_lms) {
      if (p.size() != 2) throw InvalidArgument("car landmarks have 2 coordinates");
      rank_lms.emplace_back(p(0), p(1));
    }
  }
  const int r = rank_lms.empty() ? 0 : numerical_rank(car::landmark_H(rank_lms));
  rows.push_back({"rank_H", r == 3, static_cast<double>(r), 3.0});
  return rows;
}

std::vector<CheckRow> nav_checks(const std::optional<std::vector<Eigen::VectorXd>>& override_lms) {
  std::vector<CheckRow> rows;
  const Eigen::Vector3d g = nav::kDefaultGravity;
  const Dynamics d = nav::dynamics(g);
  const AffineCheck ac = check_group_affine(d, 100, 1);
  rows.push_back({"group_affine", ac.holds, ac.max_residual, 1e-9});
  const AffineCheck bad = check_group_affine(non_affine(Group::SE2_3, 6), 100, 1);
  rows.push_back({"non_affine_rejected", !bad.holds, bad.max_residual, 1e-9});

  const Eigen::MatrixXd A = nav::A_right(g);
  auto A_fn = [A](const Eigen::VectorXd&) { return A; };
  Eigen::VectorXd circle(6);
  circle << 0.0, 0.0, 0.2, 0.0, 0.2, 9.81;
  // No closed-form left A is used by any filter; the numeric one stands in,
  // computed once since the input is constant.
  const Eigen::MatrixXd A_left = numeric_A(d, ErrorSide::Left, circle);
  const LinearizedDynamics lin_left{ErrorSide::Left, Group::SE2_3, [A_left](const Eigen::VectorXd&) { return A_left; }};
  rows.push_back(log_linear_row("log_linear_left", d, lin_left, circle));
  rows.push_back(log_linear_row("log_linear_right", d, linearize(d, ErrorSide::Right, A_fn), circle));
  rows.push_back(linearization_row("A_right", d, ErrorSide::Right, A_fn));

  const std::vector<Eigen::Vector3d> lms{{0.0, 0.0, 5.0}, {10.0, 0.0, 0.0}, {0.0, 10.0, 2.0}};
  const std::vector<Eigen::Matrix3d> covs(lms.size(), Eigen::Matrix3d::Identity());
  rows.push_back(H_row("H_landmarks", nav::landmark_observation(lms, covs), Group::SE2_3));

  std::mt19937_64 rng(13);
  double f_err = 0.0;
  double h_err = 0.0;
  for (const auto& u : random_inputs(6, 10, rng)) {
    const nav::NavState est = nav::extract(random_element(Group::SE2_3, rng));
    f_err = std::max(f_err, max_abs(nav::mekf_F(est.R, u.tail<3>()) - numeric_mekf_F(est, u, g)));
    h_err = std::max(h_err, max_abs(nav::mekf_H(est.R, est.x, lms) - numeric_mekf_H(est, lms)));
  }
  rows.push_back({"mekf_F", f_err <= kJacobianTol, f_err, kJacobianTol});
  rows.push_back({"mekf_H", h_err <= kJacobianTol, h_err, kJacobianTol});

  std::vector<Eigen::Vector3d> rank_lms = lms;
  if (override_lms) {
    rank_lms.clear();
    for (const auto& p : *override_lms) {
      if (p.size() != 3) throw InvalidArgument("nav landmarks have 3 coordinates");
      rank_lms.emplace_back(p(0), p(1), p(2));
    }
  }
  int r = 0;
  if (!rank_lms.empty()) {
    const LinearizedDynamics lin{ErrorSide::Right, Group::SE2_3, A_fn};
    const Eigen::MatrixXd Phi = transition_matrix(lin, constant_input(circle), 0.0, 1.0, 1e-3);
    r = rank_H_HPhi(nav::landmark_H(rank_lms), Phi);
  }
  rows.push_back({"rank_H_HPhi", r == 9, static_cast<double>(r), 9.0});
  return rows;
}

}  // namespace

Eigen::MatrixXd numeric_H(const FilterState& fs, const ObservationModel& obs) {
  const Group g = fs.x.group();
  const int k = algebra_dim(g);
  auto z = [&](const Eigen::VectorXd& xi) -> Eigen::VectorXd {
    const GroupElement e = lie::exp(TangentVector(g, -xi));
    const GroupElement chi = obs.side == ErrorSide::Left ? fs.x * e : e * fs.x;
    std::vector<Eigen::VectorXd> Y;
    for (const auto& dv : obs.d_list) {
      Y.push_back(obs.side == ErrorSide::Left ? Eigen::VectorXd(chi.matrix() * dv)
                                              : Eigen::VectorXd(chi.inverse().matrix() * dv));
    }
    return innovation(fs, obs, Y);
  };
  const int rows = static_cast<int>(z(Eigen::VectorXd::Zero(k)).size());
  return -central_jacobian(rows, k, kStep, z);
}

Eigen::Matrix3d numeric_ekf_F(double theta_hat, const Eigen::Vector2d& x_hat, const Eigen::VectorXd& input) {
  const Dynamics d = car::dynamics();
  auto field = [&](const Eigen::VectorXd& e) -> Eigen::VectorXd {
    const Eigen::MatrixXd m = car::embed({theta_hat + e(0), x_hat + e.tail<2>()}).matrix();
    const Eigen::MatrixXd f = d.f(input, m);
    // theta' = f(1, 0) / cos(theta) is ill-posed near pi/2; use R^T f instead.
    const Eigen::Matrix2d rt = m.topLeftCorner<2, 2>().transpose() * f.topLeftCorner<2, 2>();
    return Eigen::Vector3d(rt(1, 0), f(0, 2), f(1, 2));
  };
  return central_jacobian(3, 3, kStep, field);
}

Eigen::MatrixXd numeric_ekf_H(double theta_hat, const Eigen::Vector2d& x_hat,
                              const std::vector<Eigen::Vector2d>& landmarks) {
  auto y = [&](const Eigen::VectorXd& e) -> Eigen::VectorXd {
    const GroupElement chi = car::embed({theta_hat + e(0), x_hat + e.tail<2>()});
    if (landmarks.empty()) return car::measure_gps(chi);
    Eigen::VectorXd out(2 * landmarks.size());
    for (std::size_t i = 0; i < landmarks.size(); ++i) out.segment<2>(2 * i) = car::measure_landmark(chi, landmarks[i]);
    return out;
  };
  const int rows = landmarks.empty() ? 2 : 2 * static_cast<int>(landmarks.size());
  return central_jacobian(rows, 3, kStep, y);
}

Eigen::MatrixXd numeric_mekf_F(const nav::NavState& est, const Eigen::VectorXd& input, const Eigen::Vector3d& gravity) {
  const Dynamics d = nav::dynamics(gravity);
  auto flow = [&](const nav::NavState& s, double tau) {
    auto rhs = [&](double, const Eigen::MatrixXd& m) -> Eigen::MatrixXd { return d.f(input, m); };
    const Eigen::MatrixXd m = rk4_step<Eigen::MatrixXd>(nav::embed(s).matrix(), 0.0, tau, rhs);
    return nav::extract(lie::project_to_group(Group::SE2_3, m));
  };
  // d/dt of the error along both flows, by a central difference in time.
  auto rate = [&](const Eigen::VectorXd& eps) -> Eigen::VectorXd {
    const nav::NavState truth = nav::mekf_correct(est, eps);
    const Eigen::VectorXd plus = nav::mekf_error(flow(truth, kFlowStep), flow(est, kFlowStep));
    const Eigen::VectorXd minus = nav::mekf_error(flow(truth, -kFlowStep), flow(est, -kFlowStep));
    return (plus - minus) / (2.0 * kFlowStep);
  };
  return central_jacobian(9, 9, 1e-4, rate);
}

Eigen::MatrixXd numeric_mekf_H(const nav::NavState& est, const std::vector<Eigen::Vector3d>& landmarks) {
  auto y = [&](const Eigen::VectorXd& eps) -> Eigen::VectorXd {
    const GroupElement chi = nav::embed(nav::mekf_correct(est, eps));
    Eigen::VectorXd out(3 * landmarks.size());
    for (std::size_t i = 0; i < landmarks.size(); ++i) out.segment<3>(3 * i) = nav::measure_landmark(chi, landmarks[i]);
    return out;
  };
  return central_jacobian(3 * static_cast<int>(landmarks.size()), 9, kStep, y);
}

std::vector<CheckRow> model_checks(ModelKind model, const std::optional<std::vector<Eigen::VectorXd>>& landmarks) {
  return model == ModelKind::Car ? car_checks(landmarks) : nav_checks(landmarks);
}

std::string format_checks(const std::vector<CheckRow>& rows) {
  std::ostringstream os;
  os << std::left << std::setw(22) << "check" << std::setw(6) << "result" << "  value (tolerance)\n";
  for (const auto& r : rows) {
    os << std::left << std::setw(22) << r.name << std::setw(6) << (r.passed ? "PASS" : "FAIL") << "  "
       << format_double(r.value) << " (" << format_double(r.tolerance) << ")\n";
  }
  return os.str();
}

LinearSystemSignals linear_system_signals(const Scenario& sc) {
  sc.validate();
  const Trajectory traj = synthesize_inputs(sc);
  const double dt = 1.0 / sc.imu_rate;
  const int k = algebra_dim(sc.group());
  // Same models as the filters, so the check sees exactly what they use.
  LinearizedDynamics lin{sc.invariant_side(), sc.group(), nullptr};
  ObservationModel obs;
  NoiseSchedule noise;
  if (sc.model == ModelKind::Car) {
    car::NoiseSpec spec;
    spec.q_theta = sc.Q_diag(0);
    spec.q_l = sc.Q_diag(1);
    spec.q_tr = sc.Q_diag(2);
    spec.gps_cov = sc.N_diag.head<2>().asDiagonal();
    spec.landmark_cov = spec.gps_cov;
    if (sc.observation == ObservationKind::Gps) {
      lin.A = car::A_left;
      obs = car::gps_observation(spec);
      noise = car::gps_noise(spec);
    } else {
      lin.A = car::A_right;
      std::vector<Eigen::Vector2d> lms;
      for (const auto& p : sc.landmarks) lms.emplace_back(p(0), p(1));
      obs = car::landmark_observation(lms, spec);
      noise = car::landmark_noise(spec);
    }
  } else {
    const Eigen::MatrixXd A = nav::A_right(sc.gravity);
    lin.A = [A](const Eigen::VectorXd&) { return A; };
    std::vector<Eigen::Vector3d> lms;
    for (const auto& p : sc.landmarks) lms.emplace_back(p(0), p(1), p(2));
    obs = nav::landmark_observation(lms, std::vector<Eigen::Matrix3d>(lms.size(), sc.N_diag.head<3>().asDiagonal()));
    noise = nav::landmark_noise(Eigen::MatrixXd(sc.Q_diag.asDiagonal()));
  }
  const Eigen::VectorXd u = traj.input;
  auto at = [truth = traj.truth, k](double t) {
    return FilterState{truth(t), Eigen::MatrixXd::Identity(k, k), t};
  };
  LinearSystemSignals sys;
  sys.lin = lin;
  sys.u = constant_input(u);
  sys.H = [obs, at](double t) { return obs.H(at(t)); };
  sys.Q = [noise, at, u](double t) { return noise.Q_hat(at(t), u); };
  sys.N = [obs, at](double t) { return obs.N_hat(at(t)); };
  sys.period = 1.0 / sc.obs_rate;
  sys.dt = dt;
  return sys;
}

}  // namespace iekf
