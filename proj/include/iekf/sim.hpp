#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "iekf/estimators.hpp"

namespace iekf {

enum class ModelKind { Car, Nav };
enum class ObservationKind { Gps, Landmarks };
/// Fixed: the initial tangent error is init_sigma itself. Random: drawn from N(0, diag(init_sigma^2)).
enum class InitMode { Fixed, Random };

struct TruthShift {
  GroupElement gamma;
  /// Left: the truth becomes Gamma chi. Right: chi Gamma (Gamma a pure rotation).
  ErrorSide side;
};

struct Scenario {
  std::string name = "run";
  ModelKind model = ModelKind::Car;
  ObservationKind observation = ObservationKind::Gps;
  /// Circle diameter in meters; 0 keeps the vehicle at rest.
  double diameter = 10.0;
  double duration = 40.0;
  double imu_rate = 100.0;
  double obs_rate = 1.0;
  bool inject_noise = false;
  InitMode init_mode = InitMode::Fixed;
  /// Initial error in the invariant filter's tangent coordinates.
  Eigen::VectorXd init_sigma;
  /// Process noise diagonal in tangent coordinates.
  Eigen::VectorXd Q_diag;
  /// Measurement noise diagonal for one GPS fix or one landmark.
  Eigen::VectorXd N_diag;
  Eigen::VectorXd P0_diag;
  /// 2-vectors for the car, 3-vectors for navigation.
  std::vector<Eigen::VectorXd> landmarks;
  Eigen::Vector3d gravity = nav::kDefaultGravity;
  std::vector<std::string> filters;
  CovarianceUpdate covariance_update = CovarianceUpdate::Standard;
  std::uint64_t seed = 1;
  std::optional<TruthShift> truth_shift;

  Group group() const { return model == ModelKind::Car ? Group::SE2 : Group::SE2_3; }
  ErrorSide invariant_side() const;
  int steps() const;
  int steps_per_update() const;
  /// Throws InvalidArgument on inconsistent settings.
  void validate() const;
};

/// Closed-form circular motion and the inputs that produce it.
struct Trajectory {
  Eigen::VectorXd input;  // constant along the circle
  std::function<GroupElement(double)> truth;
};

Trajectory synthesize_inputs(const Scenario& sc);

struct FilterTrace {
  std::string name;
  std::vector<double> err_att_deg;
  std::vector<double> err_pos_m;
  std::vector<double> err_log_norm;
  std::vector<double> trace_P;
  std::vector<char> updated;
  /// Lyapunov diagnostic xi^T P^-1 xi right after each update.
  std::vector<double> lyapunov;
  std::vector<double> gain_norm;
  double min_P_eig = 0.0;
  double max_P_asymmetry = 0.0;
  int skipped_updates = 0;
  bool failed = false;
  double failure_time = 0.0;
  std::string failure;
};

struct RunLog {
  std::string name;
  ModelKind model = ModelKind::Car;
  std::vector<std::string> truth_columns;
  std::vector<double> t;
  std::vector<Eigen::VectorXd> truth;
  std::vector<FilterTrace> filters;
};

/// Builds the filters named in sc.filters ("iekf", "ekf" for the car, "mekf"
/// for navigation), all started from the same estimate x0.
std::vector<std::unique_ptr<Estimator>> make_estimators(const Scenario& sc, const GroupElement& x0);

/// Deterministic given the scenario, seed included. Filters that fail are
/// marked and dropped for the rest of the run.
RunLog run(const Scenario& sc);

struct FilterSummary {
  std::string name;
  double final_att_deg = 0.0;
  double final_pos_m = 0.0;
  double initial_pos_m = 0.0;
  double max_pos_m = 0.0;
  /// Earliest time after which the attitude error stays at or below 1 degree; NaN if never.
  double time_to_1deg = 0.0;
  double max_lyapunov_increase = 0.0;
  bool lyapunov_monotone = true;
  bool diverged = false;
  double min_P_eig = 0.0;
  double max_P_asymmetry = 0.0;
  int skipped_updates = 0;
  bool failed = false;
  std::string failure;
};

struct Summary {
  std::string name;
  std::vector<FilterSummary> filters;

  const FilterSummary& at(const std::string& filter) const;
};

/// Lyapunov monotonicity is judged after this many update epochs.
inline constexpr int kLyapunovTransient = 5;

Summary metrics(const RunLog& log);
bool any_failed(const RunLog& log);

void write_csv(const RunLog& log, std::ostream& os);
std::string format_summary(const Summary& s);
/// Shortest round-trip decimal, "nan" for NaN.
std::string format_double(double v);

namespace scenarios {

Scenario fig1(bool large_error);
Scenario fig2(int tuning);
/// Car with GPS at rest, used to show the heading is unobservable.
Scenario standstill();

}  // namespace scenarios

}  // namespace iekf
