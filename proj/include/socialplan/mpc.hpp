#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "socialplan/geometry.hpp"
#include "socialplan/rng.hpp"

namespace socialplan {

/// Unicycle state. Heading is kept in (-pi, pi].
struct RobotState {
  Point2 position;
  double heading = 0.0;
};

struct ControlInput {
  double v = 0.0;
  double omega = 0.0;
};

struct ControlBounds {
  double v_min = 0.1;
  double v_max = 5.0;
  // omega is always limited to (-pi, pi]
};

struct MpcConfig {
  int horizon = 5;
  double mu = 50.0;
  Eigen::Matrix2d P = Eigen::Vector2d(25.0, 25.0).asDiagonal();
  Eigen::Matrix2d Q = Eigen::Vector2d(25.0, 25.0).asDiagonal();
  Eigen::Matrix2d R = Eigen::Vector2d(10.0, 1.0).asDiagonal();
  double epsilon = 1e-8;
  double dt = 1.0;
  ControlBounds bounds;
  int solver_samples = 256;
  int solver_iters = 3;
  /// Seed for the sampled-shooting solver. Fixed so that track() is a function of its reference.
  std::uint64_t solver_seed = 0x5eed;
  /// Score random candidates with the OpenMP kernel instead of the serial one.
  bool parallel = true;

  /// Throws std::invalid_argument on a malformed configuration.
  void validate() const;
};

class MpcError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

bool admissible(const ControlInput& u, const ControlBounds& bounds);

/// One step of the discrete unicycle model. Throws MpcError for an inadmissible control.
RobotState step(const RobotState& q, const ControlInput& u, double dt, const ControlBounds& bounds = {});

/// mu-free obstacle potential 1 / (min_i d(o_i, seg) + epsilon); 0 without obstacles.
double obstacle_penalty(const Segment& seg, const Workspace& ws, double epsilon);

/// Added per rollout position that leaves the workspace, scaled by (1 + excess distance).
inline constexpr double kOutOfBoundsPenalty = 1e9;

/// Horizon objective for a candidate control sequence; controls.size() == horizon and
/// ref_window.size() == horizon + 1. Out-of-workspace rollout positions are penalized.
double horizon_cost(const RobotState& q0, std::span<const ControlInput> controls,
                    std::span<const Point2> ref_window, const MpcConfig& cfg, const Workspace& ws);

/// Controls that chase ref_window point by point: project onto the current heading for
/// speed, then turn toward the following reference point.
std::vector<ControlInput> pursuit_controls(const RobotState& q0, std::span<const Point2> ref_window,
                                           const MpcConfig& cfg);

/// Sampled shooting: random admissible sequences plus the pursuit warm start (and an
/// optional extra warm start), refined by coordinate-wise grid search. Returns the
/// lowest-cost sequence evaluated.
std::vector<ControlInput> solve_horizon(const RobotState& q0, std::span<const Point2> ref_window,
                                        const MpcConfig& cfg, const Workspace& ws, Rng& rng,
                                        std::span<const ControlInput> warm_start = {});

/// Start state for tracking: heading from waypoint 0 toward waypoint 1.
RobotState initial_state(const Trajectory& reference);

struct TrackResult {
  Trajectory trajectory;
  std::vector<ControlInput> controls;  // controls[j] moves waypoint j to waypoint j+1
};

TrackResult track_with_controls(const Trajectory& reference, const RobotState& q_start,
                                const MpcConfig& cfg, const Workspace& ws, Rng& rng);

/// Receding-horizon tracking; the result has the same number of waypoints as the reference.
Trajectory track(const Trajectory& reference, const RobotState& q_start, const MpcConfig& cfg,
                 const Workspace& ws, Rng& rng);

/// m(x): tracking from initial_state(reference) with an rng seeded from cfg.solver_seed.
Trajectory track(const Trajectory& reference, const MpcConfig& cfg, const Workspace& ws);

/// Recovers the controls that generate consecutive waypoints from a given initial
/// heading. Returns std::nullopt when some step is not reproducible by the unicycle
/// model within `tol` or needs an inadmissible speed.
std::optional<std::vector<ControlInput>> reconstruct_controls(const Trajectory& traj, double initial_heading,
                                                              const MpcConfig& cfg, double tol = 1e-9);

}  // namespace socialplan
