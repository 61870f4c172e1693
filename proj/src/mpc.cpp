#include "socialplan/mpc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include "socialplan/mpc_kernels.hpp"

namespace socialplan {

namespace {

constexpr double kPi = std::numbers::pi;
// Smallest admissible angular speed; the range is half-open at -pi.
const double kOmegaLow = std::nextafter(-kPi, 0.0);

double quad(const Eigen::Matrix2d& m, double x, double y) {
  return x * (m(0, 0) * x + m(0, 1) * y) + y * (m(1, 0) * x + m(1, 1) * y);
}

bool is_symmetric_psd(const Eigen::Matrix2d& m) {
  if (m(0, 1) != m(1, 0)) return false;
  return m(0, 0) >= 0.0 && m(1, 1) >= 0.0 && m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0) >= 0.0;
}

constexpr std::size_t kEliteCount = 16;
constexpr std::array<double, 12> kDetourOffsets = {-1.0, 1.0, -2.0, 2.0, -3.0, 3.0, -4.0, 4.0, -6.0, 6.0, -0.5, 0.5};

ControlInput clamp_control(ControlInput u, const ControlBounds& b) {
  return {std::clamp(u.v, b.v_min, b.v_max), std::clamp(u.omega, kOmegaLow, kPi)};
}

}  // namespace

void MpcConfig::validate() const {
  if (horizon < 1) throw std::invalid_argument("mpc horizon must be >= 1");
  if (!(mu >= 0.0)) throw std::invalid_argument("mpc mu must be >= 0");
  if (!is_symmetric_psd(P) || !is_symmetric_psd(Q) || !is_symmetric_psd(R)) {
    throw std::invalid_argument("mpc weights P, Q, R must be symmetric PSD");
  }
  if (!(epsilon > 0.0)) throw std::invalid_argument("mpc epsilon must be > 0");
  if (!(dt > 0.0)) throw std::invalid_argument("mpc dt must be > 0");
  if (!(bounds.v_min <= bounds.v_max)) throw std::invalid_argument("mpc v bounds are inverted");
  if (solver_samples < 0 || solver_iters < 0) throw std::invalid_argument("mpc solver counts must be >= 0");
}

double wrap_angle(double a) {
  double r = std::remainder(a, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

bool admissible(const ControlInput& u, const ControlBounds& b) {
  return u.v >= b.v_min && u.v <= b.v_max && u.omega > -kPi && u.omega <= kPi;
}

RobotState step(const RobotState& q, const ControlInput& u, double dt, const ControlBounds& bounds) {
  if (!admissible(u, bounds)) {
    throw MpcError("control (" + std::to_string(u.v) + ", " + std::to_string(u.omega) + ") out of bounds");
  }
  return {{q.position.x + dt * u.v * std::cos(q.heading), q.position.y + dt * u.v * std::sin(q.heading)},
          wrap_angle(q.heading + dt * u.omega)};
}

double obstacle_penalty(const Segment& seg, const Workspace& ws, double epsilon) {
  if (ws.obstacles.empty()) return 0.0;
  double d = std::numeric_limits<double>::infinity();
  for (const auto& obs : ws.obstacles) d = std::min(d, segment_obstacle_distance(seg, obs));
  return 1.0 / (d + epsilon);
}

double horizon_cost(const RobotState& q0, std::span<const ControlInput> controls,
                    std::span<const Point2> ref_window, const MpcConfig& cfg, const Workspace& ws) {
  const auto n = static_cast<std::size_t>(cfg.horizon);
  if (controls.size() != n || ref_window.size() != n + 1) {
    throw MpcError("horizon_cost: expected " + std::to_string(n) + " controls and " + std::to_string(n + 1) +
                   " reference points");
  }
  double cost = 0.0;
  Point2 pos = q0.position;
  double heading = q0.heading;
  for (std::size_t k = 0; k < n; ++k) {
    const ControlInput& u = controls[k];
    const Point2 dev = ref_window[k] - pos;
    cost += 0.5 * quad(cfg.Q, dev.x, dev.y) + 0.5 * quad(cfg.R, u.v, u.omega);

    const Point2 next{pos.x + cfg.dt * u.v * std::cos(heading), pos.y + cfg.dt * u.v * std::sin(heading)};
    if (cfg.mu != 0.0) cost += cfg.mu * obstacle_penalty({pos, next}, ws, cfg.epsilon);
    if (!ws.in_bounds(next)) {
      const double ex = std::max({-next.x, next.x - ws.width, 0.0});
      const double ey = std::max({-next.y, next.y - ws.height, 0.0});
      cost += kOutOfBoundsPenalty * (1.0 + std::hypot(ex, ey));
    }
    pos = next;
    heading = wrap_angle(heading + cfg.dt * u.omega);
  }
  const Point2 dev = ref_window[n] - pos;
  cost += 0.5 * quad(cfg.P, dev.x, dev.y);
  return cost;
}

std::vector<ControlInput> pursuit_controls(const RobotState& q0, std::span<const Point2> ref_window,
                                           const MpcConfig& cfg) {
  const auto n = static_cast<std::size_t>(cfg.horizon);
  std::vector<ControlInput> out(n);
  Point2 pos = q0.position;
  double heading = q0.heading;
  for (std::size_t k = 0; k < n; ++k) {
    const Point2 d = ref_window[k + 1] - pos;
    const double along = d.x * std::cos(heading) + d.y * std::sin(heading);
    out[k].v = std::clamp(along / cfg.dt, cfg.bounds.v_min, cfg.bounds.v_max);
    pos = {pos.x + cfg.dt * out[k].v * std::cos(heading), pos.y + cfg.dt * out[k].v * std::sin(heading)};
    if (k + 1 < n) {
      const Point2 aim = ref_window[k + 2] - pos;
      // Already on the next point: reverse so the forced minimum-speed step comes back.
      const double turn = norm(aim) < cfg.bounds.v_min * cfg.dt ? kPi : wrap_angle(std::atan2(aim.y, aim.x) - heading);
      out[k].omega = std::clamp(turn / cfg.dt, kOmegaLow, kPi);
    }
    heading = wrap_angle(heading + cfg.dt * out[k].omega);
  }
  return out;
}

std::vector<ControlInput> solve_horizon(const RobotState& q0, std::span<const Point2> ref_window,
                                        const MpcConfig& cfg, const Workspace& ws, Rng& rng,
                                        std::span<const ControlInput> warm_start) {
  const auto n = static_cast<std::size_t>(cfg.horizon);
  if (ref_window.size() != n + 1) throw MpcError("solve_horizon: reference window must hold horizon + 1 points");

  const std::vector<ControlInput> pursuit = pursuit_controls(q0, ref_window, cfg);
  const bool has_warm = warm_start.size() == n;
  const auto samples = static_cast<std::size_t>(cfg.solver_samples);

  // Candidate 0 is the pursuit sequence, then the optional warm start, then pursuit of
  // the window shifted sideways (detours around obstacles sitting on the reference),
  // then the random samples: perturbations of the pursuit sequence and uniform draws.
  std::vector<ControlInput> candidates;
  candidates.reserve((2 + kDetourOffsets.size() + samples) * n);
  candidates.insert(candidates.end(), pursuit.begin(), pursuit.end());
  if (has_warm) {
    for (const auto& u : warm_start) candidates.push_back(clamp_control(u, cfg.bounds));
  }
  const Point2 span_dir = ref_window[n] - q0.position;
  if (norm(span_dir) > 0.0) {
    const Point2 normal = (1.0 / norm(span_dir)) * Point2{-span_dir.y, span_dir.x};
    std::vector<Point2> shifted(ref_window.begin(), ref_window.end());
    for (const double offset : kDetourOffsets) {
      for (std::size_t k = 1; k <= n; ++k) shifted[k] = ref_window[k] + offset * normal;
      const auto detour = pursuit_controls(q0, shifted, cfg);
      candidates.insert(candidates.end(), detour.begin(), detour.end());
    }
  }
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double v_span = cfg.bounds.v_max - cfg.bounds.v_min;
  for (std::size_t s = 0; s < samples; ++s) {
    const bool local = s < samples / 2;
    for (std::size_t k = 0; k < n; ++k) {
      ControlInput u;
      if (local) {
        u = clamp_control({pursuit[k].v + 0.25 * v_span * gauss(rng), pursuit[k].omega + 0.5 * gauss(rng)},
                          cfg.bounds);
      } else {
        u.v = cfg.bounds.v_min + v_span * uniform01(rng);
        u.omega = kPi - 2.0 * kPi * uniform01(rng);  // (-pi, pi]
      }
      candidates.push_back(u);
    }
  }

  std::vector<double> costs(candidates.size() / n);
  auto score = [&](std::span<const ControlInput> cands, std::span<double> out) {
    if (cfg.parallel) {
      kernels::score_candidates_parallel(q0, cands, ref_window, cfg, ws, out);
    } else {
      kernels::score_candidates_serial(q0, cands, ref_window, cfg, ws, out);
    }
  };
  score(candidates, costs);
  std::size_t best_index = kernels::argmin(costs);
  std::vector<ControlInput> best(candidates.begin() + static_cast<std::ptrdiff_t>(best_index * n),
                                 candidates.begin() + static_cast<std::ptrdiff_t>((best_index + 1) * n));
  double best_cost = costs[best_index];

  // Elite resampling: refit a per-coordinate Gaussian to the lowest-cost candidates
  // and draw a fresh batch from it.
  const std::size_t batch = std::max<std::size_t>(samples / 2, 1);
  const std::size_t elites = std::min<std::size_t>(kEliteCount, costs.size());
  std::vector<std::size_t> order(costs.size());
  std::vector<double> mean_v(n), mean_w(n), sd_v(n), sd_w(n);
  for (int round = 0; round < cfg.solver_iters && samples > 0; ++round) {
    order.resize(costs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(elites), order.end(),
                      [&](std::size_t a, std::size_t b) { return costs[a] < costs[b] || (costs[a] == costs[b] && a < b); });
    for (std::size_t k = 0; k < n; ++k) {
      double sv = 0.0, sw = 0.0;
      for (std::size_t e = 0; e < elites; ++e) {
        sv += candidates[order[e] * n + k].v;
        sw += candidates[order[e] * n + k].omega;
      }
      mean_v[k] = sv / static_cast<double>(elites);
      mean_w[k] = sw / static_cast<double>(elites);
      double vv = 0.0, vw = 0.0;
      for (std::size_t e = 0; e < elites; ++e) {
        vv += std::pow(candidates[order[e] * n + k].v - mean_v[k], 2);
        vw += std::pow(candidates[order[e] * n + k].omega - mean_w[k], 2);
      }
      sd_v[k] = std::sqrt(vv / static_cast<double>(elites)) + 0.02 * v_span;
      sd_w[k] = std::sqrt(vw / static_cast<double>(elites)) + 0.02 * kPi;
    }
    std::vector<ControlInput> next;
    next.reserve(batch * n);
    for (std::size_t s = 0; s < batch; ++s) {
      for (std::size_t k = 0; k < n; ++k) {
        const double v = mean_v[k] + sd_v[k] * gauss(rng);
        const double w = mean_w[k] + sd_w[k] * gauss(rng);
        next.push_back(clamp_control({v, w}, cfg.bounds));
      }
    }
    std::vector<double> next_costs(batch);
    score(next, next_costs);
    // keep the elites, replace everything else by the new batch
    std::vector<ControlInput> kept;
    std::vector<double> kept_costs;
    kept.reserve((elites + batch) * n);
    for (std::size_t e = 0; e < elites; ++e) {
      const auto first = candidates.begin() + static_cast<std::ptrdiff_t>(order[e] * n);
      kept.insert(kept.end(), first, first + static_cast<std::ptrdiff_t>(n));
      kept_costs.push_back(costs[order[e]]);
    }
    kept.insert(kept.end(), next.begin(), next.end());
    kept_costs.insert(kept_costs.end(), next_costs.begin(), next_costs.end());
    candidates = std::move(kept);
    costs = std::move(kept_costs);
    best_index = kernels::argmin(costs);
    if (costs[best_index] < best_cost) {
      best_cost = costs[best_index];
      best.assign(candidates.begin() + static_cast<std::ptrdiff_t>(best_index * n),
                  candidates.begin() + static_cast<std::ptrdiff_t>((best_index + 1) * n));
    }
  }

  // Coordinate-wise grid refinement with a step that halves every round.
  double v_step = v_span / 8.0;
  double w_step = kPi / 8.0;
  std::vector<ControlInput> trial = best;
  for (int round = 0; round < cfg.solver_iters; ++round) {
    for (std::size_t k = 0; k < n; ++k) {
      for (int dim = 0; dim < 2; ++dim) {
        const ControlInput center = best[k];
        for (int off = -3; off <= 3; ++off) {
          if (off == 0) continue;
          trial = best;
          if (dim == 0) {
            trial[k].v = center.v + off * v_step;
          } else {
            trial[k].omega = center.omega + off * w_step;
          }
          trial[k] = clamp_control(trial[k], cfg.bounds);
          const double c = horizon_cost(q0, trial, ref_window, cfg, ws);
          if (c < best_cost) {
            best_cost = c;
            best = trial;
          }
        }
      }
    }
    v_step *= 0.5;
    w_step *= 0.5;
  }
  return best;
}

RobotState initial_state(const Trajectory& reference) {
  if (reference.size() < 2) throw MpcError("reference needs at least two waypoints");
  const Point2 d = reference[1] - reference[0];
  const double heading = (d.x == 0.0 && d.y == 0.0) ? 0.0 : std::atan2(d.y, d.x);
  return {reference[0], wrap_angle(heading)};
}

TrackResult track_with_controls(const Trajectory& reference, const RobotState& q_start,
                                const MpcConfig& cfg, const Workspace& ws, Rng& rng) {
  if (reference.size() < 2) throw MpcError("reference needs at least two waypoints");
  const std::size_t last = reference.size() - 1;
  const auto h = static_cast<std::size_t>(cfg.horizon);

  TrackResult out;
  out.trajectory.waypoints.reserve(reference.size());
  out.controls.reserve(last);
  out.trajectory.waypoints.push_back(q_start.position);

  RobotState q = q_start;
  std::vector<Point2> window(h + 1);
  std::vector<ControlInput> warm;
  for (std::size_t j = 0; j < last; ++j) {
    for (std::size_t k = 0; k <= h; ++k) window[k] = reference[std::min(j + k, last)];
    std::vector<ControlInput> plan = solve_horizon(q, window, cfg, ws, rng, warm);
    q = step(q, plan.front(), cfg.dt, cfg.bounds);
    out.trajectory.waypoints.push_back(q.position);
    out.controls.push_back(plan.front());
    // shifted plan as the next warm start
    warm.assign(plan.begin() + 1, plan.end());
    warm.push_back(plan.back());
  }
  return out;
}

Trajectory track(const Trajectory& reference, const RobotState& q_start, const MpcConfig& cfg,
                 const Workspace& ws, Rng& rng) {
  return track_with_controls(reference, q_start, cfg, ws, rng).trajectory;
}

Trajectory track(const Trajectory& reference, const MpcConfig& cfg, const Workspace& ws) {
  Rng rng(cfg.solver_seed);
  return track(reference, initial_state(reference), cfg, ws, rng);
}

std::optional<std::vector<ControlInput>> reconstruct_controls(const Trajectory& traj, double initial_heading,
                                                              const MpcConfig& cfg, double tol) {
  if (traj.size() < 2) return std::vector<ControlInput>{};
  std::vector<ControlInput> controls;
  controls.reserve(traj.size() - 1);
  double heading = wrap_angle(initial_heading);
  for (std::size_t j = 0; j + 1 < traj.size(); ++j) {
    const Point2 d = traj[j + 1] - traj[j];
    const double v = norm(d) / cfg.dt;
    if (v < cfg.bounds.v_min - tol || v > cfg.bounds.v_max + tol) return std::nullopt;
    // the step must lie along the current heading
    const double cross = d.x * std::sin(heading) - d.y * std::cos(heading);
    const double along = d.x * std::cos(heading) + d.y * std::sin(heading);
    if (std::abs(cross) > tol || along < 0.0) return std::nullopt;
    double omega = 0.0;
    if (j + 2 < traj.size()) {
      const Point2 next = traj[j + 2] - traj[j + 1];
      omega = wrap_angle(std::atan2(next.y, next.x) - heading) / cfg.dt;
    }
    controls.push_back({std::clamp(v, cfg.bounds.v_min, cfg.bounds.v_max), omega});
    heading = wrap_angle(heading + cfg.dt * omega);
  }
  return controls;
}

}  // namespace socialplan
