#include "socialplan/mpc_kernels.hpp"

#include <cstddef>

namespace socialplan::kernels {

void score_candidates_serial(const RobotState& q0, std::span<const ControlInput> candidates,
                             std::span<const Point2> ref_window, const MpcConfig& cfg,
                             const Workspace& ws, std::span<double> costs) {
  const auto h = static_cast<std::size_t>(cfg.horizon);
  for (std::size_t i = 0; i < costs.size(); ++i) {
    costs[i] = horizon_cost(q0, candidates.subspan(i * h, h), ref_window, cfg, ws);
  }
}

void score_candidates_parallel(const RobotState& q0, std::span<const ControlInput> candidates,
                               std::span<const Point2> ref_window, const MpcConfig& cfg,
                               const Workspace& ws, std::span<double> costs) {
  const auto h = static_cast<std::size_t>(cfg.horizon);
  const auto count = static_cast<std::ptrdiff_t>(costs.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    costs[idx] = horizon_cost(q0, candidates.subspan(idx * h, h), ref_window, cfg, ws);
  }
}

std::size_t argmin(std::span<const double> costs) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < costs.size(); ++i) {
    if (costs[i] < costs[best]) best = i;
  }
  return best;
}

}  // namespace socialplan::kernels
