#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "socialplan/mpc.hpp"

namespace socialplan::kernels {

// Candidate scoring for the sampled-shooting solver. `candidates` holds
// count * cfg.horizon controls back to back; costs[i] belongs to candidate i.
// Both variants compute each cost with the same arithmetic, so their outputs are
// bitwise identical.

void score_candidates_serial(const RobotState& q0, std::span<const ControlInput> candidates,
                             std::span<const Point2> ref_window, const MpcConfig& cfg,
                             const Workspace& ws, std::span<double> costs);

void score_candidates_parallel(const RobotState& q0, std::span<const ControlInput> candidates,
                               std::span<const Point2> ref_window, const MpcConfig& cfg,
                               const Workspace& ws, std::span<double> costs);

/// Index of the smallest cost; ties resolve to the lowest index.
std::size_t argmin(std::span<const double> costs);

}  // namespace socialplan::kernels
