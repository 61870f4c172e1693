#pragma once

#include <cstddef>
#include <vector>

#include "socialplan/geometry.hpp"

namespace socialplan {

/// What the planner learns from one query: a complaint count and, when humans
/// report, the waypoint indices each complaining human objects to.
struct FeedbackResponse {
  int complaint_count = 0;
  std::vector<std::vector<std::size_t>> reports;
};

/// Source of bandit feedback on MPC-tracked trajectories. This is the planner's only
/// view of the humans.
class FeedbackSource {
 public:
  virtual ~FeedbackSource() = default;
  virtual FeedbackResponse query(const Trajectory& tracked, bool with_reports) = 0;
};

}  // namespace socialplan
