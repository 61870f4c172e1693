#pragma once

#include <cstddef>
#include <json.hpp>
#include <stdexcept>
#include <vector>

#include "socialplan/feedback.hpp"
#include "socialplan/geometry.hpp"
#include "socialplan/rng.hpp"

namespace socialplan {

struct HumanAgent {
  Point2 location;
  double zone_radius = 0.5;
  double move_radius = 0.0;
};

/// Snapshot of the simulated humans at one epoch.
struct Population {
  std::vector<HumanAgent> agents;
  int epoch = 0;
  Workspace workspace;
  std::vector<double> radii_set;
};

inline const std::vector<double> kDefaultZoneRadii = {0.3, 0.4, 0.5, 0.7};

class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// p agents placed uniformly in free space; radii drawn uniformly from radii_set.
Population spawn_population(int p, const Workspace& ws, const std::vector<double>& radii_set, double move_radius,
                            Rng& rng);

/// Moves every agent to an area-uniform point of its movement disk (kept in free
/// space by rejection) and resamples zone radii.
Population advance_epoch(const Population& pop, Rng& rng);

inline constexpr int kMaxMoveAttempts = 10000;

FeedbackResponse evaluate(const Population& pop, const Trajectory& traj, bool with_reports);

nlohmann::json to_json(const Population& pop);

/// FeedbackSource backed by a population snapshot; counts the queries it answers.
class PopulationOracle final : public FeedbackSource {
 public:
  explicit PopulationOracle(Population pop) : pop_(std::move(pop)) {}

  FeedbackResponse query(const Trajectory& tracked, bool with_reports) override {
    ++queries_;
    return evaluate(pop_, tracked, with_reports);
  }

  const Population& population() const { return pop_; }
  int queries() const { return queries_; }

 private:
  Population pop_;
  int queries_ = 0;
};

}  // namespace socialplan
