#include "socialplan/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace socialplan {

namespace {

constexpr long kMaxSpawnAttempts = 1'000'000;

double draw_radius(const std::vector<double>& radii_set, Rng& rng) {
  if (radii_set.empty()) throw OracleError("zone radius set is empty");
  std::uniform_int_distribution<std::size_t> pick(0, radii_set.size() - 1);
  return radii_set[pick(rng)];
}

}  // namespace

Population spawn_population(int p, const Workspace& ws, const std::vector<double>& radii_set, double move_radius,
                            Rng& rng) {
  if (p < 0) throw OracleError("population size must be >= 0");
  Population pop;
  pop.workspace = ws;
  pop.radii_set = radii_set;
  pop.agents.reserve(static_cast<std::size_t>(p));
  for (int k = 0; k < p; ++k) {
    HumanAgent agent;
    long attempts = 0;
    do {
      if (++attempts > kMaxSpawnAttempts) throw OracleError("obstacle-free space has no usable area");
      agent.location = {uniform(rng, 0.0, ws.width), uniform(rng, 0.0, ws.height)};
    } while (!ws.is_free(agent.location));
    agent.zone_radius = draw_radius(radii_set, rng);
    agent.move_radius = move_radius;
    pop.agents.push_back(agent);
  }
  return pop;
}

Population advance_epoch(const Population& pop, Rng& rng) {
  Population next = pop;
  ++next.epoch;
  for (auto& agent : next.agents) {
    for (int attempt = 0; attempt < kMaxMoveAttempts; ++attempt) {
      const double rho = agent.move_radius * std::sqrt(uniform01(rng));
      const double phi = 2.0 * std::numbers::pi * uniform01(rng);
      const Point2 candidate{agent.location.x + rho * std::cos(phi), agent.location.y + rho * std::sin(phi)};
      if (pop.workspace.is_free(candidate)) {
        agent.location = candidate;
        break;
      }
    }
    agent.zone_radius = draw_radius(pop.radii_set, rng);
  }
  return next;
}

FeedbackResponse evaluate(const Population& pop, const Trajectory& traj, bool with_reports) {
  FeedbackResponse out;
  if (traj.size() < 2) return out;
  const std::size_t last = traj.size() - 1;
  for (const auto& agent : pop.agents) {
    bool complains = false;
    std::set<std::size_t> indices;
    for (std::size_t j = 0; j < last; ++j) {
      if (!segment_intersects_disk(traj.segment(j), agent.location, agent.zone_radius)) continue;
      complains = true;
      if (!with_reports) break;
      for (const std::size_t idx : {j, j + 1}) {
        if (idx >= 1 && idx + 1 <= last) indices.insert(idx);
      }
    }
    if (!complains) continue;
    ++out.complaint_count;
    if (with_reports) out.reports.emplace_back(indices.begin(), indices.end());
  }
  return out;
}

nlohmann::json to_json(const Population& pop) {
  nlohmann::json agents = nlohmann::json::array();
  for (const auto& a : pop.agents) {
    agents.push_back({{"x", a.location.x}, {"y", a.location.y}, {"zone_radius", a.zone_radius}});
  }
  return {{"epoch", pop.epoch}, {"agents", agents}};
}

}  // namespace socialplan
