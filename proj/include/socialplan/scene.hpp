#pragma once

#include <filesystem>
#include <json.hpp>

#include "socialplan/geometry.hpp"

namespace socialplan {

struct Scene {
  Workspace workspace;
  Point2 start;
  Point2 goal;
  Trajectory initial;

  /// Throws std::invalid_argument when the scene is inconsistent.
  void validate() const;
};

/// 20x20 workspace, 2x2 obstacles at (9,11) and (11,9), a 15-waypoint straight
/// line from (0,0) to (20,20).
Scene default_scene();

nlohmann::json to_json(const Scene& scene);
Scene scene_from_json(const nlohmann::json& j);
Scene load_scene(const std::filesystem::path& path);

nlohmann::json to_json(const Trajectory& t);
Trajectory trajectory_from_json(const nlohmann::json& j);

}  // namespace socialplan
