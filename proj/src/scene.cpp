#include "socialplan/scene.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace socialplan {

void Scene::validate() const {
  const Workspace& ws = workspace;
  if (!(ws.width > 0.0) || !(ws.height > 0.0)) throw std::invalid_argument("workspace must have positive size");
  for (const auto& o : ws.obstacles) {
    if (!(o.half_width > 0.0)) throw std::invalid_argument("obstacle half_width must be positive");
    if (o.center.x - o.half_width < 0.0 || o.center.x + o.half_width > ws.width ||
        o.center.y - o.half_width < 0.0 || o.center.y + o.half_width > ws.height) {
      throw std::invalid_argument("obstacle must lie inside the workspace");
    }
  }
  if (!ws.is_free(start) || !ws.is_free(goal)) throw std::invalid_argument("start and goal must be in free space");
  if (initial.size() < 3) throw std::invalid_argument("initial trajectory needs at least three waypoints");
  if (!(initial.waypoints.front() == start) || !(initial.waypoints.back() == goal)) {
    throw std::invalid_argument("initial trajectory must run from start to goal");
  }
  for (const auto& p : initial.waypoints) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw std::invalid_argument("non-finite waypoint");
  }
}

Scene default_scene() {
  Scene s;
  s.workspace.width = 20.0;
  s.workspace.height = 20.0;
  s.workspace.obstacles = {{{9.0, 11.0}, 1.0}, {{11.0, 9.0}, 1.0}};
  s.start = {0.0, 0.0};
  s.goal = {20.0, 20.0};
  s.initial = straight_line(s.start, s.goal, 15);
  return s;
}

nlohmann::json to_json(const Trajectory& t) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : t.waypoints) arr.push_back({p.x, p.y});
  return arr;
}

Trajectory trajectory_from_json(const nlohmann::json& j) {
  Trajectory t;
  for (const auto& p : j) {
    if (!p.is_array() || p.size() != 2) throw std::invalid_argument("waypoint must be [x, y]");
    t.waypoints.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  }
  return t;
}

nlohmann::json to_json(const Scene& scene) {
  nlohmann::json obstacles = nlohmann::json::array();
  for (const auto& o : scene.workspace.obstacles) {
    obstacles.push_back({{"center", {o.center.x, o.center.y}}, {"half_width", o.half_width}});
  }
  return {
      {"workspace", {{"width", scene.workspace.width}, {"height", scene.workspace.height}}},
      {"obstacles", obstacles},
      {"start", {scene.start.x, scene.start.y}},
      {"goal", {scene.goal.x, scene.goal.y}},
      {"initial_trajectory", to_json(scene.initial)},
  };
}

Scene scene_from_json(const nlohmann::json& j) {
  try {
    Scene s;
    s.workspace.width = j.at("workspace").at("width").get<double>();
    s.workspace.height = j.at("workspace").at("height").get<double>();
    for (const auto& o : j.value("obstacles", nlohmann::json::array())) {
      const auto& c = o.at("center");
      s.workspace.obstacles.push_back({{c.at(0).get<double>(), c.at(1).get<double>()}, o.at("half_width").get<double>()});
    }
    s.start = {j.at("start").at(0).get<double>(), j.at("start").at(1).get<double>()};
    s.goal = {j.at("goal").at(0).get<double>(), j.at("goal").at(1).get<double>()};
    if (j.contains("initial_trajectory")) {
      s.initial = trajectory_from_json(j.at("initial_trajectory"));
    } else {
      s.initial = straight_line(s.start, s.goal, j.value("waypoints", 15));
    }
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed scene: ") + e.what());
  }
}

Scene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open scene file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("malformed scene file " + path.string() + ": " + e.what());
  }
  return scene_from_json(j);
}

}  // namespace socialplan
