#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace socialplan {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }

double norm(Point2 p);
double distance(Point2 a, Point2 b);

/// Closed segment between two points. a == b is a valid degenerate segment.
struct Segment {
  Point2 a;
  Point2 b;
};

/// Axis-aligned filled square. Treated as a closed set.
struct SquareObstacle {
  Point2 center;
  double half_width = 1.0;

  bool contains(Point2 p) const;
};

struct Workspace {
  double width = 20.0;
  double height = 20.0;
  std::vector<SquareObstacle> obstacles;

  bool in_bounds(Point2 p) const;
  /// In bounds and not inside (or on the boundary of) any obstacle.
  bool is_free(Point2 p) const;
};

/// Ordered waypoints; waypoints.front() is the start and waypoints.back() the goal.
struct Trajectory {
  std::vector<Point2> waypoints;

  std::size_t size() const { return waypoints.size(); }
  const Point2& operator[](std::size_t i) const { return waypoints[i]; }
  Point2& operator[](std::size_t i) { return waypoints[i]; }

  /// Sum of consecutive segment lengths.
  double length() const;
  Segment segment(std::size_t j) const { return {waypoints[j], waypoints[j + 1]}; }

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// Evenly spaced straight line with `count` waypoints (count >= 2).
Trajectory straight_line(Point2 start, Point2 goal, std::size_t count);

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double segment_point_distance(const Segment& seg, Point2 p);

/// Distance between a segment and a filled square; 0 when they touch or overlap.
double segment_obstacle_distance(const Segment& seg, const SquareObstacle& obs);

/// Strict: a segment tangent to the disk does not intersect it.
bool segment_intersects_disk(const Segment& seg, Point2 center, double radius);

/// Every consecutive-waypoint segment keeps positive distance to every obstacle.
/// Throws GeometryError if a waypoint lies outside the workspace bounds.
bool trajectory_collision_free(const Trajectory& traj, const Workspace& ws);

}  // namespace socialplan
