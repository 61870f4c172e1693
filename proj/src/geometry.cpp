#include "socialplan/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace socialplan {

double norm(Point2 p) { return std::hypot(p.x, p.y); }

double distance(Point2 a, Point2 b) { return norm(a - b); }

bool SquareObstacle::contains(Point2 p) const {
  return std::abs(p.x - center.x) <= half_width && std::abs(p.y - center.y) <= half_width;
}

bool Workspace::in_bounds(Point2 p) const {
  return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= height;
}

bool Workspace::is_free(Point2 p) const {
  if (!in_bounds(p)) return false;
  return std::none_of(obstacles.begin(), obstacles.end(),
                      [p](const SquareObstacle& o) { return o.contains(p); });
}

double Trajectory::length() const {
  double total = 0.0;
  for (std::size_t j = 0; j + 1 < waypoints.size(); ++j) total += distance(waypoints[j], waypoints[j + 1]);
  return total;
}

Trajectory straight_line(Point2 start, Point2 goal, std::size_t count) {
  if (count < 2) throw GeometryError("straight_line needs at least two waypoints");
  Trajectory t;
  t.waypoints.reserve(count);
  const auto n = static_cast<double>(count - 1);
  for (std::size_t j = 0; j < count; ++j) {
    const double s = static_cast<double>(j) / n;
    t.waypoints.push_back({start.x + s * (goal.x - start.x), start.y + s * (goal.y - start.y)});
  }
  // exact endpoints regardless of rounding
  t.waypoints.front() = start;
  t.waypoints.back() = goal;
  return t;
}

double segment_point_distance(const Segment& seg, Point2 p) {
  // canonical endpoint order so that swapping a and b gives the identical result
  const bool swap = seg.b.x < seg.a.x || (seg.b.x == seg.a.x && seg.b.y < seg.a.y);
  const Point2 a = swap ? seg.b : seg.a;
  const Point2 b = swap ? seg.a : seg.b;
  const Point2 d = b - a;
  const double len2 = d.x * d.x + d.y * d.y;
  if (len2 == 0.0) return distance(a, p);
  const Point2 ap = p - a;
  const double t = std::clamp((ap.x * d.x + ap.y * d.y) / len2, 0.0, 1.0);
  return distance(a + t * d, p);
}

namespace {

double point_box_distance(Point2 p, const SquareObstacle& obs) {
  const double dx = std::max(std::abs(p.x - obs.center.x) - obs.half_width, 0.0);
  const double dy = std::max(std::abs(p.y - obs.center.y) - obs.half_width, 0.0);
  return std::hypot(dx, dy);
}

// Slab clipping against the closed box.
bool segment_hits_box(const Segment& seg, const SquareObstacle& obs) {
  double t0 = 0.0;
  double t1 = 1.0;
  const double origin[2] = {seg.a.x, seg.a.y};
  const double dir[2] = {seg.b.x - seg.a.x, seg.b.y - seg.a.y};
  const double lo[2] = {obs.center.x - obs.half_width, obs.center.y - obs.half_width};
  const double hi[2] = {obs.center.x + obs.half_width, obs.center.y + obs.half_width};
  for (int axis = 0; axis < 2; ++axis) {
    if (dir[axis] == 0.0) {
      if (origin[axis] < lo[axis] || origin[axis] > hi[axis]) return false;
      continue;
    }
    double ta = (lo[axis] - origin[axis]) / dir[axis];
    double tb = (hi[axis] - origin[axis]) / dir[axis];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;
  }
  return true;
}

}  // namespace

double segment_obstacle_distance(const Segment& seg, const SquareObstacle& obs) {
  if (segment_hits_box(seg, obs)) return 0.0;
  // Disjoint convex sets: the closest pair involves an endpoint of the segment
  // or a corner of the square.
  double best = std::min(point_box_distance(seg.a, obs), point_box_distance(seg.b, obs));
  const double h = obs.half_width;
  for (const Point2 corner : {Point2{-h, -h}, Point2{-h, h}, Point2{h, -h}, Point2{h, h}}) {
    best = std::min(best, segment_point_distance(seg, obs.center + corner));
  }
  return best;
}

bool segment_intersects_disk(const Segment& seg, Point2 center, double radius) {
  return segment_point_distance(seg, center) < radius;
}

bool trajectory_collision_free(const Trajectory& traj, const Workspace& ws) {
  for (std::size_t j = 0; j < traj.size(); ++j) {
    if (!ws.in_bounds(traj[j])) {
      throw GeometryError("waypoint " + std::to_string(j) + " lies outside the workspace");
    }
  }
  for (std::size_t j = 0; j + 1 < traj.size(); ++j) {
    const Segment s = traj.segment(j);
    for (const auto& obs : ws.obstacles) {
      if (!(segment_obstacle_distance(s, obs) > 0.0)) return false;
    }
  }
  return true;
}

}  // namespace socialplan
