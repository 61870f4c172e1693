#include <doctest.h>

#include <cmath>
#include <random>

#include "socialplan/geometry.hpp"
#include "support/oracles.hpp"

using namespace socialplan;

TEST_SUITE("geometry") {
  TEST_CASE("segment to square distance, worked examples") {
    const SquareObstacle obs{{5, 5}, 1};
    CHECK(segment_obstacle_distance({{0, 0}, {0, 10}}, obs) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(segment_obstacle_distance({{4, 5}, {6, 5}}, obs) == 0.0);
    CHECK(segment_obstacle_distance({{7, 7}, {9, 9}}, obs) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  }

  TEST_CASE("frozen distances agree with the sampling oracle") {
    CHECK(std::abs(oracle::segment_box_distance({0, 0}, {0, 10}, {5, 5}, 1) - 4.0) < 1e-3);
    CHECK(std::abs(oracle::segment_box_distance({7, 7}, {9, 9}, {5, 5}, 1) - 1.41421356) < 1e-3);
  }

  TEST_CASE("segment inside or touching the square has distance zero") {
    const SquareObstacle obs{{5, 5}, 1};
    CHECK(segment_obstacle_distance({{4.5, 4.5}, {5.5, 5.5}}, obs) == 0.0);
    CHECK(segment_obstacle_distance({{6, 0}, {6, 10}}, obs) == 0.0);
    CHECK(segment_obstacle_distance({{3, 7}, {7, 3}}, obs) == 0.0);
    CHECK(segment_obstacle_distance({{5, 5}, {5, 5}}, obs) == 0.0);
  }

  TEST_CASE("degenerate segment reduces to point distance") {
    const SquareObstacle obs{{0, 0}, 1};
    CHECK(segment_obstacle_distance({{4, 5}, {4, 5}}, obs) == doctest::Approx(5.0));
    CHECK(segment_point_distance({{1, 1}, {1, 1}}, {4, 5}) == doctest::Approx(5.0));
  }

  TEST_CASE("agreement with the sampling oracle on random pairs") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> coord(-2.0, 22.0);
    std::uniform_real_distribution<double> half(0.2, 3.0);
    int zeros = 0;
    for (int i = 0; i < 300; ++i) {
      const Segment s{{coord(rng), coord(rng)}, {coord(rng), coord(rng)}};
      const SquareObstacle o{{coord(rng), coord(rng)}, half(rng)};
      const double d = segment_obstacle_distance(s, o);
      const double ref = oracle::segment_box_distance(s.a, s.b, o.center, o.half_width, 2000);
      CHECK(std::abs(d - ref) < 1e-3);
      if (ref == 0.0) {
        ++zeros;
        CHECK(d == 0.0);
      }
    }
    CHECK(zeros > 0);
  }

  TEST_CASE("point distance is symmetric in segment endpoints and 1-Lipschitz in the point") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> c(-5, 5);
    std::uniform_real_distribution<double> e(-1e-3, 1e-3);
    for (int i = 0; i < 500; ++i) {
      const Point2 a{c(rng), c(rng)}, b{c(rng), c(rng)}, p{c(rng), c(rng)};
      CHECK(segment_point_distance({a, b}, p) == segment_point_distance({b, a}, p));
      const Point2 q{p.x + e(rng), p.y + e(rng)};
      CHECK(std::abs(segment_point_distance({a, b}, p) - segment_point_distance({a, b}, q)) <=
            distance(p, q) + 1e-12);
    }
  }

  TEST_CASE("disk intersection is strict") {
    CHECK(segment_intersects_disk({{0, 5}, {10, 5}}, {5, 5}, 0.5));
    CHECK_FALSE(segment_intersects_disk({{0, 0}, {10, 0}}, {5, 5}, 0.5));
    CHECK_FALSE(segment_intersects_disk({{0, 0}, {10, 0}}, {5, 0.5}, 0.5));
    CHECK(segment_intersects_disk({{0, 0}, {10, 0}}, {5, 0.49}, 0.5));
  }

  TEST_CASE("trajectory collision checks") {
    Workspace ws{20, 20, {{{9, 11}, 1}, {{11, 9}, 1}}};
    CHECK_FALSE(trajectory_collision_free(straight_line({0, 0}, {20, 20}, 15), ws));
    CHECK(trajectory_collision_free(straight_line({0, 0}, {20, 20}, 15), Workspace{20, 20, {}}));

    const Trajectory hug{{{0, 12.1}, {20, 12.1}}};
    CHECK(trajectory_collision_free(hug, ws));
    const Trajectory touch{{{0, 12}, {20, 12}}};
    CHECK_FALSE(trajectory_collision_free(touch, ws));

    const Trajectory outside{{{0, 0}, {21, 5}}};
    CHECK_THROWS_AS(trajectory_collision_free(outside, ws), GeometryError);
  }

  TEST_CASE("removing an obstacle never makes a free trajectory collide") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> c(0, 20);
    for (int i = 0; i < 200; ++i) {
      Trajectory t;
      for (int j = 0; j < 6; ++j) t.waypoints.push_back({c(rng), c(rng)});
      Workspace ws{20, 20, {{{c(rng), c(rng)}, 1}, {{c(rng), c(rng)}, 1.5}}};
      const bool before = trajectory_collision_free(t, ws);
      ws.obstacles.pop_back();
      if (before) CHECK(trajectory_collision_free(t, ws));
    }
  }

  TEST_CASE("straight line and length") {
    const Trajectory t = straight_line({0, 0}, {20, 20}, 15);
    REQUIRE(t.size() == 15);
    CHECK(t[0] == Point2{0, 0});
    CHECK(t[14] == Point2{20, 20});
    CHECK(t.length() == doctest::Approx(20.0 * std::sqrt(2.0)));
    CHECK_THROWS(straight_line({0, 0}, {1, 1}, 1));
  }

  TEST_CASE("workspace membership") {
    const Workspace ws{20, 20, {{{5, 5}, 1}}};
    CHECK(ws.in_bounds({0, 0}));
    CHECK(ws.in_bounds({20, 20}));
    CHECK_FALSE(ws.in_bounds({20.0001, 3}));
    CHECK_FALSE(ws.is_free({6, 6}));
    CHECK(ws.is_free({6.01, 6}));
  }
}
