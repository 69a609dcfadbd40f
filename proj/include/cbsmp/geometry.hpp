#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace cbsmp {

constexpr double kPi = 3.14159265358979323846;

struct Vec2 {
  double x = 0;
  double y = 0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }
};

struct Box2 {
  Vec2 min;
  Vec2 max;

  double width() const { return max.x - min.x; }
  double height() const { return max.y - min.y; }
  double area() const { return width() * height(); }
  bool contains(const Vec2& p, double margin = 0.0) const {
    return p.x >= min.x + margin && p.x <= max.x - margin && p.y >= min.y + margin &&
           p.y <= max.y - margin;
  }
};

// Counterclockwise convex polygon in world or body frame.
struct ConvexPolygon {
  std::vector<Vec2> vertices;

  bool is_convex_ccw() const;
  bool contains(const Vec2& p) const;  // closed
  ConvexPolygon translated(const Vec2& t) const;
  double min_width() const;
};

// Angle helpers. wrap_to_pi maps into [-pi, pi); ang_diff is the signed
// shortest rotation taking `from` to `to`.
double wrap_to_pi(double a);
double ang_diff(double from, double to);

double dist_point_segment(const Vec2& p, const Vec2& a, const Vec2& b);
double dist_segment_segment(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d);
// 0 when intersecting or contained.
double dist_polygon_point(const ConvexPolygon& poly, const Vec2& p);
double dist_polygon_segment(const ConvexPolygon& poly, const Vec2& a, const Vec2& b);
// Separating-axis test over closed sets: touching counts as overlap.
bool polygons_overlap(const ConvexPolygon& a, const ConvexPolygon& b);

struct Configuration {
  std::vector<double> values;

  int dof() const { return static_cast<int>(values.size()); }
  bool operator==(const Configuration& o) const { return values == o.values; }
};

enum class RobotKind { Disk, Polygon, Chain };

struct RobotModel {
  std::string id;
  RobotKind kind = RobotKind::Disk;
  double max_speed = 1.0;  // m/s for translation, rad/s for chains

  double radius = 0.0;               // Disk
  ConvexPolygon body;                // Polygon, body frame, ccw
  Vec2 base;                         // Chain, fixed base point
  std::vector<double> link_lengths;  // Chain
  double link_width = 0.0;           // Chain

  int dof() const;
  // Radius of the smallest feature: disk radius, half the polygon's minimal
  // width, or half the link width. Drives edge-validation and dt defaults.
  double feature_radius() const;
  // Longest straight-line distance any body point can travel per unit of
  // C-space speed: 1 for translating bodies, total link length for chains.
  double reach() const;
  void validate() const;
};

struct Environment {
  Box2 bounds;
  std::vector<ConvexPolygon> obstacles;

  void validate() const;
};

// One rigid piece of a robot footprint at a specific configuration.
struct FootprintPiece {
  enum class Type { Circle, Capsule, Poly } type;
  Vec2 a;            // circle center / capsule endpoint
  Vec2 b;            // capsule endpoint
  double radius = 0; // circle radius / capsule half-width
  ConvexPolygon poly;
};

std::vector<FootprintPiece> footprint(const RobotModel& robot, const Configuration& q);
// Chain forward kinematics: joint positions base..tip (link_count+1 points).
std::vector<Vec2> chain_points(const RobotModel& robot, const Configuration& q);

bool pieces_collide(const FootprintPiece& p, const FootprintPiece& q);

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

bool is_valid_config(const Environment& env, const RobotModel& robot, const Configuration& q);
bool in_collision_pair(const RobotModel& robot_i, const Configuration& q_i,
                       const RobotModel& robot_j, const Configuration& q_j);
Configuration interpolate(const RobotModel& robot, const Configuration& q_a,
                          const Configuration& q_b, double s);
// Euclidean over translation dofs plus |shortest angular difference| per
// revolute dof. angular_weight scales the revolute share.
double cspace_distance(const RobotModel& robot, const Configuration& q_a,
                       const Configuration& q_b, double angular_weight = 1.0);
bool is_valid_edge(const Environment& env, const RobotModel& robot, const Configuration& q_a,
                   const Configuration& q_b, double step);

inline double default_edge_step(const RobotModel& robot) { return 0.5 * robot.feature_radius(); }

}  // namespace cbsmp
