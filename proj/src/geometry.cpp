#include "cbsmp/geometry.hpp"

#include <algorithm>
#include <cassert>
#include <limits>

namespace cbsmp {

double wrap_to_pi(double a) {
  double y = std::fmod(a + kPi, 2.0 * kPi);
  if (y < 0) y += 2.0 * kPi;
  return y - kPi;
}

double ang_diff(double from, double to) { return wrap_to_pi(to - from); }

bool ConvexPolygon::is_convex_ccw() const {
  size_t n = vertices.size();
  if (n < 3) return false;
  for (size_t i = 0; i < n; ++i) {
    Vec2 e1 = vertices[(i + 1) % n] - vertices[i];
    Vec2 e2 = vertices[(i + 2) % n] - vertices[(i + 1) % n];
    if (e1.cross(e2) <= 0) return false;
  }
  return true;
}

bool ConvexPolygon::contains(const Vec2& p) const {
  size_t n = vertices.size();
  for (size_t i = 0; i < n; ++i) {
    Vec2 e = vertices[(i + 1) % n] - vertices[i];
    if (e.cross(p - vertices[i]) < 0) return false;
  }
  return true;
}

ConvexPolygon ConvexPolygon::translated(const Vec2& t) const {
  ConvexPolygon out;
  out.vertices.reserve(vertices.size());
  for (const Vec2& v : vertices) out.vertices.push_back(v + t);
  return out;
}

double ConvexPolygon::min_width() const {
  size_t n = vertices.size();
  double best = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < n; ++i) {
    const Vec2& a = vertices[i];
    const Vec2& b = vertices[(i + 1) % n];
    Vec2 e = b - a;
    double len = e.norm();
    if (len == 0) continue;
    double w = 0;
    for (const Vec2& v : vertices) w = std::max(w, e.cross(v - a) / len);
    best = std::min(best, w);
  }
  return best;
}

double dist_point_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  Vec2 ab = b - a;
  double len2 = ab.dot(ab);
  if (len2 == 0) return (p - a).norm();
  double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + ab * t)).norm();
}

static bool segments_cross(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    double v = (q - p).cross(r - p);
    return (v > 0) - (v < 0);
  };
  int o1 = orient(a, b, c), o2 = orient(a, b, d);
  int o3 = orient(c, d, a), o4 = orient(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  auto on_seg = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    return std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) &&
           std::min(p.y, q.y) <= r.y && r.y <= std::max(p.y, q.y);
  };
  if (o1 == 0 && on_seg(a, b, c)) return true;
  if (o2 == 0 && on_seg(a, b, d)) return true;
  if (o3 == 0 && on_seg(c, d, a)) return true;
  if (o4 == 0 && on_seg(c, d, b)) return true;
  return false;
}

double dist_segment_segment(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  if (segments_cross(a, b, c, d)) return 0.0;
  return std::min(std::min(dist_point_segment(a, c, d), dist_point_segment(b, c, d)),
                  std::min(dist_point_segment(c, a, b), dist_point_segment(d, a, b)));
}

double dist_polygon_point(const ConvexPolygon& poly, const Vec2& p) {
  if (poly.contains(p)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  size_t n = poly.vertices.size();
  for (size_t i = 0; i < n; ++i)
    best = std::min(best, dist_point_segment(p, poly.vertices[i], poly.vertices[(i + 1) % n]));
  return best;
}

double dist_polygon_segment(const ConvexPolygon& poly, const Vec2& a, const Vec2& b) {
  if (poly.contains(a) || poly.contains(b)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  size_t n = poly.vertices.size();
  for (size_t i = 0; i < n; ++i) {
    double d = dist_segment_segment(a, b, poly.vertices[i], poly.vertices[(i + 1) % n]);
    if (d == 0.0) return 0.0;
    best = std::min(best, d);
  }
  return best;
}

bool polygons_overlap(const ConvexPolygon& a, const ConvexPolygon& b) {
  auto separated_by_edges_of = [](const ConvexPolygon& p, const ConvexPolygon& q) {
    size_t n = p.vertices.size();
    for (size_t i = 0; i < n; ++i) {
      Vec2 e = p.vertices[(i + 1) % n] - p.vertices[i];
      Vec2 axis{-e.y, e.x};
      double pmin = std::numeric_limits<double>::infinity(), pmax = -pmin;
      for (const Vec2& v : p.vertices) {
        double d = axis.dot(v);
        pmin = std::min(pmin, d);
        pmax = std::max(pmax, d);
      }
      double qmin = std::numeric_limits<double>::infinity(), qmax = -qmin;
      for (const Vec2& v : q.vertices) {
        double d = axis.dot(v);
        qmin = std::min(qmin, d);
        qmax = std::max(qmax, d);
      }
      if (pmax < qmin || qmax < pmin) return true;  // strict: touching overlaps
    }
    return false;
  };
  return !separated_by_edges_of(a, b) && !separated_by_edges_of(b, a);
}

int RobotModel::dof() const {
  switch (kind) {
    case RobotKind::Disk:
    case RobotKind::Polygon:
      return 2;
    case RobotKind::Chain:
      return static_cast<int>(link_lengths.size());
  }
  return 0;
}

double RobotModel::feature_radius() const {
  switch (kind) {
    case RobotKind::Disk:
      return radius;
    case RobotKind::Polygon:
      return 0.5 * body.min_width();
    case RobotKind::Chain:
      return 0.5 * link_width;
  }
  return 0;
}

double RobotModel::reach() const {
  if (kind != RobotKind::Chain) return 1.0;
  double total = 0;
  for (double l : link_lengths) total += l;
  return total;
}

void RobotModel::validate() const {
  if (max_speed <= 0) throw std::invalid_argument("robot " + id + ": max_speed must be positive");
  switch (kind) {
    case RobotKind::Disk:
      if (radius <= 0) throw std::invalid_argument("robot " + id + ": radius must be positive");
      break;
    case RobotKind::Polygon:
      if (!body.is_convex_ccw())
        throw std::invalid_argument("robot " + id + ": polygon must be convex and counterclockwise");
      break;
    case RobotKind::Chain:
      if (link_lengths.empty())
        throw std::invalid_argument("robot " + id + ": chain needs at least one link");
      for (double l : link_lengths)
        if (l <= 0) throw std::invalid_argument("robot " + id + ": link lengths must be positive");
      if (link_width <= 0)
        throw std::invalid_argument("robot " + id + ": link width must be positive");
      break;
  }
}

void Environment::validate() const {
  if (bounds.area() <= 0) throw std::invalid_argument("environment bounds must have positive area");
  for (const ConvexPolygon& obs : obstacles) {
    if (!obs.is_convex_ccw())
      throw std::invalid_argument("obstacles must be convex and counterclockwise");
    for (const Vec2& v : obs.vertices)
      if (!bounds.contains(v)) throw std::invalid_argument("obstacle vertex outside bounds");
  }
}

static void check_dof(const RobotModel& robot, const Configuration& q) {
  if (q.dof() != robot.dof())
    throw DimensionError("configuration dof " + std::to_string(q.dof()) + " does not match robot " +
                         robot.id + " dof " + std::to_string(robot.dof()));
}

std::vector<Vec2> chain_points(const RobotModel& robot, const Configuration& q) {
  std::vector<Vec2> pts;
  pts.reserve(robot.link_lengths.size() + 1);
  pts.push_back(robot.base);
  double phi = 0;
  for (size_t i = 0; i < robot.link_lengths.size(); ++i) {
    phi += q.values[i];
    pts.push_back(pts.back() + Vec2{std::cos(phi), std::sin(phi)} * robot.link_lengths[i]);
  }
  return pts;
}

std::vector<FootprintPiece> footprint(const RobotModel& robot, const Configuration& q) {
  check_dof(robot, q);
  std::vector<FootprintPiece> pieces;
  switch (robot.kind) {
    case RobotKind::Disk: {
      FootprintPiece p;
      p.type = FootprintPiece::Type::Circle;
      p.a = {q.values[0], q.values[1]};
      p.radius = robot.radius;
      pieces.push_back(std::move(p));
      break;
    }
    case RobotKind::Polygon: {
      FootprintPiece p;
      p.type = FootprintPiece::Type::Poly;
      p.poly = robot.body.translated({q.values[0], q.values[1]});
      pieces.push_back(std::move(p));
      break;
    }
    case RobotKind::Chain: {
      std::vector<Vec2> pts = chain_points(robot, q);
      for (size_t i = 0; i + 1 < pts.size(); ++i) {
        FootprintPiece p;
        p.type = FootprintPiece::Type::Capsule;
        p.a = pts[i];
        p.b = pts[i + 1];
        p.radius = 0.5 * robot.link_width;
        pieces.push_back(std::move(p));
      }
      break;
    }
  }
  return pieces;
}

bool pieces_collide(const FootprintPiece& p, const FootprintPiece& q) {
  using T = FootprintPiece::Type;
  if (p.type == T::Circle && q.type == T::Circle)
    return (p.a - q.a).norm() <= p.radius + q.radius;
  if (p.type == T::Circle && q.type == T::Capsule)
    return dist_point_segment(p.a, q.a, q.b) <= p.radius + q.radius;
  if (p.type == T::Capsule && q.type == T::Circle) return pieces_collide(q, p);
  if (p.type == T::Capsule && q.type == T::Capsule)
    return dist_segment_segment(p.a, p.b, q.a, q.b) <= p.radius + q.radius;
  if (p.type == T::Circle && q.type == T::Poly)
    return dist_polygon_point(q.poly, p.a) <= p.radius;
  if (p.type == T::Poly && q.type == T::Circle) return pieces_collide(q, p);
  if (p.type == T::Capsule && q.type == T::Poly)
    return dist_polygon_segment(q.poly, p.a, p.b) <= p.radius;
  if (p.type == T::Poly && q.type == T::Capsule) return pieces_collide(q, p);
  return polygons_overlap(p.poly, q.poly);
}

static bool piece_in_bounds(const Box2& bounds, const FootprintPiece& p) {
  using T = FootprintPiece::Type;
  switch (p.type) {
    case T::Circle:
      return bounds.contains(p.a, p.radius);
    case T::Capsule:
      return bounds.contains(p.a, p.radius) && bounds.contains(p.b, p.radius);
    case T::Poly:
      for (const Vec2& v : p.poly.vertices)
        if (!bounds.contains(v)) return false;
      return true;
  }
  return false;
}

static bool piece_hits_obstacle(const ConvexPolygon& obs, const FootprintPiece& p) {
  using T = FootprintPiece::Type;
  switch (p.type) {
    case T::Circle:
      return dist_polygon_point(obs, p.a) <= p.radius;
    case T::Capsule:
      return dist_polygon_segment(obs, p.a, p.b) <= p.radius;
    case T::Poly:
      return polygons_overlap(obs, p.poly);
  }
  return false;
}

bool is_valid_config(const Environment& env, const RobotModel& robot, const Configuration& q) {
  std::vector<FootprintPiece> pieces = footprint(robot, q);
  for (const FootprintPiece& p : pieces) {
    if (!piece_in_bounds(env.bounds, p)) return false;
    for (const ConvexPolygon& obs : env.obstacles)
      if (piece_hits_obstacle(obs, p)) return false;
  }
  if (robot.kind == RobotKind::Chain) {
    // adjacent links share a joint and always touch; skip them
    for (size_t i = 0; i + 2 < pieces.size(); ++i)
      for (size_t j = i + 2; j < pieces.size(); ++j)
        if (pieces_collide(pieces[i], pieces[j])) return false;
  }
  return true;
}

bool in_collision_pair(const RobotModel& robot_i, const Configuration& q_i,
                       const RobotModel& robot_j, const Configuration& q_j) {
  std::vector<FootprintPiece> fi = footprint(robot_i, q_i);
  std::vector<FootprintPiece> fj = footprint(robot_j, q_j);
  for (const FootprintPiece& p : fi)
    for (const FootprintPiece& q : fj)
      if (pieces_collide(p, q)) return true;
  return false;
}

Configuration interpolate(const RobotModel& robot, const Configuration& q_a,
                          const Configuration& q_b, double s) {
  check_dof(robot, q_a);
  check_dof(robot, q_b);
  if (s < 0.0 || s > 1.0) throw std::invalid_argument("interpolation parameter outside [0,1]");
  Configuration out;
  out.values.resize(q_a.values.size());
  bool revolute = robot.kind == RobotKind::Chain;
  for (size_t i = 0; i < q_a.values.size(); ++i) {
    if (revolute)
      out.values[i] = wrap_to_pi(q_a.values[i] + s * ang_diff(q_a.values[i], q_b.values[i]));
    else
      out.values[i] = q_a.values[i] + s * (q_b.values[i] - q_a.values[i]);
  }
  return out;
}

double cspace_distance(const RobotModel& robot, const Configuration& q_a,
                       const Configuration& q_b, double angular_weight) {
  check_dof(robot, q_a);
  check_dof(robot, q_b);
  if (robot.kind == RobotKind::Chain) {
    double d = 0;
    for (size_t i = 0; i < q_a.values.size(); ++i)
      d += std::abs(ang_diff(q_a.values[i], q_b.values[i]));
    return d * angular_weight;
  }
  return std::hypot(q_b.values[0] - q_a.values[0], q_b.values[1] - q_a.values[1]);
}

bool is_valid_edge(const Environment& env, const RobotModel& robot, const Configuration& q_a,
                   const Configuration& q_b, double step) {
  if (step <= 0) throw std::invalid_argument("edge-validation step must be positive");
  double dist = cspace_distance(robot, q_a, q_b);
  int n = std::max(1, static_cast<int>(std::ceil(dist / step)));
  for (int i = 0; i <= n; ++i) {
    if (!is_valid_config(env, robot, interpolate(robot, q_a, q_b, static_cast<double>(i) / n)))
      return false;
  }
  return true;
}

}  // namespace cbsmp
