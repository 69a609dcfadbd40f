#include "cbsmp/svg.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cbsmp {

namespace {

const char* kPalette[] = {"#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4",
                          "#46f0f0", "#f032e6", "#bcf60c", "#008080", "#9a6324"};

struct Mapper {
  double scale, pad, ymax;
  double x(double wx) const { return pad + wx * scale; }
  double y(double wy) const { return pad + (ymax - wy) * scale; }  // svg y grows downward
};

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

Vec2 robot_point(const RobotModel& robot, const Configuration& q) {
  if (robot.kind == RobotKind::Chain) return chain_points(robot, q).back();
  return {q.values[0], q.values[1]};
}

void draw_robot_shape(std::ostringstream& out, const Mapper& m, const RobotModel& robot,
                      const Configuration& q, const std::string& color, double opacity) {
  char buf[256];
  if (robot.kind == RobotKind::Disk) {
    std::snprintf(buf, sizeof buf,
                  "  <circle cx=\"%s\" cy=\"%s\" r=\"%s\" fill=\"%s\" fill-opacity=\"%.2f\"/>\n",
                  num(m.x(q.values[0])).c_str(), num(m.y(q.values[1])).c_str(),
                  num(robot.radius * m.scale).c_str(), color.c_str(), opacity);
    out << buf;
  } else if (robot.kind == RobotKind::Polygon) {
    out << "  <polygon points=\"";
    for (const Vec2& v : robot.body.translated({q.values[0], q.values[1]}).vertices)
      out << num(m.x(v.x)) << "," << num(m.y(v.y)) << " ";
    out << "\" fill=\"" << color << "\" fill-opacity=\"" << opacity << "\"/>\n";
  } else {
    std::vector<Vec2> pts = chain_points(robot, q);
    out << "  <polyline points=\"";
    for (const Vec2& p : pts) out << num(m.x(p.x)) << "," << num(m.y(p.y)) << " ";
    out << "\" fill=\"none\" stroke=\"" << color << "\" stroke-opacity=\"" << opacity
        << "\" stroke-width=\"" << num(robot.link_width * m.scale) << "\" stroke-linecap=\"round\""
        << " stroke-linejoin=\"round\"/>\n";
  }
}

}  // namespace

std::string render_svg(const Scenario& scenario, const SolutionFile* solution) {
  const Box2& b = scenario.env.bounds;
  double target = 800.0;
  Mapper m;
  m.scale = target / std::max(b.width(), b.height());
  m.pad = 20.0;
  m.ymax = b.max.y;
  double width = b.width() * m.scale + 2 * m.pad;
  double height = b.height() * m.scale + 2 * m.pad;

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
      << num(height) << "\" viewBox=\"0 0 " << num(width) << " " << num(height) << "\">\n";
  out << "  <rect x=\"" << num(m.x(b.min.x)) << "\" y=\"" << num(m.y(b.max.y)) << "\" width=\""
      << num(b.width() * m.scale) << "\" height=\"" << num(b.height() * m.scale)
      << "\" fill=\"white\" stroke=\"black\" stroke-width=\"2\"/>\n";

  for (const ConvexPolygon& obs : scenario.env.obstacles) {
    out << "  <polygon points=\"";
    for (const Vec2& v : obs.vertices) out << num(m.x(v.x)) << "," << num(m.y(v.y)) << " ";
    out << "\" fill=\"#707070\"/>\n";
  }

  for (size_t i = 0; i < scenario.robots.size(); ++i) {
    const std::string color = kPalette[i % (sizeof kPalette / sizeof kPalette[0])];
    const RobotModel& robot = scenario.robots[i];
    draw_robot_shape(out, m, robot, scenario.starts[i], color, 0.55);
    draw_robot_shape(out, m, robot, scenario.goals[i], color, 0.2);
    Vec2 g = robot_point(robot, scenario.goals[i]);
    out << "  <circle cx=\"" << num(m.x(g.x)) << "\" cy=\"" << num(m.y(g.y))
        << "\" r=\"6\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
  }

  if (solution) {
    for (size_t i = 0; i < solution->trajectories.size(); ++i) {
      if (i >= scenario.robots.size()) break;
      const std::string color = kPalette[i % (sizeof kPalette / sizeof kPalette[0])];
      const RobotModel& robot = scenario.robots[i];
      out << "  <polyline fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"2\" stroke-dasharray=\"none\" points=\"";
      for (const Configuration& q : solution->trajectories[i]) {
        Vec2 p = robot_point(robot, q);
        out << num(m.x(p.x)) << "," << num(m.y(p.y)) << " ";
      }
      out << "\"/>\n";
    }
  }
  out << "</svg>\n";
  return out.str();
}

void render_svg_file(const Scenario& scenario, const SolutionFile* solution,
                     const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << render_svg(scenario, solution);
}

}  // namespace cbsmp
